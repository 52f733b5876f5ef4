"""
Radial monotonicity on Euclidean space
======================================

Ball integrals of |psi|^4 and |psi|^2 for the constant solution on R^3 satisfy
the radial identity exactly, while a Gaussian (not a solution) does not.
"""

import numpy as np

from spinlab import ModelParams
from spinlab.monotonicity import (
    constant_spinor,
    decay_functional,
    euclidean_hessian_spectrum,
    gaussian_spinor,
    monotonicity_residual,
    radial_profile,
)

c = np.array([0.6, 0.0])
p = ModelParams(lam=-0.36, mu=1.0)  # lam = -mu |c|^2
radii = np.linspace(0.25, 5.0, 20)

exact = radial_profile(constant_spinor(c), 3, p, radii)
res = monotonicity_residual(exact, p)
print("constant solution, max residual", np.max(np.abs(res.residual)))

hess = euclidean_hessian_spectrum(3)
print("Omega =", hess.Omega)
print("r^Omega * B4(r):", np.round(decay_functional(exact, hess.Omega)[::5], 6))

gauss = radial_profile(gaussian_spinor(c), 3, p, radii)
print("Gaussian, residual at r =", radii[3], ":", monotonicity_residual(gauss, p).residual[3])
