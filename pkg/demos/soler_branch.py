"""
Continuing an eigenpair into a nonlinear branch
===============================================

Starts from the lowest eigenpair on the twisted 2-torus, fixes the L^2 norm and
turns on the quartic coupling.  For a single plane wave |psi| is constant, so
lambda moves linearly in mu with slope -|psi|^2 (Soler), +|psi|^2/N
(Gross-Neveu) and +|psi|^2 (Thirring).
"""

import numpy as np

from spinlab import ANTIPERIODIC, ModelParams, TorusLattice, build_clifford_rep, build_dirac, dirac_spectrum
from spinlab.solver import solve_branch

lattice = TorusLattice.uniform(2, 32, 2 * np.pi, ANTIPERIODIC)
D = build_dirac(lattice, build_clifford_rep(2))
start = dirac_spectrum(D, 1)[0]
rho = 1 / lattice.volume  # |psi|^2 for a unit-norm plane wave

for model, slope in [("soler", -rho), ("gross_neveu", rho / 2), ("thirring", rho)]:
    state = solve_branch(D, model, start, 0.5, 10, tol=1e-10, target_norm=1.0,
                         params=ModelParams(flavors=2))
    print(f"{model:12s} lambda(0.5) = {state.lam:.12f}  linear prediction "
          f"{start[0] + 0.5 * slope:.12f}  residual {state.residual_norm:.1e}")

# the whole branch is stored in the history
for mu, lam, res in state.history[::2]:
    print(f"  mu = {mu:.2f}  lambda = {lam:.10f}")
