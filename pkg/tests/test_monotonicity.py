import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from spinlab.models import ModelParams
from spinlab.monotonicity import (
    QuadratureError,
    coarea_residual,
    constant_spinor,
    decay_functional,
    euclidean_hessian_spectrum,
    gaussian_spinor,
    integrated_residual,
    manifold_monotone_bound,
    monotonicity_residual,
    omega_factor,
    radial_profile,
    sphere_rule,
    young_bound_violation,
)


def _ball_volume(n, R):
    return np.pi ** (n / 2) / gamma(n / 2 + 1) * R ** n


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 4), order=st.integers(2, 10))
def test_sphere_rule_area_and_moments(n, order):
    pts, w = sphere_rule(n, order)
    area = 2 * np.pi ** (n / 2) / gamma(n / 2)
    assert abs(w.sum() - area) <= 1e-12 * area
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    # odd moments vanish, x_1^2 averages to 1/n
    assert abs(w @ pts[:, 0]) <= 1e-12
    assert abs(w @ pts[:, -1] ** 2 - area / n) <= 1e-12 * area


@pytest.mark.parametrize("n", [2, 3, 4])
def test_omega_euclidean(n):
    hess = euclidean_hessian_spectrum(n)
    assert hess.Omega == 2 - n
    assert hess.omega_max == 1.0
    assert omega_factor([1.0, 3.0, 2.0]) == 0.0
    with pytest.raises(ValueError):
        omega_factor([])


@pytest.mark.parametrize("n, c", [(2, [0.5, 0.2j]), (3, [0.6, 0.0])])
def test_constant_solution_profile(n, c):
    c = np.array(c)
    c2 = float(np.vdot(c, c).real)
    mu = 1.3
    p = ModelParams(-mu * c2, mu)
    radii = np.linspace(0.2, 4.0, 20)
    prof = radial_profile(constant_spinor(c), n, p, radii)
    assert np.allclose(prof.ball_l2, c2 * _ball_volume(n, radii), rtol=1e-13)
    assert np.allclose(prof.ball_l4, c2 ** 2 * _ball_volume(n, radii), rtol=1e-13)
    assert np.all(prof.flux == 0)
    res = monotonicity_residual(prof, p)
    assert np.max(np.abs(res.residual)) <= 1e-8 * max(1.0, np.max(np.abs(res.lhs)))
    # both sides equal 2 mu c^4 |S^{n-1}|/n r: the identity's hand oracle
    area = 2 * np.pi ** (n / 2) / gamma(n / 2)
    assert np.allclose(res.rhs, 2 * mu * c2 ** 2 * area / n * radii, rtol=1e-12)
    assert abs(integrated_residual(prof, p, radii[2], radii[15])) <= 1e-10


def test_negative_mu_flips_both_sides():
    c = np.array([0.6, 0.0])
    prof = radial_profile(constant_spinor(c), 3, None, np.linspace(0.5, 2, 5))
    a = monotonicity_residual(prof, ModelParams(-0.36, 1.0))
    b = monotonicity_residual(prof, ModelParams(0.36, -1.0))
    assert np.allclose(a.lhs, -b.lhs) and np.allclose(a.rhs, -b.rhs)


def test_gaussian_ball_integral_matches_radial_oracle():
    psi0 = np.array([0.3, 0.4j])
    prof = radial_profile(gaussian_spinor(psi0), 3, None, [1.0, 6.0], radial_order=48)
    oracle = 4 * np.pi * quad(lambda r: r ** 2 * np.exp(-2 * r ** 2), 0, 6, epsabs=1e-15)[0] * 0.25
    assert abs(prof.ball_l2[1] - oracle) <= 1e-10 * oracle
    assert prof.ball_l2[1] == pytest.approx(0.25 * (np.pi / 2) ** 1.5, rel=1e-10)


def test_gaussian_is_not_a_solution():
    prof = radial_profile(gaussian_spinor([1.0, 0.0]), 3, None, np.linspace(0.5, 1.5, 5))
    res = monotonicity_residual(prof, ModelParams(-1.0, 1.0))
    assert abs(res.residual[2]) >= 1e-3


def test_coarea_converges_at_second_order():
    errs = []
    for m in (61, 121, 241):
        radii = np.linspace(0.5, 2.0, m)
        prof = radial_profile(gaussian_spinor([1.0, 0.0]), 2, None, radii)
        errs.append(np.max(np.abs(coarea_residual(prof))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.8), orders


def test_quadrature_self_check_raises():
    with pytest.raises(QuadratureError):
        radial_profile(gaussian_spinor([1.0, 0.0], alpha=50.0), 3, None, [1.0, 2.0, 3.0],
                       radial_order=4, sphere_order=2)
    with pytest.raises(ValueError):
        radial_profile(constant_spinor([1, 0]), 2, None, [1.0, 0.5])


def test_manifold_bound_is_tight_for_constant_solution():
    c = np.array([0.6, 0.0])
    p = ModelParams(-0.36, 1.0)
    radii = np.linspace(0.5, 3.0, 101)
    prof = radial_profile(constant_spinor(c), 3, p, radii)
    hess = euclidean_hessian_spectrum(3)
    rep = manifold_monotone_bound(prof, hess.Omega, hess.omega_max, p, radii[0], radii[-1])
    assert abs(rep.difference) <= 1e-3 * abs(rep.lhs)
    with pytest.raises(ValueError):
        manifold_monotone_bound(prof, hess.Omega, 1.0, p, 0.77, 2.0)
    assert np.allclose(decay_functional(prof, hess.Omega), radii ** -1 * prof.ball_l4)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), alpha=st.floats(0.1, 3.0))
def test_young_bound_never_violated(seed, alpha):
    rng = np.random.default_rng(seed)
    psi0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    pts = rng.standard_normal((50, 3)) * 2
    assert young_bound_violation(gaussian_spinor(psi0, alpha), 3, pts) <= 1e-12
