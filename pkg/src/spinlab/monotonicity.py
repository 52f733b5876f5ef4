"""Radial monotonicity quantities for Soler spinors on R^n.

Spinors are given as callbacks ``field(points) -> (values, radial_derivative)``
with ``points`` of shape (m, n) and both outputs of shape (m, spinor_dim).
Ball and sphere integrals use a product rule: Gauss-Legendre in the radius
times a recursive sphere rule (uniform on S^1, Gauss-Jacobi in the polar
cosine for each higher sphere).

For a solution of D psi = lam psi + mu |psi|^2 psi the radial identity

    d/dr (r^(2-n) mu B4(r)) = -2 lam r^(1-n) B2(r) + 2 r^(2-n) F(r)

holds, with B4, B2 the ball integrals of |psi|^4, |psi|^2 and F the sphere
integral of Re <psi, d_r . nabla_{d_r} psi>.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .clifford import build_clifford_rep
from .models import ModelParams


class QuadratureError(RuntimeError):
    pass


@dataclass
class RadialProfile:
    n: int
    radii: np.ndarray
    ball_l4: np.ndarray
    ball_l2: np.ndarray
    sphere_l4: np.ndarray
    flux: np.ndarray
    self_check: float = 0.0


@dataclass
class HessianSpectrum:
    omegas: tuple
    omega_max: float
    Omega: float


@dataclass
class MonotonicityResidual:
    radii: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    difference: float  # lhs - rhs, <= 0 expected for solutions


def constant_spinor(c):
    c = np.asarray(c, dtype=complex)

    def field(points):
        m = len(points)
        return np.broadcast_to(c, (m, c.size)).copy(), np.zeros((m, c.size), complex)
    return field


def gaussian_spinor(psi0, alpha: float = 1.0):
    """exp(-alpha |x|^2) psi0."""
    psi0 = np.asarray(psi0, dtype=complex)

    def field(points):
        r2 = np.sum(points ** 2, axis=1)
        g = np.exp(-alpha * r2)[:, None]
        dr = (-2 * alpha * np.sqrt(r2) * np.exp(-alpha * r2))[:, None]
        return g * psi0, dr * psi0
    return field


@lru_cache(maxsize=None)
def sphere_rule(n: int, order: int):
    """Nodes (q, n) and weights (q,) on S^(n-1) summing to its area."""
    if n < 2:
        raise ValueError("sphere rule needs n >= 2")
    if order < 1:
        raise QuadratureError("sphere order must be >= 1")
    if n == 2:
        m = 2 * order
        th = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(m, 2 * np.pi / m)
    a = (n - 3) / 2.0
    t, wt = roots_jacobi(order, a, a) if a > 0 else roots_legendre(order)
    sub, wsub = sphere_rule(n - 1, order)
    s = np.sqrt(1 - t ** 2)
    pts = np.concatenate([np.column_stack([np.full(len(sub), ti), si * sub])
                          for ti, si in zip(t, s)])
    w = np.concatenate([wi * wsub for wi in wt])
    return pts, w


def _sphere_terms(field, rep, r, dirs, w):
    pts = r * dirs
    vals, dr = field(pts)
    rho = np.sum(np.abs(vals) ** 2, axis=1)
    mats = np.einsum("qa,aij->qij", dirs, rep.gamma_array)
    xdr = np.einsum("qij,qj->qi", mats, dr)
    flux_density = np.sum(vals.conj() * xdr, axis=1).real
    area = r ** (rep.n - 1)
    return (area * np.dot(w, rho ** 2), area * np.dot(w, rho), area * np.dot(w, flux_density))


def _profile_at(field, rep, radii, radial_order, sphere_order):
    dirs, w = sphere_rule(rep.n, sphere_order)
    x, wx = roots_legendre(radial_order)
    out = np.zeros((len(radii), 4))
    for k, R in enumerate(radii):
        s = 0.5 * R * (x + 1)
        ws = 0.5 * R * wx
        b4 = b2 = 0.0
        for si, wi in zip(s, ws):
            l4, l2, _ = _sphere_terms(field, rep, si, dirs, w)
            b4 += wi * l4
            b2 += wi * l2
        l4, _, fl = _sphere_terms(field, rep, R, dirs, w)
        out[k] = (b4, b2, l4, fl)
    return out


def radial_profile(field, n: int, p: ModelParams | None, radii, radial_order: int = 24,
                   sphere_order: int = 12, self_check: bool = True,
                   check_tol: float = 1e-6) -> RadialProfile:
    """Ball and sphere integrals of a spinor callback at each radius.

    With ``self_check`` the profile is recomputed with doubled orders and a
    relative discrepancy above ``check_tol`` raises QuadratureError.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly ascending")
    rep = build_clifford_rep(n)
    vals = _profile_at(field, rep, radii, radial_order, sphere_order)
    disc = 0.0
    if self_check:
        fine = _profile_at(field, rep, radii, 2 * radial_order, 2 * sphere_order)
        # columns that vanish identically (e.g. the flux) are measured against the whole profile
        col = np.max(np.abs(fine), axis=0, keepdims=True)
        scale = np.maximum(col, max(float(col.max()), 1e-300))
        disc = float(np.max(np.abs(fine - vals) / scale))
        if disc > check_tol:
            raise QuadratureError(
                f"quadrature orders ({radial_order}, {sphere_order}) too low: "
                f"doubling changes the profile by {disc:.2e}")
    return RadialProfile(n, radii, vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3], disc)


def monotonicity_residual(profile: RadialProfile, p: ModelParams) -> MonotonicityResidual:
    """Residual of the radial identity at every radius (one-sided second order at the ends)."""
    r = profile.radii
    if r.size < 3:
        raise ValueError("need at least 3 radii")
    n = profile.n
    lhs = np.gradient(r ** (2 - n) * p.mu * profile.ball_l4, r, edge_order=2)
    rhs = -2 * p.lam * r ** (1 - n) * profile.ball_l2 + 2 * r ** (2 - n) * profile.flux
    return MonotonicityResidual(r, lhs, rhs, lhs - rhs)


def coarea_residual(profile: RadialProfile) -> np.ndarray:
    """d/dr ball_l4 - sphere_l4 by finite differences on the radius grid."""
    return np.gradient(profile.ball_l4, profile.radii, edge_order=2) - profile.sphere_l4


def omega_factor(omegas) -> float:
    """Omega = 2 max(omega) - sum(omega)."""
    omegas = [float(w) for w in omegas]
    if not omegas:
        raise ValueError("empty eigenvalue list")
    return 2 * max(omegas) - sum(omegas)


def euclidean_hessian_spectrum(n: int) -> HessianSpectrum:
    """Eigenvalues of nabla(r d_r) = Hess(r^2)/2 on R^n: all equal to 1."""
    omegas = (1.0,) * n
    return HessianSpectrum(omegas, 1.0, omega_factor(omegas))


def _segment(profile, R1, R2):
    r = profile.radii
    if not R1 < R2:
        raise ValueError("need R1 < R2")
    i = np.flatnonzero(np.isclose(r, R1, rtol=0, atol=1e-12 * max(1.0, R1)))
    j = np.flatnonzero(np.isclose(r, R2, rtol=0, atol=1e-12 * max(1.0, R2)))
    if i.size == 0 or j.size == 0:
        raise ValueError(f"R1={R1}, R2={R2} must be radii of the profile "
                         f"(range [{r[0]}, {r[-1]}])")
    return slice(int(i[0]), int(j[0]) + 1)


def integrated_residual(profile: RadialProfile, p: ModelParams, R1: float, R2: float) -> float:
    """(R2-term - R1-term) minus the integrated right-hand side of the radial identity."""
    sl = _segment(profile, R1, R2)
    r = profile.radii[sl]
    n = profile.n
    w = r ** (2 - n) * p.mu * profile.ball_l4[sl]
    rhs = np.trapezoid(-2 * p.lam * r ** (1 - n) * profile.ball_l2[sl]
                       + 2 * r ** (2 - n) * profile.flux[sl], r)
    return float((w[-1] - w[0]) - rhs)


def manifold_monotone_bound(profile: RadialProfile, Omega: float, omega_max: float,
                            p: ModelParams, R1: float, R2: float) -> BoundReport:
    """Both sides of

        R1^Omega mu B4(R1) <= R2^Omega mu B4(R2)
                              + 2 lam omega_max int r^(Omega-1) B2 - 2 int r^Omega F

    by the trapezoidal rule over the profile radii in [R1, R2].
    """
    sl = _segment(profile, R1, R2)
    r = profile.radii[sl]
    b4 = profile.ball_l4[sl]
    lhs = R1 ** Omega * p.mu * b4[0]
    rhs = (R2 ** Omega * p.mu * b4[-1]
           + 2 * p.lam * omega_max * np.trapezoid(r ** (Omega - 1) * profile.ball_l2[sl], r)
           - 2 * np.trapezoid(r ** Omega * profile.flux[sl], r))
    return BoundReport(float(lhs), float(rhs), float(lhs - rhs))


def young_bound_violation(field, n: int, points) -> float:
    """max over points of |Re <psi, x^ . d_r psi>| - (|psi|^4/4 + 3|d_r psi|^(4/3)/4).

    Young's inequality with exponents 4 and 4/3 makes this <= 0 for any field.
    """
    rep = build_clifford_rep(n)
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=1, keepdims=True)
    dirs = np.divide(points, r, out=np.zeros_like(points), where=r > 0)
    vals, dr = field(points)
    mats = np.einsum("qa,aij->qij", dirs, rep.gamma_array)
    pair = np.abs(np.sum(vals.conj() * np.einsum("qij,qj->qi", mats, dr), axis=1).real)
    a = np.linalg.norm(vals, axis=1)
    b = np.linalg.norm(dr, axis=1)
    return float(np.max(pair - (a ** 4 / 4 + 0.75 * b ** (4 / 3))))


def decay_functional(profile: RadialProfile, Omega: float) -> np.ndarray:
    """r^Omega * int_{B_r} |psi|^4 per radius."""
    return profile.radii ** Omega * profile.ball_l4
