"""Pointwise and integrated identities satisfied by solutions of the Soler equation

    D psi = lam psi + mu |psi|^2 psi

on flat tori.  Every check here only means something for solutions, so the
report helpers gate on the equation residual first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize as sopt

from .models import ModelKind, ModelParams, el_residual_values
from .torus import (
    DiracOperator,
    SpinorField,
    evaluate_at,
    integrate,
    l2_norm,
    pointwise_norm2,
    scalar_derivative,
    scalar_gradient,
    scalar_laplacian,
)

SOLUTION_TOL = 1e-8


@dataclass
class StressTensor:
    lattice: object
    components: np.ndarray  # (n, n, *sizes)

    @property
    def n(self) -> int:
        return self.components.shape[0]

    def trace(self) -> np.ndarray:
        return np.einsum("ii...->...", self.components)

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.components - self.components.swapaxes(0, 1)), initial=0.0))


@dataclass
class NodalReport:
    zero_count: int
    lhs: float
    rhs: float
    margin: float
    euler_characteristic: int
    zeros: np.ndarray
    residual: float
    is_solution: bool


@dataclass
class GateReport:
    holds: bool
    margin: float
    boundary: bool


@dataclass
class IdentityCheck:
    name: str
    value: float
    tolerance: float
    passed: bool


def _site_re(values_a: np.ndarray, values_b: np.ndarray, n: int) -> np.ndarray:
    prod = (values_a.conj() * values_b).real
    return prod.reshape(prod.shape[:n] + (-1,)).sum(axis=-1)


def solution_residual(psi: SpinorField, p: ModelParams, D: DiracOperator) -> float:
    """L^2 norm of the Soler residual, the gate for every identity below."""
    return l2_norm(el_residual_values(ModelKind.SOLER, D, psi.values, p), psi.lattice)


def stress_energy(psi: SpinorField, p: ModelParams, D: DiracOperator) -> StressTensor:
    """S_ij = Re <e_i d_j psi + e_j d_i psi, psi> - delta_ij mu |psi|^4."""
    lat = psi.lattice
    n = lat.n
    v = psi.values
    grad = D.gradient(v)
    rho = pointwise_norm2(v, lat)
    S = np.empty((n, n) + lat.sizes)
    for i in range(n):
        for j in range(i, n):
            s = _site_re(D.gamma(i, grad[j]) + D.gamma(j, grad[i]), v, n)
            if i == j:
                s = s - p.mu * rho ** 2
            S[i, j] = s
            S[j, i] = s
    return StressTensor(lat, S)


def trace_identity_residual(S: StressTensor, psi: SpinorField, p: ModelParams) -> np.ndarray:
    """tr S - 2 lam |psi|^2 - (2 - n) mu |psi|^4, pointwise."""
    rho = pointwise_norm2(psi.values, psi.lattice)
    return S.trace() - 2 * p.lam * rho - (2 - S.n) * p.mu * rho ** 2


def divergence_tensor(S: StressTensor) -> np.ndarray:
    """(div S)_i = sum_j d_j S_ij, shape (n, *sizes)."""
    lat = S.lattice
    return np.stack([
        sum(scalar_derivative(S.components[i, j], lat, j) for j in range(S.n))
        for i in range(S.n)])


def bochner_residual(psi: SpinorField, p: ModelParams, D: DiracOperator,
                     R_scalar: float = 0.0, printed: bool = False) -> np.ndarray:
    """Residual of the Bochner identity for |psi|^4.

    With f = |psi|^2 and Lam = lam + mu f, solutions satisfy

        Lap(f^2 / 2) = |df|^2 + 2 f |nabla psi|^2 + f^2 (R/2 - 2 Lam^2).

    ``printed=True`` evaluates the variant with coefficients (1, R/4, Lam^2)
    instead of (2, R/2, 2 Lam^2); it agrees only when |psi| is constant.
    """
    lat = psi.lattice
    v = psi.values
    f = pointwise_norm2(v, lat)
    grad = D.gradient(v)
    grad2 = sum(pointwise_norm2(g, lat) for g in grad)
    df2 = sum(g ** 2 for g in scalar_gradient(f, lat))
    lam_eff = p.lam + p.mu * f
    lhs = scalar_laplacian(0.5 * f ** 2, lat)
    if printed:
        return lhs - df2 - f * grad2 - f ** 2 * (R_scalar / 4 - lam_eff ** 2)
    return lhs - df2 - 2 * f * grad2 - f ** 2 * (R_scalar / 2 - 2 * lam_eff ** 2)


def twistor_residual(psi: SpinorField, D: DiracOperator) -> float:
    """max_a || d_a psi + (1/n) e_a D psi ||_{L^2}."""
    lat = psi.lattice
    v = psi.values
    Dv = D.apply(v)
    grad = D.gradient(v)
    return max(l2_norm(grad[a] + D.gamma(a, Dv) / lat.n, lat) for a in range(lat.n))


def norm_gradient_sup(psi: SpinorField) -> float:
    """sup |d |psi|^2|."""
    f = pointwise_norm2(psi.values, psi.lattice)
    g = scalar_gradient(f, psi.lattice)
    return float(np.max(np.sqrt(np.sum(g ** 2, axis=0))))


def _local_minima(f: np.ndarray) -> list:
    """Grid indices where f is <= all periodic neighbours (8-neighbourhood in 2-d)."""
    mask = np.ones(f.shape, dtype=bool)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == dy == 0:
                continue
            mask &= f <= np.roll(f, (dx, dy), axis=(0, 1))
    return [tuple(ix) for ix in np.argwhere(mask)]


def count_zeros(psi: SpinorField, rel_threshold: float = 1e-6,
                candidate_fraction: float = 0.1) -> np.ndarray:
    """Locate zeros of psi on T^2 by refining grid minima of |psi|^2 on the spectral interpolant.

    Only grid minima below ``candidate_fraction * max|psi|^2`` are refined; a
    zero resolved by the grid always drags its nearest sites below that.
    Returns an array of zero positions (one row per distinct zero).
    """
    lat = psi.lattice
    if lat.n != 2:
        raise ValueError("zero counting is implemented for surfaces (n = 2)")
    f = pointwise_norm2(psi.values, lat)
    fmax = float(f.max())
    if fmax == 0.0:
        raise ValueError("zero field: every point is a zero")
    h = np.array(lat.spacing)
    L = np.array(lat.lengths)

    def rho(x):
        return float(np.sum(np.abs(evaluate_at(psi.values, lat, x[None, :])) ** 2))

    found = []
    for ix in _local_minima(f):
        if f[ix] > candidate_fraction * fmax:
            continue
        x0 = np.array(ix) * h
        res = sopt.minimize(rho, x0, method="Nelder-Mead",
                            options={"xatol": 1e-10 * h.min(), "fatol": 1e-14 * fmax, "maxiter": 2000})
        x = np.mod(res.x, L)
        if res.fun > rel_threshold * fmax:
            continue
        dup = False
        for y in found:
            d = np.abs(x - y)
            d = np.minimum(d, L - d)
            if np.all(d < 0.5 * h):
                dup = True
                break
        if not dup:
            found.append(x)
    return np.array(found).reshape(-1, 2)


def nodal_bound(psi: SpinorField, p: ModelParams, D: DiracOperator) -> NodalReport:
    """Compare int (lam + mu |psi|^2)^2 with 2 pi chi + 4 pi N on a flat 2-torus.

    Every zero is counted as simple, which gives the weakest bound.
    """
    lat = psi.lattice
    if lat.n != 2:
        raise ValueError(f"nodal bound needs n = 2, got n = {lat.n}")
    chi = 0  # Euler characteristic of the torus
    res = solution_residual(psi, p, D)
    f = pointwise_norm2(psi.values, lat)
    zeros = count_zeros(psi) if f.max() > 0 else np.zeros((0, 2))
    N = len(zeros)
    lhs = integrate((p.lam + p.mu * f) ** 2, lat)
    rhs = 2 * np.pi * chi + 4 * np.pi * N
    return NodalReport(N, lhs, rhs, lhs - rhs, chi, zeros, res, res <= SOLUTION_TOL)


def symmetrized_gradient(Y: np.ndarray, lattice) -> np.ndarray:
    """k_ij = (d_i Y_j + d_j Y_i) / 2 for a vector field Y of shape (n, *sizes)."""
    n = lattice.n
    dY = np.stack([scalar_gradient(Y[j], lattice) for j in range(n)], axis=1)  # dY[i, j] = d_i Y_j
    return 0.5 * (dY + dY.swapaxes(0, 1))


def stationary_pairing(psi: SpinorField, p: ModelParams, D: DiracOperator, k: np.ndarray) -> float:
    """integral of S_ij k^ij for a symmetric 2-tensor field k."""
    S = stress_energy(psi, p, D)
    return integrate(np.einsum("ij...,ij...->...", S.components, k), psi.lattice)


def scalar_curvature_gate(psi: SpinorField, p: ModelParams, R_scalar: float,
                          boundary_tol: float = 1e-12) -> GateReport:
    """sup (lam + mu|psi|^2)^2 - R/4; negative means only psi = 0 can solve."""
    f = pointwise_norm2(psi.values, psi.lattice)
    margin = float(np.max((p.lam + p.mu * f) ** 2) - R_scalar / 4.0)
    scale = max(1.0, abs(R_scalar))
    return GateReport(margin < 0, margin, abs(margin) <= boundary_tol * scale)


def verify_identities(psi: SpinorField, p: ModelParams, D: DiracOperator,
                      R_scalar: float = 0.0, tol: float = 1e-8) -> list:
    """One IdentityCheck per identity; all fail if psi is not a solution."""
    lat = psi.lattice
    res = solution_residual(psi, p, D)
    gate = res <= SOLUTION_TOL
    rho = pointwise_norm2(psi.values, lat)
    S = stress_energy(psi, p, D)
    rows = [IdentityCheck("el_residual", res, SOLUTION_TOL, gate)]

    def add(name, value, tolerance):
        rows.append(IdentityCheck(name, float(value), tolerance, bool(gate and value <= tolerance)))

    add("stress_symmetry", S.asymmetry(), 1e-12)
    tr = trace_identity_residual(S, psi, p)
    add("trace_identity", np.max(np.abs(tr) / (1 + rho ** 2)), tol)
    add("divergence_sup", np.max(np.abs(divergence_tensor(S))), tol)
    add("bochner_l2", l2_norm(bochner_residual(psi, p, D, R_scalar), lat), tol)
    Y = np.stack([np.sin(2 * np.pi * X / L) for X, L in zip(lat.mesh(), lat.lengths)])
    Y = Y + np.roll(Y, 1, axis=0) * 0.5
    add("stationary_pairing", abs(stationary_pairing(psi, p, D, symmetrized_gradient(Y, lat))), tol)
    trace_int = integrate(S.trace(), lat)
    expected = integrate(2 * p.lam * rho + (2 - lat.n) * p.mu * rho ** 2, lat)
    add("integrated_trace", abs(trace_int - expected), tol * max(1.0, abs(expected)))
    return rows
