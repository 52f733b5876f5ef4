"""Dirac-harmonic maps with curvature term from a flat torus into an embedded target.

A pair (phi, psi) consists of a map phi: T^n -> N stored in ambient
coordinates, shape (*sizes, k), and a vector spinor psi of shape
(*sizes, k, spinor_dim) whose k target legs are tangent to N at phi.

The functional is

    E(phi, psi) = 1/2 int |dphi|^2 + Re <psi, Dt psi> - Q(psi) / 6,
    Q = R_abcd <psi^a, psi^c> <psi^b, psi^d>,

with Dt the Dirac operator twisted by the pullback connection.  Its critical
points satisfy

    tau(phi) = 1/2 R(psi, e_i . psi) dphi(e_i) - 1/12 <(nabla R)#(psi, psi) psi, psi>,
    Dt psi   = 1/3 R(psi, psi) psi.

Curvature tensors are ambient 4-tensors with R_abcd = <R(e_c, e_d) e_b, e_a>
restricted to tangent vectors; for the unit sphere R_abcd = d_ac d_bd - d_ad d_bc.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .torus import (
    DiracOperator,
    TorusLattice,
    integrate,
    l2_norm,
    random_bandlimited,
    scalar_derivative,
    scalar_laplacian,
)


class TangencyError(ValueError):
    pass


def _zero_grad(y):
    k = y.shape[-1]
    return np.zeros((k,) * 5)


def _zero_hess(y):
    k = y.shape[-1]
    return np.zeros((k,) * 6)


@dataclass(frozen=True)
class TargetManifold:
    """Embedded target N in R^k.

    ``projector(y)`` returns the orthogonal projection onto T_yN (the induced
    metric), ``christoffel(y, dy)`` the matrix A with nabla_X V = dV(X) + A V
    for V tangent along a curve with velocity dy, and ``curvature(y)`` the
    ambient 4-tensor R_abcd.  All callbacks broadcast over leading site axes.
    """

    name: str
    dim: int
    ambient_dim: int
    projector: Callable
    christoffel: Callable
    curvature: Callable
    retract: Callable
    curvature_grad: Callable = _zero_grad
    curvature_hess: Callable = _zero_hess
    sup_bounds: tuple = (0.0, 0.0, 0.0)
    symmetric_space: bool = True

    def metric(self, y):
        return self.projector(y)


def sphere_target() -> TargetManifold:
    """Unit sphere S^2 in R^3."""
    eye = np.eye(3)
    riem = np.einsum("ac,bd->abcd", eye, eye) - np.einsum("ad,bc->abcd", eye, eye)

    def projector(y):
        return eye - y[..., :, None] * y[..., None, :]

    def christoffel(y, dy):
        return y[..., :, None] * dy[..., None, :] - dy[..., :, None] * y[..., None, :]

    def retract(y):
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    return TargetManifold("sphere", 2, 3, projector, christoffel, lambda y: riem, retract,
                          sup_bounds=(1.0, 0.0, 0.0))


def flat_target(k: int = 3) -> TargetManifold:
    """Euclidean R^k (curvature and connection vanish)."""
    eye = np.eye(k)
    zero = np.zeros((k,) * 4)

    def christoffel(y, dy):
        return np.zeros(y.shape[:-1] + (k, k))

    return TargetManifold("flat", k, k, lambda y: np.broadcast_to(eye, y.shape[:-1] + (k, k)),
                          christoffel, lambda y: zero, lambda y: y, sup_bounds=(0.0, 0.0, 0.0))


def target_symmetry_defects(target: TargetManifold, rng, samples: int = 8) -> dict:
    """Max deviations of metric symmetry/positivity and curvature symmetries at random points."""
    out = {"metric_symmetry": 0.0, "metric_min_eig": np.inf, "antisym_first": 0.0,
           "antisym_second": 0.0, "pair_exchange": 0.0}
    for _ in range(samples):
        y = target.retract(rng.standard_normal(target.ambient_dim))
        P = target.projector(y)
        out["metric_symmetry"] = max(out["metric_symmetry"], float(np.max(np.abs(P - P.T))))
        ev = np.linalg.eigvalsh(P)
        out["metric_min_eig"] = min(out["metric_min_eig"], float(ev[-target.dim:].min()))
        R = np.einsum("abcd,ai,bj,ck,dl->ijkl", target.curvature(y), P, P, P, P)
        out["antisym_first"] = max(out["antisym_first"], float(np.max(np.abs(R + R.transpose(1, 0, 2, 3)))))
        out["antisym_second"] = max(out["antisym_second"], float(np.max(np.abs(R + R.transpose(0, 1, 3, 2)))))
        out["pair_exchange"] = max(out["pair_exchange"], float(np.max(np.abs(R - R.transpose(2, 3, 0, 1)))))
    return out


@dataclass
class MapField:
    lattice: TorusLattice
    values: np.ndarray  # (*sizes, k)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[: self.lattice.n] != self.lattice.sizes or self.values.ndim != self.lattice.n + 1:
            raise ValueError(f"map shape {self.values.shape} does not match grid {self.lattice.sizes}")


@dataclass
class VectorSpinorField:
    lattice: TorusLattice
    values: np.ndarray  # (*sizes, k, spinor_dim)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[: self.lattice.n] != self.lattice.sizes or self.values.ndim != self.lattice.n + 2:
            raise ValueError(f"vector spinor shape {self.values.shape} does not match grid")


@dataclass
class DHCStress:
    components: np.ndarray  # (n, n, *sizes)
    divergence: np.ndarray  # (n, *sizes, ) not used for the curvature sign
    trace_defect: np.ndarray
    lattice: TorusLattice = field(repr=False)

    @property
    def divergence_sup(self) -> float:
        return float(np.max(np.abs(self.divergence)))


# --- pointwise helpers ------------------------------------------------------

def _legs(P, values):
    """Apply a per-site (k, k) matrix to the target legs of a vector spinor."""
    return np.einsum("...ab,...bs->...as", P, values)


def project_tangent(target: TargetManifold, phi: MapField, values: np.ndarray) -> np.ndarray:
    return _legs(target.projector(phi.values), values)


def tangency_defect(target: TargetManifold, phi: MapField, values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    normal = values - project_tangent(target, phi, values)
    return float(np.max(np.abs(normal), initial=0.0))


def _check_tangent(target, phi, psi, tol=1e-6):
    defect = tangency_defect(target, phi, psi.values)
    if defect > tol:
        raise TangencyError(f"vector spinor leaves the tangent bundle (defect {defect:.2e})")


def map_gradient(phi: MapField) -> np.ndarray:
    """d_a phi, shape (n, *sizes, k)."""
    lat = phi.lattice
    return np.stack([scalar_derivative(phi.values, lat, a) for a in range(lat.n)])


def gram(psi_values: np.ndarray) -> np.ndarray:
    """G_ab = <psi^a, psi^b> (hermitian, antilinear in a), shape (*sizes, k, k)."""
    return np.einsum("...as,...bs->...ab", psi_values.conj(), psi_values)


def curvature_quartic(target: TargetManifold, phi: MapField, psi_values: np.ndarray) -> np.ndarray:
    """Q = R_abcd G_ac G_bd (real)."""
    G = gram(psi_values)
    R = target.curvature(phi.values)
    return np.einsum("...abcd,...ac,...bd->...", R, G, G).real


def curvature_spinor(target: TargetManifold, phi: MapField, psi_values: np.ndarray) -> np.ndarray:
    """R(psi, psi) psi with components T^a = R_abcd G_bd psi^c."""
    G = gram(psi_values)
    R = target.curvature(phi.values)
    return np.einsum("...abcd,...bd,...cs->...as", R, G, psi_values)


def covariant_derivative(target: TargetManifold, phi: MapField, psi_values: np.ndarray,
                         D: DiracOperator, dphi=None) -> np.ndarray:
    """nabla_a psi = d_a psi + A(phi, d_a phi) psi, shape (n, *sizes, k, d)."""
    dphi = map_gradient(phi) if dphi is None else dphi
    grad = D.gradient(psi_values)
    return np.stack([grad[a] + _legs(target.christoffel(phi.values, dphi[a]), psi_values)
                     for a in range(phi.lattice.n)])


def _clifford(D, a, values):
    return D.gamma(a, values)


# --- operators --------------------------------------------------------------

def twisted_dirac(phi: MapField, psi: VectorSpinorField, target: TargetManifold, D: DiracOperator,
                  return_defect: bool = False):
    """Dt psi = sum_a e_a . nabla_a psi, re-projected onto the tangent legs."""
    _check_tangent(target, phi, psi)
    nab = covariant_derivative(target, phi, psi.values, D)
    out = sum(_clifford(D, a, nab[a]) for a in range(phi.lattice.n))
    proj = project_tangent(target, phi, out)
    result = VectorSpinorField(psi.lattice, proj)
    if return_defect:
        return result, float(np.max(np.abs(out - proj), initial=0.0))
    return result


def tension_field(phi: MapField, target: TargetManifold) -> np.ndarray:
    """Tangential part of the Laplacian of phi (Lap phi + |dphi|^2 phi on the sphere)."""
    lap = scalar_laplacian(phi.values, phi.lattice)
    return np.einsum("...ab,...b->...a", target.projector(phi.values), lap)


def map_energy_density(phi: MapField) -> np.ndarray:
    dphi = map_gradient(phi)
    return np.sum(dphi ** 2, axis=(0, -1))


def dhc_energy(phi: MapField, psi: VectorSpinorField, target: TargetManifold, D: DiracOperator) -> float:
    _check_tangent(target, phi, psi)
    lat = phi.lattice
    dirac = np.einsum("...as,...as->...", psi.values.conj(),
                      twisted_dirac(phi, psi, target, D).values).real
    Q = curvature_quartic(target, phi, psi.values)
    return 0.5 * integrate(map_energy_density(phi) + dirac - Q / 6.0, lat)


def curvature_term_imaginary(target, phi, psi_values) -> float:
    """Largest imaginary part of the pointwise curvature contraction."""
    G = gram(psi_values)
    R = target.curvature(phi.values)
    return float(np.max(np.abs(np.einsum("...abcd,...ac,...bd->...", R, G, G).imag), initial=0.0))


def map_equation_rhs(phi: MapField, psi: VectorSpinorField, target: TargetManifold,
                     D: DiracOperator) -> np.ndarray:
    """1/2 R(psi, e_i . psi) dphi(e_i) - 1/12 <(nabla R)#(psi, psi) psi, psi>, tangent part."""
    lat = phi.lattice
    dphi = map_gradient(phi)
    R = target.curvature(phi.values)
    v = psi.values
    rhs = np.zeros(phi.values.shape)
    for i in range(lat.n):
        # W_cd = Re <psi^c, e_i . psi^d>; R(psi, e_i psi) X has components R_abcd X^b W_cd
        W = np.einsum("...cs,...ds->...cd", v.conj(), _clifford(D, i, v)).real
        rhs += 0.5 * np.einsum("...abcd,...b,...cd->...a", R, dphi[i], W)
    dR = target.curvature_grad(phi.values)
    if np.any(dR):
        G = gram(v)
        grad_term = np.einsum("...eabcd,...ac,...bd->...e", dR, G, G).real
        rhs -= grad_term / 12.0
    return np.einsum("...ab,...b->...a", target.projector(phi.values), rhs)


def dhc_residuals(phi: MapField, psi: VectorSpinorField, target: TargetManifold, D: DiracOperator):
    """(tau - RHS_phi, Dt psi - R(psi, psi) psi / 3)."""
    _check_tangent(target, phi, psi)
    map_res = tension_field(phi, target) - map_equation_rhs(phi, psi, target, D)
    spin = twisted_dirac(phi, psi, target, D).values
    spin_res = spin - project_tangent(target, phi, curvature_spinor(target, phi, psi.values)) / 3.0
    return map_res, spin_res


def residual_norms(phi, psi, target, D) -> tuple:
    m, s = dhc_residuals(phi, psi, target, D)
    lat = phi.lattice
    return float(np.sqrt(integrate(np.sum(m ** 2, axis=-1), lat))), l2_norm(s, lat)


# --- variations -------------------------------------------------------------

def perturb_pair(phi: MapField, psi: VectorSpinorField, target: TargetManifold, V, Xi, t: float):
    """phi_t = retract(phi + t V), psi_t = P(phi_t)(psi + t Xi)."""
    new_phi = MapField(phi.lattice, target.retract(phi.values + t * V))
    new_psi = project_tangent(target, new_phi, psi.values + t * Xi)
    return new_phi, VectorSpinorField(psi.lattice, new_psi)


def residual_pairing(phi, psi, target, D, V, Xi) -> float:
    """Directional derivative of the energy predicted by the residuals.

    dE[V, Xi] = -int <tau - RHS_phi, V> + int Re <Xi, Dt psi - R(psi,psi)psi/3>
    for tangent V and Xi.
    """
    map_res, spin_res = dhc_residuals(phi, psi, target, D)
    lat = phi.lattice
    return (-integrate(np.sum(map_res * V, axis=-1), lat)
            + float(np.vdot(Xi, spin_res).real * lat.cell_volume))


def finite_difference_gradient(phi, psi, target, D, V, Xi, h: float = 1e-5) -> float:
    plus = dhc_energy(*perturb_pair(phi, psi, target, V, Xi, h), target, D)
    minus = dhc_energy(*perturb_pair(phi, psi, target, V, Xi, -h), target, D)
    return (plus - minus) / (2 * h)


def random_smooth_pair(lattice: TorusLattice, target: TargetManifold, rng, spinor_dim: int = 2,
                       amplitude: float = 0.3, kmax: int = 2):
    """Band-limited map near the north pole with a random tangent spinor; not a solution."""
    base = np.zeros(lattice.sizes + (target.ambient_dim,))
    base[..., -1] = 1.0
    wiggle = random_bandlimited(lattice, rng, (), target.ambient_dim, kmax).values.real
    phi = MapField(lattice, target.retract(base + 0.5 * wiggle))
    raw = random_bandlimited(lattice, rng, (target.ambient_dim,), spinor_dim, kmax).values
    return phi, VectorSpinorField(lattice, project_tangent(target, phi, amplitude * raw))


def random_tangent_direction(phi: MapField, target: TargetManifold, rng, spinor_dim: int = 2,
                             kmax: int = 2):
    """Band-limited variation (V, Xi) tangent at phi."""
    lat = phi.lattice
    V = np.einsum("...ab,...b->...a", target.projector(phi.values),
                  random_bandlimited(lat, rng, (), target.ambient_dim, kmax).values.real)
    Xi = project_tangent(target, phi,
                         random_bandlimited(lat, rng, (target.ambient_dim,), spinor_dim, kmax).values)
    return V, Xi


# --- stress-energy ----------------------------------------------------------

def dhc_stress_energy(phi: MapField, psi: VectorSpinorField, target: TargetManifold,
                      D: DiracOperator) -> DHCStress:
    """S_ij = 2<dphi_i, dphi_j> - g_ij |dphi|^2
              + 1/2 Re <psi, e_i nabla_j psi + e_j nabla_i psi> - g_ij Q / 6.
    """
    _check_tangent(target, phi, psi)
    lat = phi.lattice
    n = lat.n
    dphi = map_gradient(phi)
    e = np.sum(dphi ** 2, axis=(0, -1))
    nab = covariant_derivative(target, phi, psi.values, D, dphi)
    Q = curvature_quartic(target, phi, psi.values)
    v = psi.values
    S = np.empty((n, n) + lat.sizes)
    for i in range(n):
        for j in range(i, n):
            spin = np.einsum("...as,...as->...", v.conj(),
                             _clifford(D, i, nab[j]) + _clifford(D, j, nab[i])).real
            s = 2 * np.sum(dphi[i] * dphi[j], axis=-1) + 0.5 * spin
            if i == j:
                s = s - e - Q / 6.0
            S[i, j] = s
            S[j, i] = s
    div = np.stack([sum(scalar_derivative(S[i, j], lat, j) for j in range(n)) for i in range(n)])
    trace = np.einsum("ii...->...", S)
    return DHCStress(S, div, trace - (2 - n) * (e + Q / 6.0), lat)


def dhc_stationary_pairing(phi, psi, target, D, k: np.ndarray) -> float:
    S = dhc_stress_energy(phi, psi, target, D)
    return integrate(np.einsum("ij...,ij...->...", S.components, k), phi.lattice)


# --- Bochner identities -----------------------------------------------------

def _hessian_map(phi: MapField, target: TargetManifold) -> np.ndarray:
    """Second fundamental form nabla dphi, tangent part of d_i d_j phi, shape (n, n, *sizes, k)."""
    lat = phi.lattice
    dphi = map_gradient(phi)
    P = target.projector(phi.values)
    H = np.empty((lat.n, lat.n) + phi.values.shape)
    for i in range(lat.n):
        for j in range(lat.n):
            H[i, j] = np.einsum("...ab,...b->...a", P, scalar_derivative(dphi[j], lat, i))
    return H


def connection_curvature(phi: MapField, target: TargetManifold) -> np.ndarray:
    """F_ij = [nabla_i, nabla_j] on the pulled-back bundle, shape (n, n, *sizes, k, k)."""
    lat = phi.lattice
    dphi = map_gradient(phi)
    A = np.stack([target.christoffel(phi.values, dphi[a]) for a in range(lat.n)])
    F = np.zeros((lat.n, lat.n) + A.shape[1:])
    for i in range(lat.n):
        for j in range(lat.n):
            if i == j:
                continue
            F[i, j] = (scalar_derivative(A[j], lat, i) - scalar_derivative(A[i], lat, j)
                       + A[i] @ A[j] - A[j] @ A[i])
    return F


def weitzenboeck_residual(phi, psi, target, D) -> float:
    """|| Dt^2 psi + nabla* nabla psi... || check: Dt^2 = -Lap_t + 1/2 e_i e_j F_ij on a flat domain."""
    lat = phi.lattice
    v = psi.values
    dphi = map_gradient(phi)
    A = [target.christoffel(phi.values, dphi[a]) for a in range(lat.n)]
    D2 = twisted_dirac(phi, VectorSpinorField(lat, twisted_dirac(phi, psi, target, D).values),
                       target, D).values
    nab = covariant_derivative(target, phi, v, D, dphi)
    lap = np.zeros_like(v)
    for a in range(lat.n):
        inner = nab[a]
        lap += D.gradient(inner)[a] + _legs(A[a], inner)
    F = connection_curvature(phi, target)
    curv = np.zeros_like(v)
    for i in range(lat.n):
        for j in range(lat.n):
            if i != j:
                curv += _clifford(D, i, _clifford(D, j, _legs(F[i, j], v)))
    rhs = project_tangent(target, phi, -lap + 0.5 * curv)
    return l2_norm(D2 - rhs, lat)


def dhc_bochner_residuals(phi: MapField, psi: VectorSpinorField, target: TargetManifold,
                          D: DiracOperator, R_scalar: float = 0.0):
    """Residual fields of the Bochner identities for |psi|^4 and |dphi|^2 (flat domain).

    Spinor part, with f = |psi|^2 and T = R(psi, psi) psi:
        Lap f^2/2 = |df|^2 + 2 f |nabla psi|^2 + R f^2 / 2
                    + f Re <psi, e_i e_j F_ij psi> - 2 f Re <psi, Dt(T/3)>.
    Map part, using the map equation for tau:
        Lap |dphi|^2/2 = |nabla dphi|^2 - <R(dphi_i, dphi_j) dphi_j, dphi_i> + <nabla RHS_phi, dphi>.
    """
    _check_tangent(target, phi, psi)
    lat = phi.lattice
    n = lat.n
    v = psi.values
    dphi = map_gradient(phi)
    f = np.einsum("...as,...as->...", v.conj(), v).real
    nab = covariant_derivative(target, phi, v, D, dphi)
    nab2 = np.einsum("i...as,i...as->...", nab.conj(), nab).real
    df2 = sum(scalar_derivative(f, lat, a) ** 2 for a in range(n))
    F = connection_curvature(phi, target)
    curv = np.zeros_like(v)
    for i in range(n):
        for j in range(n):
            if i != j:
                curv += _clifford(D, i, _clifford(D, j, _legs(F[i, j], v)))
    T3 = project_tangent(target, phi, curvature_spinor(target, phi, v)) / 3.0
    DT = twisted_dirac(phi, VectorSpinorField(lat, T3), target, D).values
    re = lambda a, b: np.einsum("...as,...as->...", a.conj(), b).real
    spin = (scalar_laplacian(0.5 * f ** 2, lat) - df2 - 2 * f * nab2 - 0.5 * R_scalar * f ** 2
            - f * re(v, curv) + 2 * f * re(v, DT))

    H = _hessian_map(phi, target)
    hess2 = np.sum(H ** 2, axis=(0, 1, -1))
    R = target.curvature(phi.values)
    sect = np.zeros(lat.sizes)
    for i in range(n):
        for j in range(n):
            sect += np.einsum("...abcd,...a,...b,...c,...d->...", R, dphi[i], dphi[j], dphi[i], dphi[j])
    rhs_phi = map_equation_rhs(phi, psi, target, D)
    P = target.projector(phi.values)
    grad_rhs = 0.0
    for i in range(n):
        cov = np.einsum("...ab,...b->...a", P, scalar_derivative(rhs_phi, lat, i))
        grad_rhs = grad_rhs + np.sum(cov * dphi[i], axis=-1)
    e = np.sum(dphi ** 2, axis=(0, -1))
    mp = scalar_laplacian(0.5 * e, lat) - hess2 + sect - grad_rhs
    return spin, mp


def vector_twistor_residual(phi, psi, target, D) -> float:
    """max_a || nabla_a psi + (1/n) e_a . Dt psi ||."""
    lat = phi.lattice
    nab = covariant_derivative(target, phi, psi.values, D)
    Dv = twisted_dirac(phi, psi, target, D).values
    return max(l2_norm(project_tangent(target, phi, nab[a]) + _clifford(D, a, Dv) / lat.n, lat)
               for a in range(lat.n))


# --- Liouville constants ----------------------------------------------------

def liouville_constants(bounds, n: int) -> tuple:
    """(c1, c2) from sup norms (|R|, |nabla R|, |nabla^2 R|) of the target curvature."""
    r, dr, ddr = (float(b) for b in bounds)
    if min(r, dr, ddr) < 0:
        raise ValueError("curvature bounds must be nonnegative")
    c1 = n / 2 * r + n / 16 * r ** 2 + (1 / 36 + n / 8) * dr ** 2 + ddr / 12
    c2 = n / 4 * r ** 2 + 1
    return c1, c2


def ricci_threshold(phi, psi, target, n: int | None = None) -> np.ndarray:
    """Pointwise c1 |psi|^4 + c2 |dphi|^2."""
    n = phi.lattice.n if n is None else n
    c1, c2 = liouville_constants(target.sup_bounds, n)
    f = np.einsum("...as,...as->...", psi.values.conj(), psi.values).real
    return c1 * f ** 2 + c2 * map_energy_density(phi)


def energy_estimate_gap(phi, psi, target, D, deltas=(0.5, 0.5, 0.5, 0.5),
                        kappa_N: float | None = None) -> np.ndarray:
    """Lap e - (lower bound) for e = (|dphi|^2 + |psi|^4)/2 on a flat domain.

    The lower bound is the Young-inequality form with constants delta_1..delta_4,
    Ricci and scalar curvature of the domain set to 0 and the
    |R(psi,psi)psi|^2 term dropped (it is not pointwise sign-definite).
    Nonnegative values mean the estimate holds.
    """
    lat = phi.lattice
    n = lat.n
    d1, d2, d3, d4 = deltas
    r, dr, ddr = target.sup_bounds
    kN = r if kappa_N is None else kappa_N
    v = psi.values
    dphi = map_gradient(phi)
    e_map = np.sum(dphi ** 2, axis=(0, -1))
    f = np.einsum("...as,...as->...", v.conj(), v).real
    e = 0.5 * (e_map + f ** 2)
    lap_e = scalar_laplacian(e, lat)
    H = _hessian_map(phi, target)
    hess2 = np.sum(H ** 2, axis=(0, 1, -1))
    nab = covariant_derivative(target, phi, v, D, dphi)
    nab2 = np.einsum("i...as,i...as->...", nab.conj(), nab).real
    df2 = sum(scalar_derivative(f, lat, a) ** 2 for a in range(n))
    bound = ((1 - d1) * hess2 + f * nab2 * (2 - d2 - d3) + df2
             - e_map ** 2 * (-kN + n / (4 * d2) * r ** 2 + d4)
             - f ** 2 * e_map * (n / (8 * d1) * r ** 2 + dr ** 2 / (36 * d3) + ddr / 12
                                 + n * r / 2 + n / (8 * d4) * dr ** 2))
    return lap_e - bound


# --- exact pairs ------------------------------------------------------------

def equator_wrap(lattice: TorusLattice) -> MapField:
    """x -> (cos(2 pi x / L), sin(2 pi x / L), 0) along the first axis."""
    X = lattice.mesh()[0]
    w = 2 * np.pi / lattice.lengths[0]
    return MapField(lattice, np.stack([np.cos(w * X), np.sin(w * X), np.zeros_like(X)], axis=-1))


def latitude_map(lattice: TorusLattice, theta: float) -> MapField:
    """Latitude circle at height sin(theta); harmonic only for theta = 0."""
    X = lattice.mesh()[0]
    w = 2 * np.pi / lattice.lengths[0]
    c, s = np.cos(theta), np.sin(theta)
    return MapField(lattice, np.stack([c * np.cos(w * X), c * np.sin(w * X), np.full_like(X, s)], axis=-1))


def latitude_tension_norm(theta: float, period: float = 2 * np.pi) -> float:
    """|tau| for the latitude family: w^2 sin(theta) cos(theta) with w = 2 pi / L."""
    w = 2 * np.pi / period
    return w ** 2 * abs(np.sin(theta) * np.cos(theta))


def parallel_wrap_pair(lattice: TorusLattice, spinor, a: float, b: float):
    """Equator wrap with psi = spinor (x) (a t + b e_3), t the unit tangent of the wrap.

    Both legs are parallel along the wrap, Dt psi = 0 and R(psi, psi) psi = 0 for
    real (a, b), so the pair solves both equations exactly.  Needs a periodic
    spin structure along the wrap direction.
    """
    phi = equator_wrap(lattice)
    X = lattice.mesh()[0]
    w = 2 * np.pi / lattice.lengths[0]
    leg = np.stack([-a * np.sin(w * X), a * np.cos(w * X), np.full_like(X, b)], axis=-1)
    u = np.asarray(spinor, dtype=complex)
    psi = leg[..., :, None] * u
    return phi, VectorSpinorField(lattice, psi)
