"""Explicit Clifford algebra representations for 2 <= n <= 4.

Convention: the generators are anti-hermitian and satisfy

    gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij,

so Clifford multiplication is skew-adjoint for the hermitian fiber product.
The representations are built by tensoring Pauli matrices; any two choices
are unitarily equivalent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
I2 = np.eye(2, dtype=complex)


class CliffordError(ValueError):
    pass


@dataclass(frozen=True)
class CliffordRep:
    """Clifford multiplication ``e_i .`` as matrices acting on spinor fibers."""

    n: int
    gammas: tuple
    volume_form: np.ndarray | None = field(default=None, repr=False)

    @property
    def spinor_dim(self) -> int:
        return self.gammas[0].shape[0]

    @property
    def gamma_array(self) -> np.ndarray:
        """Generators stacked into an array of shape (n, d, d)."""
        return np.stack(self.gammas)


def build_clifford_rep(n: int) -> CliffordRep:
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= 4:
        raise CliffordError(f"dimension must be 2, 3 or 4, got {n!r}")
    if n == 2:
        gammas = [1j * SIGMA[0], 1j * SIGMA[1]]
    elif n == 3:
        gammas = [1j * SIGMA[0], 1j * SIGMA[1], 1j * SIGMA[2]]
    else:
        gammas = [np.kron(1j * s, SIGMA[0]) for s in SIGMA]
        gammas.append(np.kron(I2, 1j * SIGMA[1]))
    gammas = tuple(np.ascontiguousarray(g) for g in gammas)
    for g in gammas:
        g.setflags(write=False)

    vol = None
    if n % 2 == 0:
        # complex volume form i^{n/2} e_1 ... e_n
        prod = np.eye(gammas[0].shape[0], dtype=complex)
        for g in gammas:
            prod = prod @ g
        vol = (1j ** (n // 2)) * prod
        vol.setflags(write=False)
    return CliffordRep(n=n, gammas=gammas, volume_form=vol)


def hermitian(psi: np.ndarray, xi: np.ndarray) -> complex:
    """Hermitian product, antilinear in the first slot."""
    return complex(np.vdot(psi, xi))


def inner(psi: np.ndarray, xi: np.ndarray) -> float:
    """Real part of the hermitian product."""
    return hermitian(psi, xi).real


def clifford_mul(rep: CliffordRep, X, psi) -> np.ndarray:
    """Return ``X . psi`` for a real n-vector X and a fiber value psi."""
    X = np.asarray(X, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    if X.shape != (rep.n,):
        raise CliffordError(f"vector has shape {X.shape}, expected ({rep.n},)")
    if psi.shape != (rep.spinor_dim,):
        raise CliffordError(
            f"spinor has shape {psi.shape}, expected ({rep.spinor_dim},)")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(psi))):
        raise CliffordError("non-finite input")
    mat = np.einsum("a,aij->ij", X, rep.gamma_array)
    return mat @ psi


def clifford_residuals(rep: CliffordRep) -> dict:
    """Entrywise maximum deviations of the defining relations."""
    d = rep.spinor_dim
    eye = np.eye(d)
    anti = 0.0
    skew = 0.0
    for i, gi in enumerate(rep.gammas):
        skew = max(skew, np.max(np.abs(gi + gi.conj().T)))
        for j, gj in enumerate(rep.gammas):
            dev = gi @ gj + gj @ gi + 2.0 * (i == j) * eye
            anti = max(anti, np.max(np.abs(dev)))
    out = {"anticommutator": anti, "skew_adjoint": skew}
    if rep.volume_form is not None:
        w = rep.volume_form
        out["volume_square"] = np.max(np.abs(w @ w - eye))
        out["volume_anticommute"] = max(
            np.max(np.abs(w @ g + g @ w)) for g in rep.gammas)
        out["volume_hermitian"] = np.max(np.abs(w - w.conj().T))
    return out


def killing_implies_eigen(rep: CliffordRep, alpha: float) -> float:
    """Fiberwise check that a Killing spinor with constant alpha has D psi = n alpha psi.

    With nabla_{e_i} psi = -alpha e_i . psi the Dirac operator acts as
    sum_i e_i . (-alpha e_i .) which must equal n * alpha * Id.
    """
    d = rep.spinor_dim
    total = sum(g @ (-alpha * g) for g in rep.gammas)
    return float(np.max(np.abs(total - rep.n * alpha * np.eye(d))))
