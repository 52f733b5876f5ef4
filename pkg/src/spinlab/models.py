"""Energies and Euler-Lagrange residuals of the four quartic Dirac models.

All nonlinearities are homogeneous cubic in psi.  The residual ``F`` of each
model is normalised so that the real directional derivative of the energy is

    dE(psi)[xi] = 2 * integral Re <xi, F(psi)>.

See docs/derivations.md for the variation of each integrand.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .torus import DiracOperator, SpinorField, dealias, integrate, pointwise_norm2


class ModelKind(str, enum.Enum):
    SOLER = "soler"
    THIRRING = "thirring"
    NJL = "njl"
    GROSS_NEVEU = "gross_neveu"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_").replace("–", "_")
        aliases = {"grossneveu": "gross_neveu", "gn": "gross_neveu",
                   "nambu_jona_lasinio": "njl"}
        return cls(aliases.get(key, key))


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    lam: float = 0.0
    mu: float = 0.0
    flavors: int = 1

    def __post_init__(self):
        if int(self.flavors) != self.flavors or self.flavors < 1:
            raise ModelError(f"flavors must be a positive integer, got {self.flavors}")


def _check(kind: ModelKind, D: DiracOperator, values: np.ndarray):
    if kind is ModelKind.NJL and D.rep.volume_form is None:
        raise ModelError("the NJL model needs a complex volume form (even n)")


def _site_hermitian(D: DiracOperator, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    prod = (a.conj() * b).reshape(D.lattice.sizes + (-1,))
    return prod.sum(axis=-1)


def _bcast(D: DiracOperator, f: np.ndarray, values: np.ndarray) -> np.ndarray:
    return f.reshape(f.shape + (1,) * (values.ndim - D.lattice.n))


def nonlinear_term(kind, D: DiracOperator, values: np.ndarray, p: ModelParams) -> np.ndarray:
    """Cubic part N(psi) of the residual F = D psi - lam psi + N(psi)."""
    kind = ModelKind.parse(kind)
    _check(kind, D, values)
    rho = _bcast(D, pointwise_norm2(values, D.lattice), values)
    if kind is ModelKind.SOLER:
        return -p.mu * rho * values
    if kind is ModelKind.GROSS_NEVEU:
        return (p.mu / p.flavors) * rho * values
    if kind is ModelKind.THIRRING:
        out = np.zeros_like(values)
        for a in range(D.rep.n):
            ea = D.gamma(a, values)
            c = _bcast(D, _site_hermitian(D, values, ea), values)
            out -= p.mu * c * ea
        return out
    # NJL
    w = values @ D.rep.volume_form.T
    c = _bcast(D, _site_hermitian(D, values, w).real, values)
    return 0.5 * p.mu * (rho * values - c * w)


def energy_density(kind, D: DiracOperator, values: np.ndarray, p: ModelParams) -> np.ndarray:
    kind = ModelKind.parse(kind)
    _check(kind, D, values)
    dirac = _site_hermitian(D, values, D.apply(values)).real
    rho = pointwise_norm2(values, D.lattice)
    if kind is ModelKind.SOLER:
        return dirac - p.lam * rho - 0.5 * p.mu * rho ** 2
    if kind is ModelKind.GROSS_NEVEU:
        return dirac - p.lam * rho + p.mu / (2 * p.flavors) * rho ** 2
    if kind is ModelKind.THIRRING:
        quartic = np.zeros(D.lattice.sizes)
        for a in range(D.rep.n):
            c = _site_hermitian(D, values, D.gamma(a, values))
            # c is purely imaginary, so c*c is real and equals -|c|^2
            quartic += (c * c).real
        return dirac - p.lam * rho - 0.5 * p.mu * quartic
    w = values @ D.rep.volume_form.T
    c = _site_hermitian(D, values, w).real
    return dirac + 0.25 * p.mu * (rho ** 2 - c ** 2)


def model_energy(kind, psi: SpinorField, p: ModelParams, D: DiracOperator) -> float:
    return integrate(energy_density(kind, D, psi.values, p), psi.lattice)


def el_residual_values(kind, D: DiracOperator, values: np.ndarray, p: ModelParams,
                       lam: float | None = None, dealiased: bool = False) -> np.ndarray:
    kind = ModelKind.parse(kind)
    lam = p.lam if lam is None else lam
    nl = nonlinear_term(kind, D, values, p)
    if dealiased:
        nl = dealias(nl, D.lattice)
    out = D.apply(values) + nl
    if kind is not ModelKind.NJL:
        out = out - lam * values
    return out


def el_residual(kind, psi: SpinorField, p: ModelParams, D: DiracOperator,
                dealiased: bool = False) -> SpinorField:
    return SpinorField(psi.lattice, el_residual_values(kind, D, psi.values, p, dealiased=dealiased))


def linearized_nonlinear(kind, D: DiracOperator, values: np.ndarray, p: ModelParams,
                         direction: np.ndarray) -> np.ndarray:
    """Exact real-linear derivative of the cubic term in ``direction``.

    N(psi + t xi) is a cubic polynomial in t, so two symmetric differences
    combined by Richardson extrapolation recover the linear coefficient exactly.
    """
    scale = np.sqrt(np.vdot(values, values).real) / max(np.sqrt(np.vdot(direction, direction).real), 1e-300)
    h = scale if scale > 0 else 1.0
    xi = h * direction
    f = lambda v: nonlinear_term(kind, D, v, p)
    d1 = (f(values + xi) - f(values - xi)) / 2.0
    d2 = (f(values + 2 * xi) - f(values - 2 * xi)) / 4.0
    return (4.0 * d1 - d2) / (3.0 * h)
