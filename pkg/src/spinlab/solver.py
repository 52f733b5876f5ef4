"""Norm-constrained Newton continuation for the nonlinear Dirac equations.

The unknowns are (psi, lam) with the L^2 norm of psi held fixed; mu is the
continuation parameter.  The cubic terms are only real-differentiable, so the
Newton system is posed on the realified field (real and imaginary parts as
independent unknowns) and solved matrix-free with MINRES.  The bordered
Jacobian

    [ J      -psi ]
    [ -psi^T   0  ]

is symmetric because J is the (real) Hessian of the energy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse.linalg as spla

from .models import (ModelError, ModelKind, ModelParams, el_residual_values, linearized_nonlinear,
                     nonlinear_term)
from .torus import DiracOperator, SpinorField, from_spectral, l2_norm, to_spectral

log = logging.getLogger(__name__)


@dataclass
class ContinuationState:
    psi: SpinorField
    lam: float
    mu: float
    target_norm: float
    residual_norm: float
    history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "target_norm": self.target_norm,
                "residual": self.residual_norm}


class ContinuationError(RuntimeError):
    """Newton divergence or step-rejection cascade; ``state`` is the last accepted state."""

    def __init__(self, message, state, diagnostics=None):
        super().__init__(message)
        self.state = state
        self.diagnostics = diagnostics or {}


def fix_phase(values: np.ndarray, n: int) -> np.ndarray:
    """Rotate the global phase so the largest component at the first site is real positive."""
    site = values[(0,) * n].reshape(-1)
    j = int(np.argmax(np.abs(site)))
    if abs(site[j]) == 0.0:
        return values
    return values * (abs(site[j]) / site[j])


def _realify(z: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(z).view(np.float64).ravel()


def _complexify(x: np.ndarray, shape) -> np.ndarray:
    return np.ascontiguousarray(x).view(np.complex128).reshape(shape)


class _BorderedSystem:
    def __init__(self, D, kind, params, psi, lam, shift=1.0):
        self.D, self.kind, self.params = D, kind, params
        self.psi, self.lam = psi, lam
        self.shape = psi.shape
        self.m = psi.size * 2
        lat = D.lattice
        ks = lat.wavenumbers(psi.ndim - lat.n)
        k2 = sum(k * k for k in ks)
        self.precond_symbol = 1.0 / np.sqrt(k2 + shift)

    def matvec(self, x):
        x = np.asarray(x).ravel()
        dpsi = _complexify(x[:-1].copy(), self.shape)
        dlam = x[-1]
        jd = self.D.apply(dpsi) - self.lam * dpsi
        jd = jd + linearized_nonlinear(self.kind, self.D, self.psi, self.params, dpsi)
        top = jd - dlam * self.psi
        bottom = -np.vdot(self.psi, dpsi).real
        return np.concatenate([_realify(top), [bottom]])

    def precond(self, x):
        x = np.asarray(x).ravel()
        z = _complexify(x[:-1].copy(), self.shape)
        lat = self.D.lattice
        z = from_spectral(self.precond_symbol * to_spectral(z, lat), lat)
        return np.concatenate([_realify(z), [x[-1]]])

    def operators(self):
        n = self.m + 1
        A = spla.LinearOperator((n, n), matvec=self.matvec, dtype=np.float64)
        M = spla.LinearOperator((n, n), matvec=self.precond, dtype=np.float64)
        return A, M


def _residuals(D, kind, params, psi, lam, target):
    lat = D.lattice
    F = el_residual_values(kind, D, psi, params, lam=lam)
    g = 0.5 * (np.vdot(psi, psi).real * lat.cell_volume - target)
    return F, g


def newton_correct(D, kind, params, psi, lam, target, tol, maxiter=25, krylov_maxiter=2000):
    """Newton iteration at fixed mu.  Returns (psi, lam, residual, iterations)."""
    lat = D.lattice
    F, g = _residuals(D, kind, params, psi, lam, target)
    res = l2_norm(F, lat)
    hist = [res]
    for it in range(maxiter):
        if res <= tol and abs(2 * g) <= 1e-10 * max(1.0, target):
            return psi, lam, res, it, hist
        system = _BorderedSystem(D, kind, params, psi, lam)
        A, M = system.operators()
        rhs = np.concatenate([_realify(-F), [g / lat.cell_volume]])
        # inner tolerance tol/10 relative to the current residual, capped so
        # every Newton step gains at least two digits
        rtol = float(np.clip(0.1 * tol / (res + abs(g) + 1e-300), 1e-12, 1e-2))
        x, info = spla.minres(A, rhs, M=M, rtol=rtol, maxiter=krylov_maxiter)
        dpsi = _complexify(x[:-1].copy(), psi.shape)
        dlam = float(x[-1])
        step = 1.0
        for _ in range(6):
            cand_psi = psi + step * dpsi
            cand_lam = lam + step * dlam
            Fc, gc = _residuals(D, kind, params, cand_psi, cand_lam, target)
            rc = l2_norm(Fc, lat)
            merit_old = res + abs(g)
            if rc + abs(gc) < merit_old or rc <= tol:
                break
            step *= 0.5
        else:
            raise ContinuationError("Newton step rejected after damping", None,
                                    {"residual": res, "history": hist, "minres_info": info})
        psi, lam, F, g, res = cand_psi, cand_lam, Fc, gc, rc
        hist.append(res)
    if res <= tol and abs(2 * g) <= 1e-10 * max(1.0, target):
        return psi, lam, res, maxiter, hist
    raise ContinuationError("Newton did not converge", None, {"residual": res, "history": hist})


def solve_branch(D: DiracOperator, kind, start, mu_target: float, steps: int, tol: float = 1e-8,
                 target_norm: float | None = None, params: ModelParams | None = None,
                 max_newton: int = 25, max_halvings: int = 6) -> ContinuationState:
    """Continue the eigenpair ``start = (lam_k, field)`` from mu = 0 to ``mu_target``.

    The field is rescaled to ``target_norm`` (its own squared L^2 norm by default);
    lam is solved for at every step.  ``params`` supplies the flavor count.
    """
    kind = ModelKind.parse(kind)
    if kind is ModelKind.NJL:
        raise ModelError("the NJL functional has no mass term to act as a free parameter")
    if steps < 1 or tol <= 0:
        raise ValueError("steps must be >= 1 and tol > 0")
    lam0, field0 = start
    lat = D.lattice
    base = params or ModelParams()
    psi = field0.values.astype(complex)
    norm0 = l2_norm(psi, lat) ** 2
    if target_norm is None:
        target_norm = norm0
    psi = psi * np.sqrt(target_norm / norm0)
    F, _ = _residuals(D, kind, replace(base, lam=lam0, mu=0.0), psi, lam0, target_norm)
    state = ContinuationState(SpinorField(lat, psi), float(lam0), 0.0, float(target_norm),
                              l2_norm(F, lat))
    state.history.append((0.0, float(lam0), state.residual_norm))
    if mu_target == 0.0:
        return state

    dmu = mu_target / steps
    min_dmu = abs(dmu) / 2 ** max_halvings
    mu = 0.0
    prev = None
    while abs(mu_target - mu) > 1e-14 * max(1.0, abs(mu_target)):
        h = dmu if abs(dmu) <= abs(mu_target - mu) else mu_target - mu
        new_mu = mu + h
        # secant predictor once two states are known
        if prev is not None and prev[0] != mu:
            t = (new_mu - mu) / (mu - prev[0])
            guess_psi = state.psi.values + t * (state.psi.values - prev[1])
            guess_lam = state.lam + t * (state.lam - prev[2])
        else:
            guess_psi, guess_lam = state.psi.values, state.lam
        p = replace(base, mu=new_mu, lam=guess_lam)
        try:
            psi_n, lam_n, res, its, hist = newton_correct(
                D, kind, p, guess_psi, guess_lam, target_norm, tol, max_newton)
        except ContinuationError as err:
            dmu = h / 2
            log.info("step to mu=%g rejected (%s); halving", new_mu, err)
            if abs(dmu) < min_dmu:
                raise ContinuationError(
                    f"step rejection cascade below minimum step at mu={mu:g}", state,
                    err.diagnostics) from err
            continue
        prev = (mu, state.psi.values, state.lam)
        psi_n = fix_phase(psi_n, lat.n)
        state = ContinuationState(SpinorField(lat, psi_n), float(lam_n), float(new_mu),
                                  float(target_norm), float(res), state.history)
        state.history.append((float(new_mu), float(lam_n), float(res)))
        mu = new_mu
    return state


def resolve_on_grid(D_fine: DiracOperator, kind, state: ContinuationState, psi_values: np.ndarray,
                    tol: float = 1e-8, params: ModelParams | None = None) -> ContinuationState:
    """Re-converge an interpolated state on another grid at the same mu."""
    base = params or ModelParams()
    p = replace(base, mu=state.mu, lam=state.lam)
    psi, lam, res, _, _ = newton_correct(D_fine, ModelKind.parse(kind), p, psi_values,
                                         state.lam, state.target_norm, tol)
    psi = fix_phase(psi, D_fine.lattice.n)
    return ContinuationState(SpinorField(D_fine.lattice, psi), float(lam), state.mu,
                             state.target_norm, float(res))


def critical_combination(D: DiracOperator, fields, kind="soler", iters: int = 2000,
                         seed: int = 0, tol: float = 1e-13) -> SpinorField:
    """Critical point of the quartic part of ``kind`` on the unit sphere of an eigenspace.

    Power iteration c <- P N(psi) / ||P N(psi)|| with P the projection onto the
    span of ``fields`` (assumed L^2-orthonormal) and N the cubic term at mu = 1.
    Starting a branch from such a combination makes the first-order
    bifurcation equation consistent.
    """
    lat = D.lattice
    kind = ModelKind.parse(kind)
    unit = ModelParams(mu=1.0)
    basis = [f.values for f in fields]
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    c /= np.linalg.norm(c)
    for _ in range(iters):
        psi = sum(ci * b for ci, b in zip(c, basis))
        nl = nonlinear_term(kind, D, psi, unit)
        new = np.array([np.vdot(b, nl) * lat.cell_volume for b in basis])
        # ascend |quartic|, whatever its sign
        new *= np.sign(np.vdot(c, new).real) or 1.0
        new /= np.linalg.norm(new)
        # compare up to the global phase
        ph = np.vdot(new, c)
        done = np.linalg.norm(new * (ph / abs(ph)) - c) < tol if ph != 0 else False
        c = new
        if done:
            break
    psi = sum(ci * b for ci, b in zip(c, basis))
    return SpinorField(lat, fix_phase(psi, lat.n))
