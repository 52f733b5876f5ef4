"""Fourier pseudo-spectral spinor fields on flat tori.

A field on T^n = R^n / (L Z)^n is stored as a complex array of shape
``(*sizes, *block, spinor_dim)``: grid axes first, then optional block axes
(flavors, target legs), then the spinor axis.  Antiperiodic spin structures
are handled by the half-integer frequency shift k = 2 pi (m + 1/2) / L, which
is realised by demodulating with exp(-i pi x / L) before the FFT.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .clifford import CliffordRep

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("SPINLAB_THREADS", "1")))
    except ValueError:
        return 1


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class TorusLattice:
    n: int
    sizes: tuple
    lengths: tuple
    spin_structure: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        lengths = tuple(float(x) for x in self.lengths)
        spin = tuple(str(s) for s in self.spin_structure)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "spin_structure", spin)
        if not (len(sizes) == len(lengths) == len(spin) == self.n):
            raise LatticeError("sizes, lengths and spin_structure need n entries")
        if any(s < 4 or s % 2 for s in sizes):
            raise LatticeError(f"grid sizes must be even and >= 4, got {sizes}")
        if any(not np.isfinite(x) or x <= 0 for x in lengths):
            raise LatticeError(f"periods must be positive, got {lengths}")
        if any(s not in (PERIODIC, ANTIPERIODIC) for s in spin):
            raise LatticeError(f"unknown spin structure {spin}")

    @classmethod
    def uniform(cls, n, size, length=2 * np.pi, spin=PERIODIC):
        return cls(n, (size,) * n, (length,) * n, (spin,) * n)

    def with_sizes(self, sizes) -> "TorusLattice":
        return TorusLattice(self.n, tuple(sizes), self.lengths, self.spin_structure)

    @property
    def shifts(self) -> tuple:
        return tuple(0.5 if s == ANTIPERIODIC else 0.0 for s in self.spin_structure)

    @property
    def spacing(self) -> tuple:
        return tuple(L / N for L, N in zip(self.lengths, self.sizes))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    def axis_coords(self, a: int) -> np.ndarray:
        return np.arange(self.sizes[a]) * self.spacing[a]

    def mesh(self) -> list:
        return np.meshgrid(*[self.axis_coords(a) for a in range(self.n)], indexing="ij")

    def axis_modes(self, a: int, shifted: bool = True) -> np.ndarray:
        """Wavenumbers 2 pi (m + delta) / L along one axis in FFT order."""
        N = self.sizes[a]
        m = sfft.fftfreq(N, d=1.0 / N)
        if shifted:
            m = m + self.shifts[a]
        return 2 * np.pi * m / self.lengths[a]

    def wavenumbers(self, extra_dims: int = 0, shifted: bool = True) -> list:
        """Per-axis wavenumber arrays broadcastable against field arrays."""
        out = []
        for a in range(self.n):
            shape = [1] * (self.n + extra_dims)
            shape[a] = self.sizes[a]
            out.append(self.axis_modes(a, shifted).reshape(shape))
        return out


# --- transforms -------------------------------------------------------------

def _phase(lattice: TorusLattice, extra_dims: int, sign: int):
    ph = None
    for a in range(lattice.n):
        if lattice.shifts[a] == 0.0:
            continue
        shape = [1] * (lattice.n + extra_dims)
        shape[a] = lattice.sizes[a]
        x = lattice.axis_coords(a)
        p = np.exp(sign * 1j * np.pi * x / lattice.lengths[a]).reshape(shape)
        ph = p if ph is None else ph * p
    return ph


def to_spectral(values: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    extra = values.ndim - lattice.n
    ph = _phase(lattice, extra, -1)
    v = values if ph is None else values * ph
    return sfft.fftn(v, axes=tuple(range(lattice.n)), workers=fft_workers())


def from_spectral(coeffs: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    extra = coeffs.ndim - lattice.n
    v = sfft.ifftn(coeffs, axes=tuple(range(lattice.n)), workers=fft_workers())
    ph = _phase(lattice, extra, +1)
    return v if ph is None else v * ph


def spinor_derivative(values: np.ndarray, lattice: TorusLattice, axis: int) -> np.ndarray:
    extra = values.ndim - lattice.n
    k = lattice.wavenumbers(extra)[axis]
    return from_spectral(1j * k * to_spectral(values, lattice), lattice)


def scalar_derivative(f: np.ndarray, lattice: TorusLattice, axis: int) -> np.ndarray:
    """Spectral derivative of a real periodic field (extra trailing axes allowed)."""
    extra = f.ndim - lattice.n
    k = lattice.wavenumbers(extra, shifted=False)[axis]
    axes = tuple(range(lattice.n))
    w = fft_workers()
    return sfft.ifftn(1j * k * sfft.fftn(f, axes=axes, workers=w), axes=axes, workers=w).real


def scalar_gradient(f: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    return np.stack([scalar_derivative(f, lattice, a) for a in range(lattice.n)])


def scalar_laplacian(f: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    extra = f.ndim - lattice.n
    ks = lattice.wavenumbers(extra, shifted=False)
    k2 = sum(k * k for k in ks)
    axes = tuple(range(lattice.n))
    w = fft_workers()
    return sfft.ifftn(-k2 * sfft.fftn(f, axes=axes, workers=w), axes=axes, workers=w).real


def resample(values: np.ndarray, lattice: TorusLattice, new_sizes) -> np.ndarray:
    """Trigonometric interpolation of a field onto a grid with ``new_sizes``.

    Works for upsampling and downsampling; the periodic Nyquist mode is split
    symmetrically when upsampling.
    """
    coeffs = to_spectral(values, lattice)
    new_sizes = tuple(int(s) for s in new_sizes)
    for a in range(lattice.n):
        N, M = lattice.sizes[a], new_sizes[a]
        if N == M:
            continue
        m = np.rint(sfft.fftfreq(N, d=1.0 / N)).astype(int)
        periodic = lattice.shifts[a] == 0.0
        shape = list(coeffs.shape)
        shape[a] = M
        out = np.zeros(shape, dtype=complex)
        src = np.moveaxis(coeffs, a, 0)
        dst = np.moveaxis(out, a, 0)
        for j, mj in enumerate(m):
            if periodic and mj == -N // 2:
                if M > N:
                    dst[mj % M] += 0.5 * src[j]
                    dst[(-mj) % M] += 0.5 * src[j]
                continue
            if -(M // 2) <= mj <= M // 2 - 1:
                dst[mj % M] += src[j]
        coeffs = out * (M / N)
    new_lat = lattice.with_sizes(new_sizes)
    return from_spectral(coeffs, new_lat)


def dealias(values: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    """Zero every mode with |m + delta| > N/3 (2/3 rule)."""
    coeffs = to_spectral(values, lattice)
    mask = np.ones(lattice.sizes, dtype=bool)
    for a in range(lattice.n):
        N = lattice.sizes[a]
        m = sfft.fftfreq(N, d=1.0 / N) + lattice.shifts[a]
        shape = [1] * lattice.n
        shape[a] = N
        mask = mask & (np.abs(m) <= N / 3.0).reshape(shape)
    mask = mask.reshape(lattice.sizes + (1,) * (values.ndim - lattice.n))
    return from_spectral(coeffs * mask, lattice)


# --- fields -----------------------------------------------------------------

@dataclass
class SpinorField:
    lattice: TorusLattice
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[: self.lattice.n] != self.lattice.sizes:
            raise LatticeError(
                f"field shape {self.values.shape} does not match grid {self.lattice.sizes}")
        if not np.all(np.isfinite(self.values)):
            raise LatticeError("field has non-finite entries")

    @property
    def block_shape(self) -> tuple:
        return self.values.shape[self.lattice.n:-1]

    @property
    def spinor_dim(self) -> int:
        return self.values.shape[-1]

    def norm2(self) -> np.ndarray:
        """Pointwise |psi|^2 summed over block and spinor axes."""
        return pointwise_norm2(self.values, self.lattice)

    def l2_norm(self) -> float:
        return l2_norm(self.values, self.lattice)

    def copy(self) -> "SpinorField":
        return SpinorField(self.lattice, self.values.copy())

    def __add__(self, other):
        return SpinorField(self.lattice, self.values + other.values)

    def __sub__(self, other):
        return SpinorField(self.lattice, self.values - other.values)

    def __mul__(self, c):
        return SpinorField(self.lattice, c * self.values)

    __rmul__ = __mul__


def pointwise_norm2(values: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    sq = (values.real ** 2 + values.imag ** 2)
    return sq.reshape(lattice.sizes + (-1,)).sum(axis=-1)


def integrate(f: np.ndarray, lattice: TorusLattice) -> float:
    """Rectangle rule on the periodic grid (spectrally accurate)."""
    f = np.asarray(f)
    if not np.all(np.isfinite(f)):
        raise LatticeError("integrand has non-finite entries")
    return float(np.real(f.sum()) * lattice.cell_volume)


def l2_inner(a: np.ndarray, b: np.ndarray, lattice: TorusLattice) -> float:
    """Real L^2 product: integral of Re <a, b>."""
    return float(np.vdot(a, b).real * lattice.cell_volume)


def l2_norm(values: np.ndarray, lattice: TorusLattice) -> float:
    return float(np.sqrt(max(l2_inner(values, values, lattice), 0.0)))


def constant_field(lattice: TorusLattice, spinor, block=()) -> SpinorField:
    spinor = np.asarray(spinor, dtype=complex)
    vals = np.broadcast_to(spinor, lattice.sizes + tuple(block) + spinor.shape[-1:])
    return SpinorField(lattice, np.array(vals))


def plane_wave(lattice: TorusLattice, modes, spinor) -> SpinorField:
    """exp(i k.x) * spinor with k_a = 2 pi (m_a + delta_a) / L_a for integer m_a."""
    X = lattice.mesh()
    phase = np.zeros(lattice.sizes)
    for a in range(lattice.n):
        k = 2 * np.pi * (modes[a] + lattice.shifts[a]) / lattice.lengths[a]
        phase = phase + k * X[a]
    spinor = np.asarray(spinor, dtype=complex)
    return SpinorField(lattice, np.exp(1j * phase)[..., None] * spinor)


# --- Dirac operator ---------------------------------------------------------

class EigenError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (attained residual {residual:.3e})")
        self.residual = residual


class DiracOperator:
    """Spectral Dirac operator sum_a e_a . d/dx_a on a flat torus."""

    def __init__(self, lattice: TorusLattice, rep: CliffordRep):
        if rep.n != lattice.n:
            raise LatticeError(f"rep dimension {rep.n} != lattice dimension {lattice.n}")
        self.lattice = lattice
        self.rep = rep
        ks = lattice.wavenumbers()
        G = rep.gamma_array
        sym = sum(1j * k[..., None, None] * G[a] for a, k in enumerate(ks))
        self.symbol = np.ascontiguousarray(sym)
        self._symbol_flat = self.symbol.reshape(-1, rep.spinor_dim, rep.spinor_dim)

    @property
    def spinor_dim(self) -> int:
        return self.rep.spinor_dim

    def _check(self, values):
        if values.shape[: self.lattice.n] != self.lattice.sizes or values.shape[-1] != self.spinor_dim:
            raise LatticeError(f"field shape {values.shape} incompatible with operator")

    def apply(self, values: np.ndarray) -> np.ndarray:
        self._check(values)
        coeffs = to_spectral(values, self.lattice)
        shape = coeffs.shape
        d = self.spinor_dim
        c = coeffs.reshape(self.lattice.npoints, -1, d)
        out = np.einsum("gij,gbj->gbi", self._symbol_flat, c).reshape(shape)
        return from_spectral(out, self.lattice)

    def __call__(self, psi):
        if isinstance(psi, SpinorField):
            return SpinorField(psi.lattice, self.apply(psi.values))
        return self.apply(psi)

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Array of shape (n, *values.shape) holding d_a psi."""
        self._check(values)
        coeffs = to_spectral(values, self.lattice)
        ks = self.lattice.wavenumbers(values.ndim - self.lattice.n)
        return np.stack([from_spectral(1j * k * coeffs, self.lattice) for k in ks])

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        """Componentwise sum_a d_a d_a psi."""
        coeffs = to_spectral(values, self.lattice)
        ks = self.lattice.wavenumbers(values.ndim - self.lattice.n)
        k2 = sum(k * k for k in ks)
        return from_spectral(-k2 * coeffs, self.lattice)

    def clifford(self, vector_field: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Pointwise X . psi for a vector field of shape (n, *sizes)."""
        mat = np.einsum("a...,aij->...ij", vector_field, self.rep.gamma_array)
        lead = self.lattice.sizes
        m = mat.reshape(-1, self.spinor_dim, self.spinor_dim)
        v = values.reshape(int(np.prod(lead)), -1, self.spinor_dim)
        return np.einsum("gij,gbj->gbi", m, v).reshape(values.shape)

    def gamma(self, a: int, values: np.ndarray) -> np.ndarray:
        """e_a . psi applied at every site (acts on the last axis)."""
        return values @ self.rep.gammas[a].T

    def spectrum(self, count: int, block=()):
        return dirac_spectrum(self, count, block)


def build_dirac(lattice: TorusLattice, rep: CliffordRep) -> DiracOperator:
    return DiracOperator(lattice, rep)


def dirac_spectrum(D: DiracOperator, count: int, block=(), tol: float = 1e-10):
    """Smallest-|lambda| eigenpairs by diagonalising the symbol per frequency.

    Returns a list of (eigenvalue, SpinorField) with L^2-normalised plane-wave
    eigenfields, sorted by |lambda| (ties: positive first, then by mode).
    """
    lat = D.lattice
    d = D.spinor_dim
    total = lat.npoints * d
    if count < 1 or count > total:
        raise ValueError(f"count must be in [1, {total}], got {count}")
    evals, evecs = np.linalg.eigh(D._symbol_flat)
    flat_ev = evals.reshape(-1)
    mode_idx = np.repeat(np.arange(lat.npoints), d)
    branch = np.tile(np.arange(d), lat.npoints)
    order = np.lexsort((branch, mode_idx, -flat_ev, np.round(np.abs(flat_ev), 10)))
    modes_per_axis = [np.rint(sfft.fftfreq(N, d=1.0 / N)).astype(int) for N in lat.sizes]
    out = []
    for idx in order[:count]:
        g, b = mode_idx[idx], branch[idx]
        multi = np.unravel_index(g, lat.sizes)
        modes = [modes_per_axis[a][multi[a]] for a in range(lat.n)]
        vec = evecs[g][:, b]
        # deterministic phase: largest component real positive
        j = int(np.argmax(np.abs(vec)))
        vec = vec * np.exp(-1j * np.angle(vec[j]))
        field = plane_wave(lat, modes, vec / np.sqrt(lat.volume))
        if block:
            v = np.zeros(lat.sizes + tuple(block) + (d,), dtype=complex)
            v[(slice(None),) * lat.n + (0,) * len(block)] = field.values
            field = SpinorField(lat, v)
        lam = float(flat_ev[idx])
        res = l2_norm(D.apply(field.values) - lam * field.values, lat)
        if res > tol:
            raise EigenError("eigenpair residual above tolerance", res)
        out.append((lam, field))
    return out


def gradient_spinor(psi: SpinorField, D: DiracOperator | None = None) -> np.ndarray:
    lat = psi.lattice
    coeffs = to_spectral(psi.values, lat)
    ks = lat.wavenumbers(psi.values.ndim - lat.n)
    return np.stack([from_spectral(1j * k * coeffs, lat) for k in ks])


def lichnerowicz_residual(D: DiracOperator, psi: SpinorField) -> float:
    """||D^2 psi - nabla* nabla psi|| / ||psi|| on the flat torus (R = 0)."""
    nrm = psi.l2_norm()
    if nrm == 0.0:
        raise ValueError("zero field: relative residual undefined")
    v = psi.values
    rough = D.apply(D.apply(v)) + D.laplacian(v)
    return l2_norm(rough, psi.lattice) / nrm


def random_bandlimited(lattice: TorusLattice, rng, block=(), spinor_dim=2, kmax=3) -> SpinorField:
    """Random field whose modes satisfy |m_a| <= kmax on every axis."""
    shape = lattice.sizes + tuple(block) + (spinor_dim,)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    mask = np.ones(lattice.sizes, dtype=bool)
    for a in range(lattice.n):
        N = lattice.sizes[a]
        m = sfft.fftfreq(N, d=1.0 / N)
        s = [1] * lattice.n
        s[a] = N
        mask = mask & (np.abs(m) <= kmax).reshape(s)
    coeffs = coeffs * mask.reshape(lattice.sizes + (1,) * (len(shape) - lattice.n))
    return SpinorField(lattice, from_spectral(coeffs, lattice))


def evaluate_at(values: np.ndarray, lattice: TorusLattice, points) -> np.ndarray:
    """Trigonometric interpolant of a field at off-grid points of shape (m, n)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    coeffs = to_spectral(values, lattice) / lattice.npoints
    flat = coeffs.reshape(lattice.npoints, -1)
    ks = [lattice.axis_modes(a) for a in range(lattice.n)]
    grids = np.meshgrid(*ks, indexing="ij")
    kvec = np.stack([g.ravel() for g in grids], axis=1)
    basis = np.exp(1j * points @ kvec.T)
    out = basis @ flat
    return out.reshape((points.shape[0],) + values.shape[lattice.n:])
