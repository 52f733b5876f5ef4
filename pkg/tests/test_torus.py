import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlab.torus import (
    ANTIPERIODIC,
    PERIODIC,
    LatticeError,
    SpinorField,
    TorusLattice,
    dirac_spectrum,
    evaluate_at,
    integrate,
    l2_inner,
    l2_norm,
    lichnerowicz_residual,
    plane_wave,
    random_bandlimited,
    resample,
    scalar_derivative,
    scalar_laplacian,
)

from conftest import make_dirac


def _abs_spectrum_oracle(n, shift, count, mmax=6):
    """|k| for k = m + shift, each with multiplicity equal to the fiber dimension."""
    d = 2 if n < 4 else 4
    vals = []
    for m in itertools.product(range(-mmax, mmax + 1), repeat=n):
        k = np.array(m) + shift
        vals += [np.linalg.norm(k)] * d
    return np.sort(vals)[:count]


@pytest.mark.parametrize("n, spin, shift", [(2, ANTIPERIODIC, 0.5), (2, PERIODIC, 0.0),
                                             (3, ANTIPERIODIC, 0.5), (4, PERIODIC, 0.0)])
def test_spectrum_matches_enumeration(n, spin, shift):
    D = make_dirac(n, 8, spin)
    pairs = dirac_spectrum(D, 24)
    got = np.array([abs(lam) for lam, _ in pairs])
    assert np.allclose(got, _abs_spectrum_oracle(n, shift, 24), atol=1e-12)
    # symmetric spectrum and sorted output
    assert np.all(np.diff(got) >= -1e-12)


def test_eigenfields_are_orthonormal(dirac_ap):
    pairs = dirac_spectrum(dirac_ap, 8)
    lat = dirac_ap.lattice
    G = np.array([[complex(np.vdot(a.values, b.values)) * lat.cell_volume
                   for _, b in pairs] for _, a in pairs])
    assert np.allclose(G, np.eye(8), atol=1e-12)


def test_spectrum_count_validated(dirac_p):
    with pytest.raises(ValueError):
        dirac_spectrum(dirac_p, 0)


def test_lattice_validation():
    with pytest.raises(LatticeError):
        TorusLattice(2, (8, 7), (1.0, 1.0), (PERIODIC, PERIODIC))
    with pytest.raises(LatticeError):
        TorusLattice(2, (8, 8), (1.0, -1.0), (PERIODIC, PERIODIC))
    with pytest.raises(LatticeError):
        TorusLattice(2, (8, 8), (1.0, 1.0), (PERIODIC, "twisted"))
    with pytest.raises(LatticeError):
        TorusLattice(3, (8, 8), (1.0, 1.0), (PERIODIC, PERIODIC))


@pytest.mark.parametrize("spin", [PERIODIC, ANTIPERIODIC])
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_dirac_self_adjoint_and_squares_to_laplacian(spin, seed):
    D = make_dirac(2, 16, spin, length=3.0)
    rng = np.random.default_rng(seed)
    a = random_bandlimited(D.lattice, rng, (), 2, 4)
    b = random_bandlimited(D.lattice, rng, (), 2, 4)
    lat = D.lattice
    lhs = np.vdot(D.apply(a.values), b.values)
    rhs = np.vdot(a.values, D.apply(b.values))
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))
    assert lichnerowicz_residual(D, a) <= 1e-11
    assert abs(l2_inner(a.values, a.values, lat) - l2_norm(a.values, lat) ** 2) <= 1e-10


def test_antiperiodic_field_values():
    lat = TorusLattice.uniform(2, 16, 2 * np.pi, ANTIPERIODIC)
    f = plane_wave(lat, (0, 0), [1, 0])
    # e^{i(x+y)/2}: flips sign after one period in each direction
    X, Y = lat.mesh()
    assert np.allclose(f.values[..., 0], np.exp(0.5j * (X + Y)))


def test_scalar_calculus_exact_on_trig_polynomials():
    lat = TorusLattice(2, (16, 12), (2.0, 5.0), (PERIODIC, PERIODIC))
    X, Y = lat.mesh()
    kx, ky = 2 * np.pi * 3 / 2.0, 2 * np.pi * 2 / 5.0
    f = np.sin(kx * X) * np.cos(ky * Y)
    assert np.allclose(scalar_derivative(f, lat, 0), kx * np.cos(kx * X) * np.cos(ky * Y), atol=1e-11)
    assert np.allclose(scalar_laplacian(f, lat), -(kx ** 2 + ky ** 2) * f, atol=1e-10)
    assert abs(integrate(f ** 2, lat) - 2.0 * 5.0 / 4) <= 1e-12


@pytest.mark.parametrize("spin", [PERIODIC, ANTIPERIODIC])
def test_resample_and_interpolation(rng, spin):
    lat = TorusLattice.uniform(2, 12, 2 * np.pi, spin)
    f = random_bandlimited(lat, rng, (), 2, 3)
    fine = resample(f.values, lat, (24, 24))
    back = resample(fine, lat.with_sizes((24, 24)), (12, 12))
    assert np.allclose(back, f.values, atol=1e-12)
    # fine grid agrees with the interpolant of the coarse one
    latf = lat.with_sizes((24, 24))
    pts = np.stack([m.ravel() for m in latf.mesh()], axis=1)[::37]
    interp = evaluate_at(f.values, lat, pts)
    assert np.allclose(interp, fine.reshape(-1, 2)[::37], atol=1e-12)


def test_thread_count_does_not_change_results(monkeypatch, rng):
    D = make_dirac(2, 32, ANTIPERIODIC)
    f = random_bandlimited(D.lattice, rng, (), 2, 6)
    monkeypatch.setenv("SPINLAB_THREADS", "1")
    one = D.apply(f.values)
    monkeypatch.setenv("SPINLAB_THREADS", "4")
    four = D.apply(f.values)
    assert np.array_equal(one, four)


def test_field_arithmetic(rng):
    lat = TorusLattice.uniform(2, 8)
    f = random_bandlimited(lat, rng, (), 2, 2)
    g = (f + f) - f * 0.5
    assert isinstance(g, SpinorField)
    assert np.allclose(g.values, 1.5 * f.values)
    assert np.isclose(f.l2_norm(), l2_norm(f.values, lat))
