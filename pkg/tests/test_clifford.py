import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlab.clifford import (
    CliffordError,
    build_clifford_rep,
    clifford_mul,
    clifford_residuals,
    hermitian,
    inner,
    killing_implies_eigen,
)

finite = st.floats(-10, 10, allow_nan=False)


@pytest.mark.parametrize("n, d", [(2, 2), (3, 2), (4, 4)])
def test_dimensions_and_relations(n, d):
    rep = build_clifford_rep(n)
    assert rep.spinor_dim == d
    assert rep.gamma_array.shape == (n, d, d)
    res = clifford_residuals(rep)
    assert all(v <= 1e-12 for v in res.values())
    if n % 2 == 0:
        assert "volume_square" in res
    else:
        assert rep.volume_form is None


@pytest.mark.parametrize("n", [0, 1, 5, 2.0, "3"])
def test_bad_dimension(n):
    with pytest.raises(CliffordError):
        build_clifford_rep(n)


def test_generators_read_only():
    rep = build_clifford_rep(2)
    with pytest.raises(ValueError):
        rep.gammas[0][0, 0] = 1.0


@pytest.mark.parametrize("n", [2, 3, 4])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_vector_squares_to_minus_norm(n, data):
    rep = build_clifford_rep(n)
    X = np.array(data.draw(st.lists(finite, min_size=n, max_size=n)))
    re = data.draw(st.lists(finite, min_size=rep.spinor_dim, max_size=rep.spinor_dim))
    im = data.draw(st.lists(finite, min_size=rep.spinor_dim, max_size=rep.spinor_dim))
    psi = np.array(re) + 1j * np.array(im)
    twice = clifford_mul(rep, X, clifford_mul(rep, X, psi))
    scale = 1 + np.dot(X, X) * np.linalg.norm(psi)
    assert np.max(np.abs(twice + np.dot(X, X) * psi)) <= 1e-12 * scale
    # Clifford multiplication by a real vector is skew: Re<X.psi, psi> = 0
    assert abs(inner(clifford_mul(rep, X, psi), psi)) <= 1e-12 * scale


def test_hermitian_is_antilinear_in_first_slot():
    a = np.array([1j, 0])
    b = np.array([1, 0])
    assert hermitian(a, b) == -1j
    assert hermitian(b, a) == 1j


def test_clifford_mul_rejects_bad_input():
    rep = build_clifford_rep(3)
    with pytest.raises(CliffordError):
        clifford_mul(rep, [1, 0], [1, 0])
    with pytest.raises(CliffordError):
        clifford_mul(rep, [1, 0, 0], [1, 0, 0])
    with pytest.raises(CliffordError):
        clifford_mul(rep, [np.nan, 0, 0], [1, 0])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_killing_constant_gives_eigenvalue(n):
    assert killing_implies_eigen(build_clifford_rep(n), 0.37) <= 1e-14
