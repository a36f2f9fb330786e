import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmemi.linalg import as_matrix, as_vector, is_symmetric, min_eigenvalue_symmetric, operator_norm


def test_operator_norm_identity():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-12)


def test_operator_norm_diagonal():
    assert operator_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, abs=1e-10)


def test_operator_norm_zero_matrix_is_zero():
    assert operator_norm(np.zeros((4, 3))) == 0.0
    assert operator_norm(np.zeros((0, 0))) == 0.0


def test_operator_norm_matches_svd_oracle(rng):
    for _ in range(20):
        M = rng.standard_normal((10, 7))
        assert operator_norm(M, tol=1e-12) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-8)


def test_operator_norm_start_in_null_space_restarts():
    # all-ones start is orthogonal to the only singular direction
    M = np.array([[1.0, -1.0]])
    assert operator_norm(M) == pytest.approx(np.sqrt(2.0), rel=1e-10)


def test_operator_norm_rejects_bad_input():
    with pytest.raises(ValueError):
        operator_norm(np.eye(2), tol=0)
    with pytest.raises(ValueError):
        operator_norm(np.ones(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_operator_norm_transpose_invariant(p, q, seed):
    M = np.random.default_rng(seed).standard_normal((p, q))
    assert operator_norm(M, tol=1e-12) == pytest.approx(operator_norm(M.T, tol=1e-12), rel=1e-8)


def test_operator_norm_bounds_products(rng):
    M = rng.standard_normal((12, 9))
    nrm = operator_norm(M)
    for _ in range(100):
        x = rng.standard_normal(9)
        assert np.linalg.norm(M @ x) <= nrm * np.linalg.norm(x) * (1 + 1e-8)


def test_min_eigenvalue_diagonal_and_zero():
    assert min_eigenvalue_symmetric(np.diag([2.0, 5.0])) == pytest.approx(2.0)
    assert min_eigenvalue_symmetric(np.zeros((4, 4))) == pytest.approx(0.0, abs=1e-15)


def test_min_eigenvalue_gram_is_nonnegative(rng):
    for _ in range(20):
        G = rng.standard_normal((6, 9))
        assert min_eigenvalue_symmetric(G.T @ G) >= -1e-10


def test_min_eigenvalue_rejects_nonsymmetric():
    with pytest.raises(ValueError, match="not symmetric"):
        min_eigenvalue_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="not symmetric"):
        min_eigenvalue_symmetric(np.ones((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.floats(-5, 5), st.integers(0, 2**31 - 1))
def test_min_eigenvalue_shift(k, c, seed):
    G = np.random.default_rng(seed).standard_normal((k, k))
    S = G + G.T
    assert min_eigenvalue_symmetric(S + c * np.eye(k)) == pytest.approx(
        min_eigenvalue_symmetric(S) + c, abs=1e-10)


def test_is_symmetric():
    assert is_symmetric(np.eye(3))
    assert not is_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not is_symmetric(np.ones(3))


def test_as_matrix_and_vector_validate():
    with pytest.raises(ValueError):
        as_matrix(np.ones(3))
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        as_vector(np.ones((2, 2)))
    with pytest.raises(ValueError):
        as_vector([np.inf])
    assert as_vector([1, 2]).dtype == float


@pytest.mark.parametrize("n", [3, 5, 8, 9])
def test_operator_norm_chain_difference_alternating_mode(n):
    # the top singular vector of a chain difference is orthogonal to all-ones
    D = np.eye(n)[:-1] - np.eye(n)[1:]
    assert operator_norm(D, tol=1e-12) == pytest.approx(np.linalg.svd(D, compute_uv=False)[0], rel=1e-8)
