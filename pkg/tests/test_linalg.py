import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gauss_jordan_inverse, matmul_loops
from reefgpr.linalg import (
    LinAlgError,
    Matrix,
    NotPositiveDefiniteError,
    Vector,
    matmul,
    solve_spd,
    transpose,
)


def test_constructors_reject_non_finite():
    with pytest.raises(LinAlgError):
        Vector([1.0, float("nan")])
    with pytest.raises(LinAlgError):
        Matrix([[1.0, float("inf")]])
    with pytest.raises(LinAlgError):
        Matrix.from_flat(2, 2, [1, 2, 3])


def test_containers_are_read_only():
    m = Matrix([[1.0, 2.0]])
    with pytest.raises(ValueError):
        m.data[0, 0] = 5.0


def test_matmul_identity():
    M = Matrix([[1.5, -2.0], [3.0, 4.25]])
    assert matmul(Matrix.identity(2), M) == M


def test_matmul_hand_example():
    assert matmul([[1, 2], [3, 4]], [[1], [1]]).tolist() == [[3.0], [7.0]]


def test_matmul_shape_error_names_shapes():
    with pytest.raises(LinAlgError, match=r"2x3.*2x2"):
        matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_matmul_vs_triple_loop(rng):
    a, b = rng.normal(size=(5, 4)), rng.normal(size=(4, 3))
    np.testing.assert_allclose(matmul(a, b).data, matmul_loops(a, b), rtol=0, atol=1e-12)


def test_matmul_associative(rng):
    for _ in range(20):
        n, k, m, q = rng.integers(1, 8, size=4)
        a, b, c = rng.normal(size=(n, k)), rng.normal(size=(k, m)), rng.normal(size=(m, q))
        np.testing.assert_allclose(matmul(matmul(a, b), c).data, matmul(a, matmul(b, c)).data, atol=1e-9)


def test_transpose_examples(rng):
    assert transpose([[4.0]]) == Matrix([[4.0]])
    assert transpose([[1, 2, 3]]).tolist() == [[1.0], [2.0], [3.0]]
    a = Matrix(rng.normal(size=(4, 7)))
    assert transpose(transpose(a)) == a


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_transpose_involution_bitwise(r, c, seed):
    a = np.random.default_rng(seed).normal(size=(r, c)) * 1e3
    assert np.array_equal(transpose(transpose(a)).data, a)


def test_solve_identity_and_diagonal():
    b = [1.0, -2.0, 3.5]
    assert solve_spd(np.eye(3), b).tolist() == b
    np.testing.assert_allclose(solve_spd([[4, 0], [0, 9]], [8, 27]).data, [2.0, 3.0], atol=1e-15)


def test_solve_vs_gauss_jordan(rng):
    A0 = rng.normal(size=(6, 6))
    A = A0.T @ A0 + np.eye(6)
    b = rng.normal(size=6)
    np.testing.assert_allclose(solve_spd(A, b).data, gauss_jordan_inverse(A) @ b, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_solve_residual_small(n, seed):
    r = np.random.default_rng(seed)
    A0 = r.normal(size=(n, n))
    A = A0.T @ A0 + 0.1 * np.eye(n)
    A = 0.5 * (A + A.T)
    b = r.normal(size=n)
    w = solve_spd(A, b).data
    assert np.max(np.abs(A @ w - b)) <= 1e-8 * (1 + np.max(np.abs(b)))


def test_solve_rejects_indefinite_with_jitter_hint():
    with pytest.raises(NotPositiveDefiniteError, match="jitter"):
        solve_spd([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0])
    with pytest.raises(NotPositiveDefiniteError):
        solve_spd([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])


def test_solve_rejects_asymmetric_and_bad_rhs():
    with pytest.raises(LinAlgError, match="symmetric"):
        solve_spd([[2.0, 1.0], [0.0, 2.0]], [1.0, 1.0])
    with pytest.raises(LinAlgError):
        solve_spd(np.eye(2), [1.0, 2.0, 3.0])
