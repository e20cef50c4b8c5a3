import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorsketch.errors import NotOrthonormalError, ShapeError
from tensorsketch.linalg import (
    frobenius_norm,
    golub_kahan_svd,
    matmul,
    qr_thin,
    subspace_distance,
    svd_full,
    svd_truncated,
    top_left_singular_vectors,
)

METHODS = ["lapack", "golub_kahan"]

# eigenvalues of A^T A = [[10, 14], [14, 20]] for A = [[1, 2], [3, 4]]
SIGMA1_2X2 = math.sqrt((30 + math.sqrt(884)) / 2)
SIGMA2_2X2 = math.sqrt((30 - math.sqrt(884)) / 2)


def test_matmul_examples():
    np.testing.assert_array_equal(matmul(np.eye(2), [[1, 2], [3, 4]]), [[1, 2], [3, 4]])
    np.testing.assert_array_equal(matmul([[1, 0], [0, 0]], [[5], [7]]), [[5], [0]])
    np.testing.assert_array_equal(matmul([[1, 2], [3, 4]], [[5, 6], [7, 8]]), [[19, 22], [43, 50]])


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError, match="2x3 by 2x2"):
        matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        matmul([[np.nan]], [[1.0]])


def test_frobenius_norm_examples():
    assert frobenius_norm(np.zeros((3, 3))) == 0
    assert frobenius_norm([[3, 4]]) == 5
    assert frobenius_norm([[1, 1], [1, 1]]) == 2


def test_qr_examples():
    q, r = qr_thin(np.eye(3))
    np.testing.assert_array_equal(q, np.eye(3))
    np.testing.assert_array_equal(r, np.eye(3))
    q, r = qr_thin([[3], [4]])
    np.testing.assert_allclose(q, [[0.6], [0.8]], atol=1e-15)
    np.testing.assert_allclose(r, [[5]], atol=1e-15)


def test_qr_random_tall(rng):
    a = rng.standard_normal((6, 3))
    q, r = qr_thin(a)
    assert frobenius_norm(q.T @ q - np.eye(3)) <= 1e-12
    assert frobenius_norm(q @ r - a) <= 1e-12 * frobenius_norm(a)
    np.testing.assert_array_equal(r, np.triu(r))
    assert np.all(np.diag(r) >= 0)


def test_qr_rank_deficient_keeps_q_orthonormal():
    a = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [3.0, 6.0, 0.0], [0.0, 0.0, 0.0]])
    q, r = qr_thin(a)
    assert frobenius_norm(q.T @ q - np.eye(3)) <= 1e-12
    assert frobenius_norm(q @ r - a) <= 1e-12 * frobenius_norm(a)
    assert abs(r[1, 1]) <= 1e-12 and r[2, 2] == 0


def test_qr_wide(rng):
    a = rng.standard_normal((3, 5))
    q, r = qr_thin(a)
    assert q.shape == (3, 3) and r.shape == (3, 5)
    assert frobenius_norm(q @ r - a) <= 1e-12 * frobenius_norm(a)


def test_qr_is_bit_deterministic(rng):
    a = rng.standard_normal((9, 4))
    q1, r1 = qr_thin(a.copy())
    q2, r2 = qr_thin(a.copy())
    assert q1.tobytes() == q2.tobytes() and r1.tobytes() == r2.tobytes()


@pytest.mark.parametrize("method", METHODS)
def test_svd_diagonal(method):
    f = svd_full(np.diag([3.0, 2.0, 1.0]), method)
    np.testing.assert_allclose(f.s, [3, 2, 1], atol=1e-14)
    np.testing.assert_allclose(f.u, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(f.v, np.eye(3), atol=1e-14)


@pytest.mark.parametrize("method", METHODS)
def test_svd_zero_matrix_completion(method):
    f = svd_full(np.zeros((2, 2)), method)
    np.testing.assert_array_equal(f.s, [0, 0])
    np.testing.assert_array_equal(f.u, np.eye(2))
    np.testing.assert_array_equal(f.v, np.eye(2))


@pytest.mark.parametrize("method", METHODS)
def test_svd_2x2_quadratic_formula(method):
    f = svd_full([[1.0, 2.0], [3.0, 4.0]], method)
    assert f.s[0] == pytest.approx(SIGMA1_2X2, rel=1e-13)
    assert f.s[1] == pytest.approx(SIGMA2_2X2, rel=1e-12)
    assert f.s[0] == pytest.approx(5.46499, abs=1e-5)


def test_svd_truncated_examples():
    f = svd_truncated(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(f.reconstruct(), np.diag([3.0, 2.0, 0.0]), atol=1e-14)
    u, v = np.array([1.0, 2.0, 2.0]), np.array([3.0, 4.0])
    f = svd_truncated(np.outer(u, v), 2)
    np.testing.assert_allclose(f.s, [15.0, 0.0], atol=1e-13)
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    f = svd_truncated(a, 1)
    assert frobenius_norm(a - f.reconstruct()) == pytest.approx(SIGMA2_2X2, rel=1e-10)
    assert SIGMA2_2X2 == pytest.approx(0.36597, abs=1e-5)


def test_svd_truncated_rank_out_of_range():
    with pytest.raises(ShapeError):
        svd_truncated(np.eye(3), 0)
    with pytest.raises(ShapeError):
        svd_truncated(np.eye(3), 4)


def _check_svd(a, f):
    scale = max(1.0, frobenius_norm(a))
    p = min(a.shape)
    assert f.u.shape == (a.shape[0], p) and f.v.shape == (a.shape[1], p)
    assert frobenius_norm(f.u.T @ f.u - np.eye(p)) <= 1e-10
    assert frobenius_norm(f.v.T @ f.v - np.eye(p)) <= 1e-10
    assert frobenius_norm(a - f.reconstruct()) <= 1e-10 * scale
    assert np.all(f.s >= 0) and np.all(np.diff(f.s) <= 0)
    idx = np.argmax(np.abs(f.u), axis=0)
    assert np.all(f.u[idx, np.arange(p)] > 0)


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 50),
    n=st.integers(1, 40),
    rank=st.integers(0, 40),
    seed=st.integers(0, 2**32 - 1),
    method=st.sampled_from(METHODS),
)
def test_svd_invariants(m, n, rank, seed, method):
    gen = np.random.default_rng(seed)
    rank = min(rank, m, n)
    a = gen.standard_normal((m, rank)) @ gen.standard_normal((rank, n)) if rank else np.zeros((m, n))
    _check_svd(a, svd_full(a, method))


@pytest.mark.parametrize("shape", [(50, 40), (40, 50), (17, 17), (30, 1)])
def test_golub_kahan_matches_lapack(rng, shape):
    a = rng.standard_normal(shape)
    gk = svd_full(a, "golub_kahan")
    lp = svd_full(a, "lapack")
    np.testing.assert_allclose(gk.s, lp.s, rtol=1e-12, atol=1e-12)
    # canonical signs make the vectors comparable when singular values are simple
    np.testing.assert_allclose(np.abs(gk.u.T @ lp.u), np.eye(min(shape)), atol=1e-8)


def test_golub_kahan_handles_zero_diagonal():
    # bidiagonal input with an interior zero on the diagonal
    b = np.diag([2.0, 0.0, 3.0]) + np.diag([1.0, 1.0], 1)
    u, s, v = golub_kahan_svd(b)
    np.testing.assert_allclose((u * s) @ v.T, b, atol=1e-13)
    np.testing.assert_allclose(np.sort(s), np.sort(np.linalg.svd(b, compute_uv=False)), atol=1e-13)
    b = np.diag([2.0, 1.0, 0.0]) + np.diag([1.0, 1.0], 1)
    u, s, v = golub_kahan_svd(b)
    np.testing.assert_allclose((u * s) @ v.T, b, atol=1e-13)


@pytest.mark.parametrize("method", METHODS)
def test_eckart_young_tail_identity(method):
    for seed in range(10):
        gen = np.random.default_rng(seed)
        m, n = gen.integers(2, 51), gen.integers(2, 41)
        a = gen.standard_normal((m, n))
        s_all = svd_full(a, method).s
        for r in (1, min(m, n) // 2, min(m, n) - 1):
            if r < 1:
                continue
            tail = float(np.sum(s_all[r:] ** 2))
            err = frobenius_norm(a - svd_truncated(a, r, method).reconstruct()) ** 2
            assert err == pytest.approx(tail, rel=1e-9, abs=1e-12)


def test_cauchy_interlacing_for_row_orthonormal_sketch():
    for seed in range(20):
        gen = np.random.default_rng(seed)
        a = gen.standard_normal((15, 12))
        s = np.linalg.qr(gen.standard_normal((15, 6)))[0].T
        sa = svd_full(s @ a).s
        full = svd_full(a).s
        assert np.all(sa <= full[: sa.size] + 1e-12)


def test_svd_is_bit_deterministic(rng):
    a = rng.standard_normal((12, 7))
    f1, f2 = svd_full(a.copy()), svd_full(a.copy())
    assert all(x.tobytes() == y.tobytes() for x, y in zip(f1, f2))


def test_top_left_singular_vectors_matches_svd(rng):
    a = rng.standard_normal((10, 40))
    u = top_left_singular_vectors(a, 4)
    np.testing.assert_allclose(u, svd_full(a).u[:, :4], atol=1e-10)


def test_top_left_singular_vectors_completes_rank_deficit():
    a = np.zeros((3, 5))
    a[0, 0] = 2.0
    np.testing.assert_allclose(top_left_singular_vectors(a, 2), np.eye(3)[:, :2], atol=1e-15)


def test_subspace_distance_examples(rng):
    eye = np.eye(3)
    assert subspace_distance(eye[:, :2], eye[:2, :]) == 0
    assert subspace_distance(np.array([[1.0], [0.0]]), np.array([[0.0, 1.0]])) == pytest.approx(2.0)
    u = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    rot = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    assert subspace_distance(u, (u @ rot).T) == pytest.approx(0.0, abs=1e-12)


def test_subspace_distance_requires_orthonormal():
    with pytest.raises(NotOrthonormalError):
        subspace_distance(np.array([[2.0], [0.0]]), np.array([[1.0, 0.0]]))
    with pytest.raises(NotOrthonormalError):
        subspace_distance(np.array([[1.0], [0.0]]), np.array([[1.0, 1.0]]))


def test_golub_kahan_sweep_limit(rng):
    from tensorsketch.errors import ConvergenceError

    with pytest.raises(ConvergenceError):
        golub_kahan_svd(rng.standard_normal((6, 6)), max_sweeps=1)
