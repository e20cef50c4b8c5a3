import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorsketch.errors import ShapeError
from tensorsketch.linalg import frobenius_norm
from tensorsketch.tensor import Tensor3, fold_mode, frobenius_norm_tensor, nmode_product, unfold_mode

A1 = np.array([[1.0, 2.0], [3.0, 4.0]])
A2 = np.array([[5.0, 6.0], [7.0, 8.0]])


@pytest.fixture
def pair_tensor():
    return Tensor3.from_slices([A1, A2])


def test_from_slices_single():
    t = Tensor3.from_slices([A1])
    assert t.shape == (2, 2, 1)
    np.testing.assert_array_equal(t.slice(0), A1)


def test_from_slices_norm_of_duplicates():
    t = Tensor3.from_slices([A1, A1])
    assert frobenius_norm_tensor(t) == pytest.approx(math.sqrt(2) * frobenius_norm(A1), rel=1e-15)


def test_from_slices_errors():
    with pytest.raises(ShapeError):
        Tensor3.from_slices([np.ones((2, 2)), np.ones((2, 3))])
    with pytest.raises(ShapeError):
        Tensor3.from_slices([])


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        Tensor3(np.array([[[np.inf]]]))


def test_unfold_examples(pair_tensor):
    np.testing.assert_array_equal(unfold_mode(pair_tensor, 1), [[1, 2, 5, 6], [3, 4, 7, 8]])
    np.testing.assert_array_equal(unfold_mode(pair_tensor, 2), [[1, 3, 5, 7], [2, 4, 6, 8]])
    np.testing.assert_array_equal(unfold_mode(pair_tensor, 3), [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_unfold_invalid_mode(pair_tensor):
    with pytest.raises(ValueError):
        unfold_mode(pair_tensor, 4)


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_fold_inverts_unfold(rng, mode):
    t = Tensor3(rng.standard_normal((3, 4, 5)))
    assert fold_mode(unfold_mode(t, mode), mode, t.shape) == t


def test_nmode_identity_and_selection(rng):
    t = Tensor3(rng.standard_normal((4, 3, 5)))
    assert nmode_product(t, np.eye(3), 1) == t
    first_rows = nmode_product(t, np.eye(3)[:1], 1)
    assert first_rows.shape == (1, 5, 4)
    for d in range(t.d):
        np.testing.assert_array_equal(first_rows.slice(d), t.slice(d)[:1])


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_nmode_unfold_identity(rng, mode):
    t = Tensor3(rng.standard_normal((2, 3, 4)))
    size = t.shape[mode - 1]
    mat = rng.standard_normal((2, size))
    out = nmode_product(t, mat, mode)
    np.testing.assert_array_equal(unfold_mode(out, mode), mat @ unfold_mode(t, mode))


def test_nmode_entry_formula(rng):
    # B[s, j, d] = sum_i A[i, j, d] S[s, i], checked entry by entry
    t = Tensor3(rng.standard_normal((2, 3, 4)))
    s = rng.standard_normal((2, 3))
    b = nmode_product(t, s, 1)
    for d in range(t.d):
        for si in range(2):
            for j in range(t.n):
                ref = sum(t.slice(d)[i, j] * s[si, i] for i in range(t.m))
                assert b.slice(d)[si, j] == pytest.approx(ref, abs=1e-13)


def test_nmode_dimension_mismatch(rng):
    t = Tensor3(rng.standard_normal((2, 3, 4)))
    with pytest.raises(ShapeError):
        nmode_product(t, np.ones((2, 4)), 1)


def test_tensor_norm_examples(rng):
    assert frobenius_norm_tensor(Tensor3(np.zeros((2, 2, 2)))) == 0
    assert frobenius_norm_tensor(Tensor3(np.ones((2, 2, 2)))) == pytest.approx(math.sqrt(8), rel=1e-15)
    t = Tensor3(rng.standard_normal((3, 4, 5)))
    assert frobenius_norm_tensor(t) == pytest.approx(frobenius_norm(unfold_mode(t, 1)), rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 5), m=st.integers(1, 8), n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_unfold_preserves_norm(d, m, n, seed):
    t = Tensor3(np.random.default_rng(seed).standard_normal((d, m, n)))
    ref = frobenius_norm_tensor(t)
    for mode in (1, 2, 3):
        assert frobenius_norm(unfold_mode(t, mode)) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 6))
def test_nmode_orthonormal_norms(seed, k):
    gen = np.random.default_rng(seed)
    t = Tensor3(gen.standard_normal((3, 6, 5)))
    rows = np.linalg.qr(gen.standard_normal((6, k)))[0].T
    assert frobenius_norm_tensor(nmode_product(t, rows, 1)) <= frobenius_norm_tensor(t) * (1 + 1e-12)
    square = np.linalg.qr(gen.standard_normal((5, 5)))[0]
    assert frobenius_norm_tensor(nmode_product(t, square, 2)) == pytest.approx(frobenius_norm_tensor(t), rel=1e-12)


def test_nmode_products_commute(rng):
    t = Tensor3(rng.standard_normal((4, 6, 5)))
    s = rng.standard_normal((3, 6))
    w = rng.standard_normal((2, 5))
    lhs = nmode_product(nmode_product(t, s, 1), w, 2).slices
    rhs = nmode_product(nmode_product(t, w, 2), s, 1).slices
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_select_and_iteration(rng):
    t = Tensor3(rng.standard_normal((4, 2, 3)))
    sub = t.select([3, 1])
    np.testing.assert_array_equal(sub.slice(0), t.slice(3))
    assert len(list(t)) == len(t) == 4
