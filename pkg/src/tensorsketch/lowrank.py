"""Sketch-based rank-r approximation and checks of its error bounds.

``scw`` is the one-sided sketch-and-solve scheme: take an orthonormal basis
``V`` of the row space of ``S A``, then return ``[A V]_r V^T``.
``two_sided_scw`` compresses both sides: ``Q`` spans ``A^T S^T``, ``P``
spans ``A W^T`` and the result is ``P [P^T A Q]_r Q^T``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .linalg import (
    as_matrix,
    check_orthonormal_rows,
    complete_orthonormal,
    frobenius_norm,
    qr_thin,
    subspace_distance,
    svd_full,
    svd_truncated,
)
from .sketch import as_sketch
from .tensor import Tensor3, frobenius_norm_tensor, unfold_mode


class RankWarning(UserWarning):
    """The sketch is too small to support the requested rank."""


@dataclass(frozen=True, eq=False)
class LowRankApprox:
    """Factored approximation ``left @ diag(sigma) @ right.T``."""

    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray

    @property
    def rank(self):
        return int(np.count_nonzero(self.sigma))

    @property
    def shape(self):
        return (self.left.shape[0], self.right.shape[0])

    def to_dense(self):
        return (self.left * self.sigma) @ self.right.T

    def residual_norm(self, a):
        """``||a - self.to_dense()||_F``."""
        return frobenius_norm(np.asarray(a, dtype=np.float64) - self.to_dense())


def _check_rank(r, m, n):
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= min(m, n):
        raise ShapeError(f"rank r={r!r} must be an integer in [1, min(m, n)={min(m, n)}]")


def best_rank_r(a, r):
    """Truncated SVD in factored form (the Eckart-Young optimum)."""
    a = as_matrix(a)
    _check_rank(r, *a.shape)
    f = svd_truncated(a, r)
    return LowRankApprox(f.u, f.s, f.v)


def scw_orthogonalization_variant(a, s, r, use_qr):
    """One-sided sketch approximation with an SVD or QR basis of ``row(S A)``.

    With ``use_qr=False`` the basis is the right singular factor of ``S A``;
    with ``use_qr=True`` it is the Q factor of ``(S A)^T``. The two bases
    span the same space, so the approximation errors agree.
    """
    a = as_matrix(a)
    sketch = as_sketch(s)
    m, n = a.shape
    if sketch.m != m:
        raise ShapeError(f"sketch is {sketch.k}x{sketch.m} but the matrix has {m} rows")
    _check_rank(r, m, n)
    if sketch.k < r:
        warnings.warn(f"sketch size k={sketch.k} is below the target rank r={r}; truncating r to {sketch.k}", RankWarning, stacklevel=3)
    sa = sketch.s @ a
    basis = qr_thin(sa.T).q if use_qr else svd_full(sa).v
    r_eff = min(r, basis.shape[1])
    f = svd_truncated(a @ basis, r_eff)
    return LowRankApprox(f.u, f.s, basis @ f.v)


def scw(a, s, r):
    """Rank-``r`` approximation of ``a`` from the row space of ``s @ a``.

    ``s`` is a :class:`~tensorsketch.sketch.Sketch` or a plain k×m matrix.
    """
    return scw_orthogonalization_variant(a, s, r, use_qr=False)


def two_sided_scw(a, s, w, r):
    """Rank-``r`` approximation ``P [P^T A Q]_r Q^T`` from a left and a right sketch."""
    a = as_matrix(a)
    s = as_sketch(s)
    w = as_sketch(w)
    m, n = a.shape
    if s.m != m:
        raise ShapeError(f"left sketch is {s.k}x{s.m} but the matrix has {m} rows")
    if w.m != n:
        raise ShapeError(f"right sketch is {w.k}x{w.m} but the matrix has {n} columns")
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= min(s.k, w.k, m, n):
        raise ShapeError(f"rank r={r!r} must be in [1, min(k, l, m, n)={min(s.k, w.k, m, n)}]")
    q = qr_thin(a.T @ s.s.T).q
    p = qr_thin(a @ w.s.T).q
    f = svd_truncated(p.T @ a @ q, r)
    return LowRankApprox(p @ f.u, f.s, q @ f.v)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def _require_orthonormal(s, r):
    s = as_sketch(s)
    check_orthonormal_rows(s.s, 1e-8, "sketch")
    if s.k < r:
        raise ShapeError(f"sketch size k={s.k} must be at least r={r}")
    return s


def relaxation_bound_check(slices, s, r):
    """Compare the summed one-sided error over a stream with its tensor relaxation.

    ``lhs = sum_d ||A_d - scw(A_d, S, r)||_F^2`` and
    ``rhs = ||A||_F^2 - ||[S A_(1)]_r||_F^2``; ``holds`` is
    ``lhs <= rhs + 1e-8 * max(1, rhs)``. ``s`` must have orthonormal rows.
    """
    t = slices if isinstance(slices, Tensor3) else Tensor3.from_slices(slices)
    s = _require_orthonormal(s, r)
    lhs = sum(scw(a, s, r).residual_norm(a) ** 2 for a in t)
    head = svd_full(s.s @ unfold_mode(t, 1)).s[:r]
    rhs = frobenius_norm_tensor(t) ** 2 - float(np.sum(head * head))
    return BoundCheck(float(lhs), float(rhs), bool(lhs <= rhs + 1e-8 * max(1.0, rhs)))


@dataclass(frozen=True)
class SubspaceGap:
    """Excess squared error of ``scw`` over the optimum, and its subspace bound."""

    excess: float
    bound_factor: float
    norm_sq: float

    @property
    def holds(self):
        return self.excess <= self.bound_factor + 1e-8 * max(1.0, self.norm_sq)


def theorem2_gap(a, s, r):
    """Excess error of ``scw(a, s, r)`` against ``||U_k U_k^T - S^T S||_F^2 ||a||_F^2``.

    ``U_k`` holds the top-k left singular vectors of ``a`` (completed when
    ``k`` exceeds ``min(m, n)``).
    """
    a = as_matrix(a)
    s = _require_orthonormal(s, r)
    excess = scw(a, s, r).residual_norm(a) ** 2 - best_rank_r(a, r).residual_norm(a) ** 2
    u = svd_full(a).u[:, :s.k]
    if u.shape[1] < s.k:
        u = complete_orthonormal(u, s.k)
    norm_sq = frobenius_norm(a) ** 2
    return SubspaceGap(float(excess), subspace_distance(u, s.s) * norm_sq, norm_sq)
