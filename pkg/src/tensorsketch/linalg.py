"""Dense matrix kernels: products, Householder QR, SVD, subspace distances.

Every factorization returned here is canonicalized so that identical inputs
give bit-identical outputs:

* singular values are sorted non-increasing;
* singular values at or below ``max(m, n) * eps * sigma_max`` are set to
  exactly zero, and their singular vectors are replaced by a deterministic
  orthonormal completion against the standard basis ``e_1, e_2, ...``;
* in every left singular vector the entry of largest magnitude is positive
  (first such entry on ties), the matching right vector is flipped with it;
* the diagonal of ``R`` in a QR factorization is nonnegative.

``svd_full`` uses LAPACK by default. A Golub-Kahan-Reinsch implementation
(Householder bidiagonalization followed by implicit-shift QR sweeps on the
bidiagonal) is available as ``method="golub_kahan"`` and is used in the test
suite as an independent route.
"""

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, NotOrthonormalError, ShapeError

_EPS = np.finfo(np.float64).eps


class SvdFactors(NamedTuple):
    """Thin SVD ``a = u @ diag(s) @ v.T`` with ``u`` m×p and ``v`` n×p."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.s) @ self.v.T


class QrFactors(NamedTuple):
    """Thin QR ``a = q @ r``; ``q`` is m×p with orthonormal columns."""

    q: np.ndarray
    r: np.ndarray


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite float64 2-D array, raising otherwise."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def matmul(a, b):
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def frobenius_norm(a):
    return float(np.sqrt(np.sum(np.square(np.asarray(a, dtype=np.float64)))))


def check_orthonormal_columns(q, tol=1e-8, name="matrix"):
    """Raise ``NotOrthonormalError`` unless ``q.T @ q`` is the identity within ``tol``."""
    q = np.asarray(q, dtype=np.float64)
    gap = frobenius_norm(q.T @ q - np.eye(q.shape[1]))
    if gap > tol:
        raise NotOrthonormalError(f"{name} columns are not orthonormal (||Q^T Q - I||_F = {gap:.3e})")


def check_orthonormal_rows(s, tol=1e-8, name="matrix"):
    check_orthonormal_columns(np.asarray(s).T, tol, name)


def complete_orthonormal(basis, ncols):
    """Extend orthonormal columns ``basis`` (m×b) to ``ncols`` orthonormal columns.

    New columns come from Gram-Schmidt on ``e_1, e_2, ...`` in order; a
    standard basis vector is kept when its residual norm exceeds 1e-3, which
    always yields enough columns for ``m < 1e6``.
    """
    basis = np.asarray(basis, dtype=np.float64)
    m, b = basis.shape
    if ncols > m:
        raise ShapeError(f"cannot hold {ncols} orthonormal columns in R^{m}")
    if b >= ncols:
        return basis[:, :ncols].copy()
    out = np.zeros((m, ncols))
    out[:, :b] = basis
    filled = b
    for j in range(m):
        if filled == ncols:
            break
        cur = out[:, :filled]
        x = -cur[j, :].copy()
        # x = e_j - cur @ cur.T @ e_j, then a second pass for orthogonality
        vec = cur @ x
        vec[j] += 1.0
        vec -= cur @ (cur.T @ vec)
        nrm = np.linalg.norm(vec)
        if nrm > 1e-3:
            out[:, filled] = vec / nrm
            filled += 1
    if filled < ncols:  # pragma: no cover - unreachable for m < 1e6
        raise ConvergenceError("orthonormal completion failed")
    return out


def _canonical_signs(u, v=None):
    idx = np.argmax(np.abs(u), axis=0)
    flip = u[idx, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    if v is not None:
        v[:, flip] *= -1.0


def _canonicalize_svd(u, s, v, shape):
    order = np.argsort(-s, kind="stable")
    u, s, v = u[:, order], s[order].copy(), v[:, order]
    m, n = shape
    cut = max(m, n) * _EPS * (s[0] if s.size else 0.0)
    nonzero = int(np.count_nonzero(s > cut))
    if nonzero < s.size:
        s[nonzero:] = 0.0
        u = complete_orthonormal(u[:, :nonzero], s.size)
        v = complete_orthonormal(v[:, :nonzero], s.size)
    u = np.ascontiguousarray(u)
    v = np.ascontiguousarray(v)
    _canonical_signs(u, v)
    # adding 0.0 turns -0.0 into +0.0 so equal inputs give equal bytes
    return SvdFactors(u + 0.0, s + 0.0, v + 0.0)


def qr_thin(a):
    """Householder QR with nonnegative ``diag(R)``.

    For ``m >= n`` returns ``q`` m×n and upper triangular ``r`` n×n. Wide
    inputs are accepted as well and give ``q`` m×m and trapezoidal ``r`` m×n.
    Zero or dependent columns leave zeros on the diagonal of ``r``; ``q``
    stays orthonormal because skipped reflections act as the identity.
    """
    a = as_matrix(a)
    m, n = a.shape
    p = min(m, n)
    r = a.copy()
    reflectors = []
    for j in range(p):
        x = r[j:, j]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        # reflect onto -sign(x0)*||x|| e1 to avoid cancellation
        v[0] += alpha if x[0] >= 0 else -alpha
        v /= np.linalg.norm(v)
        r[j:, j:] -= 2.0 * np.outer(v, v @ r[j:, j:])
        r[j + 1:, j] = 0.0
        reflectors.append(v)
    q = np.eye(m, p)
    for j in range(p - 1, -1, -1):
        v = reflectors[j]
        if v is not None:
            q[j:, :] -= 2.0 * np.outer(v, v @ q[j:, :])
    r = np.triu(r[:p, :])
    neg = np.diag(r) < 0
    r[neg, :] *= -1.0
    q[:, neg] *= -1.0
    return QrFactors(q + 0.0, r + 0.0)


def _bidiagonalize(a):
    """Householder bidiagonalization of a tall matrix: ``a = ub @ b @ vb.T``."""
    m, n = a.shape
    b = a.copy()
    left, right = [], []
    for j in range(n):
        x = b[j:, j]
        alpha = np.linalg.norm(x)
        if alpha > 0.0:
            v = x.copy()
            v[0] += alpha if x[0] >= 0 else -alpha
            v /= np.linalg.norm(v)
            b[j:, j:] -= 2.0 * np.outer(v, v @ b[j:, j:])
            left.append(v)
        else:
            left.append(None)
        if j < n - 2:
            x = b[j, j + 1:]
            alpha = np.linalg.norm(x)
            if alpha > 0.0:
                w = x.copy()
                w[0] += alpha if x[0] >= 0 else -alpha
                w /= np.linalg.norm(w)
                b[j:, j + 1:] -= 2.0 * np.outer(b[j:, j + 1:] @ w, w)
                right.append(w)
            else:
                right.append(None)
    ub = np.eye(m, n)
    for j in range(n - 1, -1, -1):
        v = left[j]
        if v is not None:
            ub[j:, :] -= 2.0 * np.outer(v, v @ ub[j:, :])
    vb = np.eye(n)
    for j in range(len(right) - 1, -1, -1):
        w = right[j]
        if w is not None:
            vb[j + 1:, :] -= 2.0 * np.outer(w, w @ vb[j + 1:, :])
    return ub, np.triu(np.tril(b[:n, :], 1)), vb


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0, a
    r = np.hypot(a, b)
    return a / r, b / r, r


def _rotate_cols(x, i, j, c, s):
    xi = x[:, i].copy()
    x[:, i] = c * xi + s * x[:, j]
    x[:, j] = -s * xi + c * x[:, j]


def _rotate_rows(x, i, j, c, s):
    xi = x[i, :].copy()
    x[i, :] = c * xi + s * x[j, :]
    x[j, :] = -s * xi + c * x[j, :]


def _golub_kahan_step(b, u, v, p, q):
    """One implicit Wilkinson-shift QR sweep on the unreduced block ``b[p:q+1, p:q+1]``."""
    d = np.diag(b)
    t22 = d[q] ** 2 + b[q - 1, q] ** 2
    t11 = d[q - 1] ** 2 + (b[q - 2, q - 1] ** 2 if q - 1 > p else 0.0)
    t12 = d[q - 1] * b[q - 1, q]
    delta = 0.5 * (t11 - t22)
    denom = delta + np.copysign(np.hypot(delta, t12), delta if delta != 0 else 1.0)
    mu = t22 - (t12 * t12) / denom if denom != 0 else t22
    y = d[p] ** 2 - mu
    z = d[p] * b[p, p + 1]
    for k in range(p, q):
        c, s, _ = _givens(y, z)
        _rotate_cols(b, k, k + 1, c, s)
        _rotate_cols(v, k, k + 1, c, s)
        if k > p:
            b[k - 1, k + 1] = 0.0
        c, s, _ = _givens(b[k, k], b[k + 1, k])
        _rotate_rows(b, k, k + 1, c, s)
        _rotate_cols(u, k, k + 1, c, s)
        b[k + 1, k] = 0.0
        if k < q - 1:
            y, z = b[k, k + 1], b[k, k + 2]


def golub_kahan_svd(a, tol=1e-14, max_sweeps=None):
    """Uncanonicalized thin SVD by Golub-Kahan bidiagonalization and implicit QR.

    Off-diagonal entries below ``tol * ||B||_F`` are deflated; at most
    ``max_sweeps`` (default ``100 * min(m, n)``) QR sweeps are attempted.
    Returns ``(u, s, v)`` with nonnegative but unsorted ``s``.
    """
    a = as_matrix(a)
    if a.shape[0] < a.shape[1]:
        v, s, u = golub_kahan_svd(a.T, tol, max_sweeps)
        return u, s, v
    m, n = a.shape
    ub, b, vb = _bidiagonalize(a)
    small = tol * max(frobenius_norm(b), np.finfo(np.float64).tiny)
    if max_sweeps is None:
        max_sweeps = 100 * n
    sweeps = 0
    while True:
        for i in range(n - 1):
            if abs(b[i, i + 1]) <= small:
                b[i, i + 1] = 0.0
        for i in range(n):
            if abs(b[i, i]) <= small:
                b[i, i] = 0.0
        q = n - 1
        while q > 0 and b[q - 1, q] == 0.0:
            q -= 1
        if q == 0:
            break
        p = q - 1
        while p > 0 and b[p - 1, p] != 0.0:
            p -= 1
        zero_diag = [i for i in range(p, q + 1) if b[i, i] == 0.0]
        if zero_diag:
            i = zero_diag[0]
            if i < q:
                # chase b[i, i+1] to the right with left rotations
                for j in range(i + 1, q + 1):
                    c, s, _ = _givens(b[j, j], b[i, j])
                    _rotate_rows(b, j, i, c, s)
                    _rotate_cols(ub, j, i, c, s)
                    b[i, j] = 0.0
            else:
                # chase b[q-1, q] upward with right rotations
                for j in range(q - 1, p - 1, -1):
                    c, s, _ = _givens(b[j, j], b[j, q])
                    _rotate_cols(b, j, q, c, s)
                    _rotate_cols(vb, j, q, c, s)
                    b[j, q] = 0.0
            continue
        sweeps += 1
        if sweeps > max_sweeps:
            raise ConvergenceError(f"bidiagonal QR did not converge in {max_sweeps} sweeps")
        _golub_kahan_step(b, ub, vb, p, q)
    s = np.diag(b).copy()
    neg = s < 0
    s[neg] *= -1.0
    vb[:, neg] *= -1.0
    return ub, s, vb


def svd_full(a, method="lapack"):
    """Canonical thin SVD with ``p = min(m, n)`` triplets.

    ``method`` is ``"lapack"`` or ``"golub_kahan"``; both are canonicalized
    identically (see the module docstring).
    """
    a = as_matrix(a)
    if method == "lapack":
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        v = vt.T
    elif method == "golub_kahan":
        u, s, v = golub_kahan_svd(a)
    else:
        raise ValueError(f"unknown SVD method {method!r}")
    return _canonicalize_svd(u, s, v, a.shape)


def svd_truncated(a, r, method="lapack"):
    """Top-``r`` triplets of :func:`svd_full`, the Eckart-Young optimal rank-``r`` factors."""
    a = as_matrix(a)
    if not 1 <= r <= min(a.shape):
        raise ShapeError(f"rank {r} out of range for a {a.shape[0]}x{a.shape[1]} matrix")
    f = svd_full(a, method)
    return SvdFactors(f.u[:, :r].copy(), f.s[:r].copy(), f.v[:, :r].copy())


def top_left_singular_vectors(a, k):
    """Leading ``k`` left singular vectors of ``a`` via the Gram matrix ``a a^T``.

    Cheaper than a full SVD when ``a`` is wide and only a few vectors are
    needed. Directions with squared singular value at or below
    ``max(m, n) * eps * sigma_max^2`` are replaced by the standard-basis
    completion; signs follow the same convention as :func:`svd_full`.
    """
    a = as_matrix(a)
    m = a.shape[0]
    if not 1 <= k <= m:
        raise ShapeError(f"cannot take {k} left singular vectors of a {m}-row matrix")
    gram = a @ a.T
    w, vecs = np.linalg.eigh(gram)
    w = w[::-1][:k]
    u = np.ascontiguousarray(vecs[:, ::-1][:, :k])
    cut = max(a.shape) * _EPS * max(w[0], 0.0)
    nonzero = int(np.count_nonzero(w > cut))
    if nonzero < k:
        u = complete_orthonormal(u[:, :nonzero], k)
    _canonical_signs(u)
    return u + 0.0


def subspace_distance(u_k, s, tol=1e-8):
    """Squared Frobenius distance ``||U U^T - S^T S||_F^2`` between two projectors.

    ``u_k`` (m×k) must have orthonormal columns and ``s`` (k'×m) orthonormal
    rows. The result is zero exactly when both span the same subspace.
    """
    u_k = as_matrix(u_k, "u_k")
    s = as_matrix(s, "s")
    if u_k.shape[0] != s.shape[1]:
        raise ShapeError(f"u_k is {u_k.shape[0]}x{u_k.shape[1]} but s is {s.shape[0]}x{s.shape[1]}")
    check_orthonormal_columns(u_k, tol, "u_k")
    check_orthonormal_rows(s, tol, "s")
    diff = u_k @ u_k.T - s.T @ s
    return float(np.sum(diff * diff))
