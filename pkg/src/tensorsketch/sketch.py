"""Sketching matrices: trained from a tensor of training slices, or random.

``train_tucker1`` solves the mode-1 Tucker1 problem in closed form: the
row-orthonormal ``S`` (k×m) maximizing ``||S A_(1)||_F`` is the transpose of
the top-k left singular vectors of the mode-1 unfolding. ``train_tucker2_hooi``
fits a Tucker2 model over modes 1 and 2 by higher-order orthogonal iteration
and returns the pair ``(S, W)``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .linalg import (
    as_matrix,
    check_orthonormal_rows,
    complete_orthonormal,
    frobenius_norm,
    qr_thin,
    svd_full,
    top_left_singular_vectors,
)
from .tensor import Tensor3, unfold_mode


class Provenance(enum.Enum):
    TUCKER1 = "tucker1"
    TUCKER2_LEFT = "tucker2_left"
    RANDOM_SIGN = "random_sign"
    RANDOM_GAUSSIAN = "random_gaussian"
    TUCKER2_RIGHT = "tucker2_right"
    CUSTOM = "custom"

    @property
    def code(self):
        return _PROVENANCE_CODES[self]

    @classmethod
    def from_code(cls, code):
        for prov, c in _PROVENANCE_CODES.items():
            if c == code:
                return prov
        raise ValueError(f"unknown provenance code {code}")


_PROVENANCE_CODES = {
    Provenance.TUCKER1: 0,
    Provenance.TUCKER2_LEFT: 1,
    Provenance.RANDOM_SIGN: 2,
    Provenance.RANDOM_GAUSSIAN: 3,
    Provenance.TUCKER2_RIGHT: 4,
    Provenance.CUSTOM: 5,
}


@dataclass(frozen=True, eq=False)
class Sketch:
    """A k×m sketching matrix.

    ``n_completed`` counts trailing rows that were filled by orthonormal
    completion because the training data had lower rank than ``k``.
    """

    s: np.ndarray
    row_orthonormal: bool
    provenance: Provenance
    n_completed: int = 0

    def __post_init__(self):
        s = as_matrix(self.s, "sketch")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if self.row_orthonormal:
            check_orthonormal_rows(s, 1e-8, "sketch")

    @classmethod
    def from_matrix(cls, s, provenance=Provenance.CUSTOM):
        """Wrap a plain matrix, flagging it row-orthonormal when ``s s^T = I`` within 1e-8."""
        s = as_matrix(s, "sketch")
        gap = frobenius_norm(s @ s.T - np.eye(s.shape[0]))
        return cls(s, bool(gap <= 1e-8), provenance)

    @property
    def k(self):
        return self.s.shape[0]

    @property
    def m(self):
        return self.s.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Sketch):
            return NotImplemented
        return (
            self.s.shape == other.s.shape
            and np.array_equal(self.s, other.s)
            and self.row_orthonormal == other.row_orthonormal
            and self.provenance == other.provenance
        )


def as_sketch(s):
    return s if isinstance(s, Sketch) else Sketch.from_matrix(s)


@dataclass(frozen=True)
class SketchPair:
    """Left sketch ``s`` (k×m) and right sketch ``w`` (l×n)."""

    s: Sketch
    w: Sketch


@dataclass(frozen=True)
class HooiConfig:
    """Settings for :func:`train_tucker2_hooi`.

    With ``init="provided"``, ``initial_w`` (l×n, orthonormal rows) seeds the
    mode-2 factor. The mode-1 factor needs no seed: each sweep starts by
    recomputing it from the current mode-2 factor.
    """

    max_iters: int = 100
    rel_tol: float = 1e-8
    init: str = "hosvd"
    initial_w: np.ndarray = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.init not in ("hosvd", "provided"):
            raise ValueError(f"init must be 'hosvd' or 'provided', got {self.init!r}")
        if self.init == "provided" and self.initial_w is None:
            raise ValueError("init='provided' requires initial_w")


@dataclass
class HooiDiagnostics:
    residual_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _check_size(name, value, upper, upper_name):
    if not isinstance(value, (int, np.integer)) or not 1 <= value <= upper:
        raise ShapeError(f"{name}={value!r} must be an integer in [1, {upper_name}={upper}]")


def train_tucker1(t, k):
    """Closed-form mode-1 Tucker1 sketch: top-k left singular vectors of ``A_(1)``, transposed."""
    if not isinstance(t, Tensor3):
        t = Tensor3(t)
    _check_size("k", k, t.m, "m")
    factors = svd_full(unfold_mode(t, 1))
    u = factors.u[:, :k]
    rank = int(np.count_nonzero(factors.s[:k] > 0))
    if u.shape[1] < k:
        u = complete_orthonormal(u, k)
    return Sketch(np.ascontiguousarray(u.T), True, Provenance.TUCKER1, n_completed=k - rank)


def _tucker2_residual(x, s, w, norm_sq):
    # ||A - G x1 S^T x2 W^T||_F with G = A x1 S x2 W. The identity
    # res^2 = ||A||^2 - ||G||^2 loses all accuracy once res^2 nears
    # eps * ||A||^2, so small residuals are formed explicitly.
    core = s @ x @ w.T
    res_sq = norm_sq - float(np.sum(core * core))
    if res_sq > 1e-6 * norm_sq:
        return float(np.sqrt(res_sq))
    return frobenius_norm(x - s.T @ core @ w)


def train_tucker2_hooi(t, k, l, cfg=None):
    """Tucker2 sketches ``(S, W)`` over modes 1 and 2 by higher-order orthogonal iteration.

    Each sweep sets ``S`` from the top-k left singular vectors of the mode-1
    unfolding of ``t ×_2 W`` and then ``W`` from the top-l left singular
    vectors of the mode-2 unfolding of ``t ×_1 S``. Iteration stops when
    ``|res_i - res_{i-1}| / max(1, res_{i-1}) < rel_tol`` or after
    ``max_iters`` sweeps; hitting the limit is reported, not raised.
    """
    if cfg is None:
        cfg = HooiConfig()
    if not isinstance(t, Tensor3):
        t = Tensor3(t)
    _check_size("k", k, t.m, "m")
    _check_size("l", l, t.n, "n")
    x = t.slices
    d, m, n = x.shape
    if cfg.init == "hosvd":
        w = top_left_singular_vectors(unfold_mode(t, 2), l).T
    else:
        w = as_matrix(cfg.initial_w, "initial_w")
        if w.shape != (l, n):
            raise ShapeError(f"initial_w must be {l}x{n}, got {w.shape[0]}x{w.shape[1]}")
        check_orthonormal_rows(w, 1e-8, "initial_w")
    norm_sq = float(np.sum(x * x))
    diag = HooiDiagnostics()
    prev = None
    for it in range(1, cfg.max_iters + 1):
        b = (x @ w.T).transpose(1, 0, 2).reshape(m, d * l)
        s = top_left_singular_vectors(b, k).T
        c = (s @ x).transpose(2, 0, 1).reshape(n, d * k)
        w = top_left_singular_vectors(c, l).T
        res = _tucker2_residual(x, s, w, norm_sq)
        diag.residual_history.append(res)
        diag.iterations = it
        if prev is not None and abs(res - prev) / max(1.0, prev) < cfg.rel_tol:
            diag.converged = True
            break
        prev = res
    pair = SketchPair(
        Sketch(np.ascontiguousarray(s), True, Provenance.TUCKER2_LEFT),
        Sketch(np.ascontiguousarray(w), True, Provenance.TUCKER2_RIGHT),
    )
    return pair, diag


def _rng(seed):
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_sign_sketch(k, m, seed):
    """Sparse sign sketch: one ±1 per column at a uniformly random row."""
    if not 1 <= k <= m:
        raise ShapeError(f"need 1 <= k <= m, got k={k}, m={m}")
    rng = _rng(seed)
    rows = rng.integers(0, k, size=m)
    signs = np.where(rng.integers(0, 2, size=m) == 1, 1.0, -1.0)
    s = np.zeros((k, m))
    s[rows, np.arange(m)] = signs
    return Sketch(s, False, Provenance.RANDOM_SIGN)


def random_gaussian_sketch(k, m, seed):
    """Dense sketch with i.i.d. N(0, 1/k) entries."""
    if not 1 <= k <= m:
        raise ShapeError(f"need 1 <= k <= m, got k={k}, m={m}")
    s = _rng(seed).standard_normal((k, m)) / np.sqrt(k)
    return Sketch(s, False, Provenance.RANDOM_GAUSSIAN)


def orthonormalize(sketch):
    """Row-orthonormal sketch with the same row space (Q factor of ``s^T``)."""
    sketch = as_sketch(sketch)
    if sketch.k > sketch.m:
        raise ShapeError(f"cannot make {sketch.k} rows orthonormal in R^{sketch.m}")
    q = qr_thin(sketch.s.T).q
    return Sketch(np.ascontiguousarray(q.T), True, sketch.provenance)


def random_orthonormal_sketch(k, m, seed):
    """Gaussian sketch orthonormalized by Householder QR."""
    return orthonormalize(random_gaussian_sketch(k, m, seed))
