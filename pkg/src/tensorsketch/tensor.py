"""Third-order tensors of stacked matrices, unfoldings and n-mode products.

A :class:`Tensor3` of size m×n×D stores its D frontal slices ``A_1 .. A_D``
(each m×n) slice-major and row-major within a slice, i.e. as a C-ordered
array of shape ``(D, m, n)``. Unfoldings use the block layout

* mode 1: ``[A_1 | A_2 | ... | A_D]``            (m × nD)
* mode 2: ``[A_1^T | A_2^T | ... | A_D^T]``      (n × mD)
* mode 3: row ``d`` is ``A_d`` flattened row-major (D × mn)
"""

import numpy as np

from .errors import ShapeError
from .linalg import as_matrix, frobenius_norm


class Tensor3:
    """An m×n×D tensor viewed as a stack of D m×n matrices."""

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ShapeError(f"expected a (D, m, n) array with positive sizes, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor contains NaN or Inf entries")
        self._data = arr

    @classmethod
    def from_slices(cls, slices):
        slices = [as_matrix(s, f"slice {i}") for i, s in enumerate(slices)]
        if not slices:
            raise ShapeError("cannot build a tensor from an empty list of slices")
        shape = slices[0].shape
        for i, s in enumerate(slices):
            if s.shape != shape:
                raise ShapeError(f"slice {i} is {s.shape[0]}x{s.shape[1]}, expected {shape[0]}x{shape[1]}")
        return cls(np.stack(slices))

    @property
    def m(self):
        return self._data.shape[1]

    @property
    def n(self):
        return self._data.shape[2]

    @property
    def d(self):
        return self._data.shape[0]

    @property
    def shape(self):
        return (self.m, self.n, self.d)

    @property
    def slices(self):
        """Read-only ``(D, m, n)`` view of the data."""
        view = self._data.view()
        view.flags.writeable = False
        return view

    def slice(self, index):
        return self._data[index].copy()

    def __iter__(self):
        for i in range(self.d):
            yield self.slice(i)

    def __len__(self):
        return self.d

    def __eq__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        return self._data.shape == other._data.shape and np.array_equal(self._data, other._data)

    def __repr__(self):
        return f"Tensor3(m={self.m}, n={self.n}, d={self.d})"

    def select(self, indices):
        """Tensor made of the slices at ``indices``, in the given order."""
        return Tensor3(self._data[np.asarray(indices, dtype=np.intp)])

    def unfold(self, mode):
        return unfold_mode(self, mode)

    def norm(self):
        return frobenius_norm_tensor(self)


def _check_mode(mode):
    if mode not in (1, 2, 3):
        raise ShapeError(f"mode must be 1, 2 or 3, got {mode!r}")


def unfold_mode(t, mode):
    """Mode-``mode`` matricization in the block layout described in the module docstring."""
    _check_mode(mode)
    x = t.slices
    d, m, n = x.shape
    if mode == 1:
        return np.ascontiguousarray(x.transpose(1, 0, 2).reshape(m, d * n))
    if mode == 2:
        return np.ascontiguousarray(x.transpose(2, 0, 1).reshape(n, d * m))
    return x.reshape(d, m * n).copy()


def fold_mode(mat, mode, shape):
    """Inverse of :func:`unfold_mode` for a target ``shape = (m, n, d)``."""
    _check_mode(mode)
    m, n, d = shape
    mat = np.asarray(mat, dtype=np.float64)
    expected = {1: (m, n * d), 2: (n, m * d), 3: (d, m * n)}[mode]
    if mat.shape != expected:
        raise ShapeError(f"cannot fold a {mat.shape} matrix into mode-{mode} of {m}x{n}x{d}")
    if mode == 1:
        data = mat.reshape(m, d, n).transpose(1, 0, 2)
    elif mode == 2:
        data = mat.reshape(n, d, m).transpose(1, 2, 0)
    else:
        data = mat.reshape(d, m, n)
    return Tensor3(data)


def nmode_product(t, mat, mode):
    """``t ×_mode mat``: contract mode ``mode`` of ``t`` with the columns of ``mat``.

    Computed as ``fold(mat @ unfold(t, mode))`` so that the unfolding
    identity holds exactly.
    """
    _check_mode(mode)
    mat = as_matrix(mat)
    size = t.shape[mode - 1]
    if mat.shape[1] != size:
        raise ShapeError(
            f"mode-{mode} product needs a matrix with {size} columns, got {mat.shape[0]}x{mat.shape[1]}"
        )
    shape = list(t.shape)
    shape[mode - 1] = mat.shape[0]
    return fold_mode(mat @ unfold_mode(t, mode), mode, tuple(shape))


def frobenius_norm_tensor(t):
    return frobenius_norm(t.slices)
