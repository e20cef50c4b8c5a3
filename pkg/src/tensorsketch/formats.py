"""Little-endian binary formats for tensors (T3B1) and sketches (SKB1, SKP1).

T3B1::

    b"T3B1" | u64 m | u64 n | u64 D | m*n*D f64   (d outermost, then i, then j)

SKB1::

    b"SKB1" | u64 k | u64 m | k*m f64 (row-major) | u8 orthonormal | u8 provenance

SKP1::

    b"SKP1" | SKB1 record (S) | SKB1 record (W)
"""

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .sketch import Provenance, Sketch, SketchPair
from .tensor import Tensor3

T3B_MAGIC = b"T3B1"
SKB_MAGIC = b"SKB1"
SKP_MAGIC = b"SKP1"

_U64 = struct.Struct("<Q")
_F64 = np.dtype("<f8")
_MAX_PAYLOAD = 1 << 62


def _read_dims(buf, offset, count):
    dims = []
    for i in range(count):
        pos = offset + 8 * i
        if len(buf) < pos + 8:
            raise FormatError("truncated header", len(buf))
        (value,) = _U64.unpack_from(buf, pos)
        if value == 0:
            raise FormatError("dimension must be positive", pos)
        dims.append(value)
    return dims, offset + 8 * count


def _read_values(buf, offset, count, dims_offset):
    nbytes = 8 * count
    if count > _MAX_PAYLOAD // 8:
        raise FormatError("dimension overflow", dims_offset)
    if len(buf) < offset + nbytes:
        raise FormatError(f"truncated payload: expected {count} values", len(buf))
    values = np.frombuffer(buf, dtype=_F64, count=count, offset=offset).astype(np.float64)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise FormatError("non-finite value", offset + 8 * bad)
    return values, offset + nbytes


def _check_magic(buf, magic, offset=0):
    got = bytes(buf[offset:offset + 4])
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}", offset)


def _check_end(buf, offset):
    if len(buf) != offset:
        raise FormatError(f"{len(buf) - offset} unexpected trailing bytes", offset)


def encode_t3b(t):
    x = t.slices
    d, m, n = x.shape
    return T3B_MAGIC + _U64.pack(m) + _U64.pack(n) + _U64.pack(d) + x.astype(_F64).tobytes()


def decode_t3b(buf):
    _check_magic(buf, T3B_MAGIC)
    (m, n, d), pos = _read_dims(buf, 4, 3)
    values, end = _read_values(buf, pos, m * n * d, 4)
    _check_end(buf, end)
    return Tensor3(values.reshape(d, m, n))


def _encode_skb(sketch):
    k, m = sketch.s.shape
    return (
        SKB_MAGIC
        + _U64.pack(k)
        + _U64.pack(m)
        + sketch.s.astype(_F64).tobytes()
        + bytes([1 if sketch.row_orthonormal else 0, sketch.provenance.code])
    )


def _decode_skb(buf, offset):
    _check_magic(buf, SKB_MAGIC, offset)
    (k, m), pos = _read_dims(buf, offset + 4, 2)
    values, pos = _read_values(buf, pos, k * m, offset + 4)
    if len(buf) < pos + 2:
        raise FormatError("truncated sketch trailer", len(buf))
    flag, code = buf[pos], buf[pos + 1]
    if flag not in (0, 1):
        raise FormatError(f"orthonormal flag must be 0 or 1, got {flag}", pos)
    try:
        provenance = Provenance.from_code(code)
    except ValueError:
        raise FormatError(f"unknown provenance code {code}", pos + 1) from None
    s = values.reshape(k, m)
    if flag:
        gap = np.linalg.norm(s @ s.T - np.eye(k))
        if gap > 1e-8:
            raise FormatError("sketch flagged orthonormal but its rows are not", pos)
    return Sketch(s, bool(flag), provenance), pos + 2


def encode_skb(sketch):
    return _encode_skb(sketch)


def decode_skb(buf):
    sketch, end = _decode_skb(buf, 0)
    _check_end(buf, end)
    return sketch


def encode_skp(pair):
    return SKP_MAGIC + _encode_skb(pair.s) + _encode_skb(pair.w)


def decode_skp(buf):
    _check_magic(buf, SKP_MAGIC)
    s, pos = _decode_skb(buf, 4)
    w, pos = _decode_skb(buf, pos)
    _check_end(buf, pos)
    return SketchPair(s, w)


def save_t3b(t, path):
    Path(path).write_bytes(encode_t3b(t))


def load_t3b(path):
    return decode_t3b(Path(path).read_bytes())


def save_sketch(sketch, path):
    Path(path).write_bytes(encode_skb(sketch))


def load_sketch(path):
    return decode_skb(Path(path).read_bytes())


def save_sketch_pair(pair, path):
    Path(path).write_bytes(encode_skp(pair))


def load_sketch_pair(path):
    return decode_skp(Path(path).read_bytes())
