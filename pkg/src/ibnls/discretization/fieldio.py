"""Binary field dumps.

Layout (little endian): magic ``IBNLSFLD``, uint32 version, uint8 grid kind
(0 Cartesian, 1 radial fd2, 2 radial spectral), uint32 dimension, uint32 axis
count followed by that many uint32 sizes, the same number of float64 extents
(half width L per axis, or the radius R = M dr), then the samples as
interleaved float64 (re, im) pairs in row-major order.
"""
from __future__ import annotations

import struct

import numpy as np

from .field import Field
from .grids import CartesianGrid, RadialGrid

MAGIC = b"IBNLSFLD"
VERSION = 1
_KINDS = {("cartesian", None): 0, ("radial", "fd2"): 1, ("radial", "spectral"): 2}


def _header(grid) -> bytes:
    if grid.kind == "cartesian":
        kind = 0
        sizes = [grid.n] * grid.dim
        extents = [grid.L] * grid.dim
    else:
        kind = _KINDS[("radial", grid.scheme)]
        sizes = [grid.M]
        extents = [grid.extent]
    out = MAGIC + struct.pack("<IBII", VERSION, kind, grid.dim, len(sizes))
    out += struct.pack(f"<{len(sizes)}I", *sizes)
    out += struct.pack(f"<{len(extents)}d", *extents)
    return out


def dumps(u: Field) -> bytes:
    data = np.empty(u.values.shape + (2,), dtype="<f8")
    data[..., 0] = np.real(u.values)
    data[..., 1] = np.imag(u.values) if np.iscomplexobj(u.values) else 0.0
    return _header(u.grid) + np.ascontiguousarray(data).tobytes()


def loads(buf: bytes, singular: str = "zeta") -> Field:
    if buf[:8] != MAGIC:
        raise ValueError("not an IBNLSFLD dump")
    off = 8
    version, kind, dim, naxes = struct.unpack_from("<IBII", buf, off)
    off += struct.calcsize("<IBII")
    if version != VERSION:
        raise ValueError(f"unsupported dump version {version}")
    sizes = struct.unpack_from(f"<{naxes}I", buf, off)
    off += 4 * naxes
    extents = struct.unpack_from(f"<{naxes}d", buf, off)
    off += 8 * naxes
    if kind == 0:
        grid = CartesianGrid(dim, sizes[0], extents[0])
    elif kind in (1, 2):
        M = sizes[0]
        grid = RadialGrid(dim, M, extents[0] / M, "fd2" if kind == 1 else "spectral", singular)
    else:
        raise ValueError(f"unknown grid kind byte {kind}")
    n = int(np.prod(grid.shape))
    data = np.frombuffer(buf, dtype="<f8", count=2 * n, offset=off).reshape(grid.shape + (2,))
    vals = data[..., 0] + 1j * data[..., 1]
    return Field(grid, vals)


def save(u: Field, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(u))


def load(path, **kw) -> Field:
    with open(path, "rb") as fh:
        return loads(fh.read(), **kw)
