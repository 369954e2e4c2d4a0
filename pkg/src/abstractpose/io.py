"""Binary image and heatmap files.

PHM1 layout: ``b"PHM1"``, then little-endian uint32 (channels, rows, cols),
then channels*rows*cols little-endian float32 values in row-major order.
"""
from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

PHM_MAGIC = b"PHM1"
_HEADER = struct.Struct("<4sIII")


def heatmap_to_bytes(hmap) -> bytes:
    arr = np.asarray(hmap)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError("heatmaps must be 2-D or 3-D")
    c, h, w = arr.shape
    return _HEADER.pack(PHM_MAGIC, c, h, w) + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def heatmap_from_bytes(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise FormatError("truncated PHM1 header")
    magic, c, h, w = _HEADER.unpack_from(data)
    if magic != PHM_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    body = data[_HEADER.size:]
    if len(body) != 4 * c * h * w:
        raise FormatError(f"PHM1 body has {len(body)} bytes, expected {4 * c * h * w}")
    return np.frombuffer(body, dtype="<f4").reshape(c, h, w).astype(np.float32)


def write_heatmap(path, hmap):
    Path(path).write_bytes(heatmap_to_bytes(hmap))


def read_heatmap(path) -> np.ndarray:
    return heatmap_from_bytes(Path(path).read_bytes())


def write_ppm(path, pixels):
    px = np.asarray(pixels, dtype=np.uint8)
    h, w, _ = px.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + px.tobytes())


def write_pgm(path, gray):
    g = np.asarray(gray, dtype=np.uint8)
    h, w = g.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + g.tobytes())


_PNM = re.compile(rb"(P[56])\s+(\d+)\s+(\d+)\s+(\d+)\s")


def _read_pnm(path, magic):
    data = Path(path).read_bytes()
    m = _PNM.match(data)
    if not m or m.group(1) != magic:
        raise FormatError(f"{path}: not a binary {magic.decode()} file")
    w, h, maxval = int(m.group(2)), int(m.group(3)), int(m.group(4))
    if maxval != 255:
        raise FormatError(f"{path}: only 8-bit images are supported")
    ch = 3 if magic == b"P6" else 1
    body = data[m.end():]
    if len(body) != w * h * ch:
        raise FormatError(f"{path}: pixel data has the wrong size")
    arr = np.frombuffer(body, dtype=np.uint8)
    return arr.reshape(h, w, 3) if ch == 3 else arr.reshape(h, w)


def read_ppm(path) -> np.ndarray:
    return _read_pnm(path, b"P6")


def read_pgm(path) -> np.ndarray:
    return _read_pnm(path, b"P5")


def provenance_to_gray(provenance) -> np.ndarray:
    """Background -> 0, part k -> k + 1."""
    return (np.asarray(provenance, dtype=np.int16) + 1).astype(np.uint8)
