"""File formats: QSW1 binary, CSV, 16-bit graymaps, PPM rasters, key=value config.

QSW1 layout (little-endian)::

    b"QSW1"  u32 version  u32 rank
    rank x { u64 count  f64 start  f64 step }
    f64 samples, 4 per point (r, i, j, k), row-major, last index fastest

Rank 2 holds a :class:`QField`, rank 4 a :class:`StockwellField` with
dimensions ``(xi1, xi2, b1, b2)``.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .grid import Axis, QField
from .stockwell import StockwellField

__all__ = [
    "FormatError",
    "MAGIC",
    "VERSION",
    "write_qsw",
    "read_qsw",
    "write_csv",
    "read_csv",
    "write_field",
    "read_field",
    "write_pgm",
    "read_pgm",
    "read_ppm",
    "read_config",
]

MAGIC = b"QSW1"
VERSION = 1
_DIM = struct.Struct("<Qdd")
_HEAD = struct.Struct("<4sII")

Volume = Union[QField, StockwellField]


class FormatError(ValueError):
    """Malformed or unsupported input file."""


def _dims_of(obj: Volume) -> list[Axis]:
    if isinstance(obj, StockwellField):
        return [*obj.xi_axes, *obj.b_axes]
    if isinstance(obj, QField):
        return [obj.axis_x, obj.axis_y]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _data_of(obj: Volume) -> np.ndarray:
    return obj.coeffs if isinstance(obj, StockwellField) else obj.samples


def _from_dims(dims: list[Axis], data: np.ndarray) -> Volume:
    if len(dims) == 2:
        return QField(dims[0], dims[1], data)
    if len(dims) == 4:
        return StockwellField((dims[0], dims[1]), (dims[2], dims[3]), data)
    raise FormatError(f"unsupported rank {len(dims)}")


def write_qsw(path, obj: Volume) -> None:
    dims = _dims_of(obj)
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(dims)))
        for ax in dims:
            fh.write(_DIM.pack(ax.count, ax.start, ax.step))
        fh.write(np.ascontiguousarray(_data_of(obj), dtype="<f8").tobytes())


def read_qsw(path) -> Volume:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size or raw[:4] != MAGIC:
        raise FormatError(f"{path}: not a QSW1 file")
    _, version, rank = _HEAD.unpack_from(raw, 0)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if rank not in (2, 4):
        raise FormatError(f"{path}: unsupported rank {rank}")
    offset = _HEAD.size
    dims = []
    for _ in range(rank):
        if offset + _DIM.size > len(raw):
            raise FormatError(f"{path}: truncated header")
        count, start, step = _DIM.unpack_from(raw, offset)
        offset += _DIM.size
        try:
            dims.append(Axis(count, start, step))
        except ValueError as exc:
            raise FormatError(f"{path}: bad axis ({exc})") from None
    shape = tuple(ax.count for ax in dims) + (4,)
    expected = int(np.prod(shape)) * 8
    if len(raw) - offset != expected:
        raise FormatError(f"{path}: expected {expected} data bytes, found {len(raw) - offset}")
    data = np.frombuffer(raw, dtype="<f8", offset=offset).reshape(shape).astype(float)
    return _from_dims(dims, data)


def _coord_names(rank: int) -> list[str]:
    return ["x1", "x2"] if rank == 2 else ["xi1", "xi2", "b1", "b2"]


def write_csv(path, obj: Volume) -> None:
    dims = _dims_of(obj)
    data = _data_of(obj)
    grids = np.meshgrid(*[ax.points for ax in dims], indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=-1)
    values = data.reshape(-1, 4)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_coord_names(len(dims)) + ["qr", "qi", "qj", "qk"]) + "\n")
        for c, v in zip(coords, values):
            fh.write(",".join("%.17g" % x for x in (*c, *v)) + "\n")


def _axis_from_values(values: np.ndarray, name: str) -> Axis:
    uniq = np.unique(values)
    if uniq.size < 2:
        raise FormatError(f"column {name} needs at least two distinct values")
    step = (uniq[-1] - uniq[0]) / (uniq.size - 1)
    if np.max(np.abs(np.diff(uniq) - step)) > 1e-9 * max(1.0, abs(step)):
        raise FormatError(f"column {name} is not uniformly spaced")
    return Axis(uniq.size, float(uniq[0]), float(step))


def read_csv(path) -> Volume:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    rank = len(header) - 4
    if rank not in (2, 4) or header != _coord_names(rank) + ["qr", "qi", "qj", "qk"]:
        raise FormatError(f"{path}: unexpected header {header}")
    try:
        table = np.array(rows, dtype=float)
    except ValueError:
        raise FormatError(f"{path}: non-numeric entry") from None
    if table.ndim != 2 or table.shape[1] != rank + 4:
        raise FormatError(f"{path}: ragged rows")
    dims = [_axis_from_values(table[:, k], header[k]) for k in range(rank)]
    shape = tuple(ax.count for ax in dims)
    if table.shape[0] != int(np.prod(shape)):
        raise FormatError(f"{path}: expected {int(np.prod(shape))} rows, found {table.shape[0]}")
    idx = [np.rint((table[:, k] - dims[k].start) / dims[k].step).astype(int) for k in range(rank)]
    data = np.zeros(shape + (4,))
    data[tuple(idx)] = table[:, rank:]
    return _from_dims(dims, data)


def write_field(path, obj: Volume, fmt: str | None = None) -> None:
    fmt = fmt or ("csv" if str(path).lower().endswith(".csv") else "qsw")
    if fmt == "csv":
        write_csv(path, obj)
    elif fmt == "qsw":
        write_qsw(path, obj)
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def read_field(path) -> Volume:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_qsw(path)
    return read_csv(path)


def write_pgm(path, values: np.ndarray) -> tuple[float, float]:
    """Write a 2-D array as a 16-bit binary graymap plus a ``.minmax.txt`` sidecar.

    Rows of the image are the first array index.  Returns ``(min, max)``.
    """
    v = np.asarray(values, float)
    if v.ndim != 2:
        raise ValueError("graymap export needs a 2-D array")
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    scaled = np.zeros(v.shape) if span == 0 else (v - lo) / span * 65535.0
    pixels = np.rint(scaled).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{v.shape[1]} {v.shape[0]}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())
    Path(str(path) + ".minmax.txt").write_text(f"min = {lo!r}\nmax = {hi!r}\n")
    return lo, hi


def _pnm_tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens of a PNM file and the offset after them."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PNM header")
        tokens.append(raw[start:pos])
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read a binary graymap (8 or 16 bit) as integers."""
    raw = Path(path).read_bytes()
    (magic, w, h, maxval), off = _pnm_tokens(raw, 4)
    if magic != b"P5":
        raise FormatError(f"{path}: not a binary graymap")
    w, h, maxval = int(w), int(h), int(maxval)
    dtype = np.dtype(">u2" if maxval > 255 else "u1")
    if len(raw) - off < w * h * dtype.itemsize:
        raise FormatError(f"{path}: truncated raster")
    return np.frombuffer(raw, dtype=dtype, count=w * h, offset=off).reshape(h, w).astype(int)


def read_ppm(path) -> np.ndarray:
    """Read a P3/P6 colour raster as floats in [0, 1], shape ``(rows, cols, 3)``."""
    raw = Path(path).read_bytes()
    (magic, w, h, maxval), off = _pnm_tokens(raw, 4)
    w, h, maxval = int(w), int(h), int(maxval)
    if magic == b"P6":
        dtype = np.dtype(">u2" if maxval > 255 else "u1")
        if len(raw) - off < w * h * 3 * dtype.itemsize:
            raise FormatError(f"{path}: truncated raster")
        pix = np.frombuffer(raw, dtype=dtype, count=w * h * 3, offset=off)
    elif magic == b"P3":
        pix = np.array(raw[off:].split()[: w * h * 3], dtype=float)
    else:
        raise FormatError(f"{path}: not a PPM raster")
    if pix.size != w * h * 3:
        raise FormatError(f"{path}: truncated raster")
    return pix.reshape(h, w, 3).astype(float) / maxval


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out
