"""Matrix file I/O.

Two on-disk formats:

* CSV: one matrix row per line, comma-separated decimal floats. Values are
  written with ``repr`` so a read-back is bit-exact.
* binary: 8-byte magic ``CRUTVMAT``, two little-endian uint64 dimensions
  (rows, cols), then the entries as little-endian float64 in row-major
  order.

``read_matrix`` sniffs the magic bytes, so either format can be read
without knowing which one was written.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .dense import as_matrix

MAGIC = b"CRUTVMAT"
FORMATS = ("csv", "bin")


def write_matrix_csv(path, a) -> None:
    a = as_matrix(a, "a", require_finite=False)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in a:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno} is not numeric CSV") from exc
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ValueError(
                    f"{path}: line {lineno} has {len(vals)} fields, expected {width}"
                )
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    return np.array(rows, dtype=float)


def write_matrix_bin(path, a) -> None:
    a = as_matrix(a, "a", require_finite=False)
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", rows, cols))
        fh.write(np.ascontiguousarray(a).astype("<f8").tobytes())


def read_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        header = fh.read(16)
        if len(header) != 16:
            raise ValueError(f"{path}: truncated header")
        rows, cols = struct.unpack("<QQ", header)
        if rows < 1 or cols < 1 or rows * cols > 10**9:
            raise ValueError(f"{path}: implausible dimensions {rows}x{cols}")
        data = fh.read(8 * rows * cols)
        if len(data) != 8 * rows * cols:
            raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(data, dtype="<f8").astype(float).reshape(rows, cols)


def write_matrix(path, a, fmt: str = "csv") -> None:
    if fmt == "csv":
        write_matrix_csv(path, a)
    elif fmt == "bin":
        write_matrix_bin(path, a)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}, expected one of {FORMATS}")


def read_matrix(path) -> np.ndarray:
    """Read a matrix in either supported format, sniffing the magic bytes."""
    p = Path(path)
    with open(p, "rb") as fh:
        head = fh.read(8)
    if head == MAGIC:
        return read_matrix_bin(p)
    return read_matrix_csv(p)
