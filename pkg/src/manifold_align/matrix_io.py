"""Feature-matrix container and its two on-disk formats (CSV and MKAF binary)."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"MKAF"
VERSION = 1
_HEADER = struct.Struct("<4sHQQ")


class MatrixFormatError(ValueError):
    """Raised for malformed, empty or non-finite matrix input."""


@dataclass(frozen=True)
class FeatureMatrix:
    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise MatrixFormatError(f"expected a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise MatrixFormatError(f"empty matrix of shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise MatrixFormatError("non-finite value in matrix")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_features(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return self.data.shape == other.data.shape and np.array_equal(self.data, other.data)

    __hash__ = None


def as_matrix(x) -> FeatureMatrix:
    return x if isinstance(x, FeatureMatrix) else FeatureMatrix(np.asarray(x, dtype=np.float64))


def _resolve_format(path: Path, fmt: str) -> str:
    if fmt != "auto":
        if fmt not in ("csv", "bin"):
            raise ValueError(f"unknown format {fmt!r}")
        return fmt
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".mkaf":
        return "bin"
    raise ValueError(f"cannot infer format from extension {suffix!r}; pass csv or bin")


def _parse_csv(text: str, header: bool) -> np.ndarray:
    lines = text.splitlines()
    if header and lines:
        lines = lines[1:]
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=2 if header else 1):
        if not line.strip():
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise MatrixFormatError(
                f"line {lineno}: expected {width} columns, found {len(fields)}"
            )
        try:
            row = [float(f) for f in fields]
        except ValueError as exc:
            raise MatrixFormatError(f"line {lineno}: {exc}") from None
        rows.append(row)
    if not rows:
        raise MatrixFormatError("empty file")
    arr = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise MatrixFormatError(f"non-finite value at row {bad[0]}, column {bad[1]}")
    return arr


def _parse_bin(blob: bytes) -> np.ndarray:
    if len(blob) == 0:
        raise MatrixFormatError("empty file")
    if len(blob) < _HEADER.size:
        raise MatrixFormatError("truncated header")
    magic, version, n, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"unsupported version {version}")
    expected = _HEADER.size + 8 * n * d
    if len(blob) != expected:
        raise MatrixFormatError(f"payload size mismatch: expected {expected} bytes, got {len(blob)}")
    arr = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(n, d)
    if not np.all(np.isfinite(arr)):
        raise MatrixFormatError("non-finite value in payload")
    return arr.astype(np.float64)


def load_matrix(path, format: str = "auto", header: bool = False) -> FeatureMatrix:
    """Load a feature matrix; rows are samples, in file order."""
    path = Path(path)
    fmt = _resolve_format(path, format)
    if fmt == "csv":
        arr = _parse_csv(path.read_text(encoding="utf-8"), header)
    else:
        arr = _parse_bin(path.read_bytes())
    return FeatureMatrix(arr)


def format_float(v: float) -> str:
    # shortest repr that round-trips; integral values keep a trailing ".0" off
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def save_matrix(m, path, format: str = "auto") -> None:
    m = as_matrix(m)
    path = Path(path)
    fmt = _resolve_format(path, format)
    if fmt == "csv":
        body = "".join(",".join(format_float(v) for v in row) + "\n" for row in m.data)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    else:
        header = _HEADER.pack(MAGIC, VERSION, m.n_samples, m.n_features)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(m.data.astype("<f8").tobytes(order="C"))
