"""Binary matrix files, model directories and benchmark CSV.

``.clti`` layout (all little-endian)::

    magic    4 bytes  b"CLTI"
    version  u32      1
    kind     u8       0 = matrix, 1 = signal block
    rows     u64
    cols     u64
    payload  rows * cols binary64, row-major
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import SignalBlock, as_matrix
from .lti import DiscreteLTI

MAGIC = b"CLTI"
VERSION = 1
KIND_MATRIX = 0
KIND_SIGNAL = 1
_HEADER = struct.Struct("<4sIBQQ")

CSV_HEADER = ["method", "m", "p", "q", "L", "stages", "tol", "matvec_count", "wall_ns", "rel_l2_err"]
METHODS = ("cascade", "recurrence", "conv", "cascade-plr")


class FormatError(ValueError):
    """A ``.clti`` file or model directory is malformed."""


def write_matrix(path, a) -> None:
    if isinstance(a, SignalBlock):
        kind, data = KIND_SIGNAL, a.data
    else:
        kind, data = KIND_MATRIX, as_matrix(a)
    rows, cols = data.shape
    payload = np.ascontiguousarray(data, dtype="<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, kind, rows, cols))
        fh.write(payload)


def read_matrix(path):
    """Read a ``.clti`` file; returns an array (kind 0) or a :class:`SignalBlock` (kind 1)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, kind, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if kind not in (KIND_MATRIX, KIND_SIGNAL):
        raise FormatError(f"{path}: bad kind {kind}")
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: bad rows/cols {rows}x{cols}")
    expected = rows * cols * 8
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(f"{path}: truncated payload: expected {expected} bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: payload contains NaN or Inf")
    return SignalBlock(data) if kind == KIND_SIGNAL else data


def read_csv_matrix(path) -> np.ndarray:
    """Plain-text fixture importer: one comma-separated row per line."""
    rows = []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if line and any(cell.strip() for cell in line):
                rows.append([float(cell) for cell in line])
    if not rows or len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: ragged or empty CSV matrix")
    return as_matrix(rows)


def save_model(directory, sys: DiscreteLTI) -> None:
    """Write ``abar.clti``, ``bbar.clti``, ``c.clti``, ``d.clti`` and ``meta``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "abar.clti", sys.Abar)
    write_matrix(d / "bbar.clti", sys.Bbar)
    write_matrix(d / "c.clti", sys.C)
    write_matrix(d / "d.clti", sys.D)
    (d / "meta").write_text(f"delta={sys.delta!r}\nscheme={sys.scheme}\n")


def load_model(directory) -> DiscreteLTI:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"model directory not found: {d}")
    meta = {}
    meta_path = d / "meta"
    if meta_path.exists():
        for line in meta_path.read_text().splitlines():
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    try:
        delta = float(meta.get("delta", "1.0"))
    except ValueError as exc:
        raise FormatError(f"{meta_path}: bad delta {meta['delta']!r}") from exc
    mats = []
    for name in ("abar", "bbar", "c", "d"):
        a = read_matrix(d / f"{name}.clti")
        if isinstance(a, SignalBlock):
            raise FormatError(f"{d / name}.clti: expected a matrix, found a signal block")
        mats.append(a)
    return DiscreteLTI(*mats, delta=delta, scheme=meta.get("scheme", "bilinear"))


@dataclass(frozen=True)
class ResultRow:
    method: str
    m: int
    p: int
    q: int
    L: int
    stages: int
    tol: float | None
    matvec_count: int
    wall_ns: int
    rel_l2_err: float | None = None


def _fmt_real(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def export_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([r.method, r.m, r.p, r.q, r.L, r.stages, _fmt_real(r.tol),
                             r.matvec_count, r.wall_ns, _fmt_real(r.rel_l2_err)])


def read_results_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise FormatError(f"{path}: unexpected header {header}")
        out = []
        for rec in reader:
            if not rec:
                continue
            method, m, p, q, L, stages, tol, count, wall, err = rec
            out.append(ResultRow(method, int(m), int(p), int(q), int(L), int(stages),
                                 float(tol) if tol else None, int(count), int(wall),
                                 float(err) if err else None))
        return out
