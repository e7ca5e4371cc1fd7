"""CSV tables and the binary lattice snapshot format.

Snapshot layout (all little-endian): int32 d, int32 n, float64 L,
int32 number of times, float64 times[...], then the values as float64 in
row-major order with shape (times, n) for d=1 or (times, n, n) for d=2.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

_HEAD = np.dtype([("d", "<i4"), ("n", "<i4"), ("L", "<f8"), ("nt", "<i4")])


def write_snapshot(path, d: int, n: int, L: float, times, values) -> None:
    times = np.asarray(times, dtype="<f8")
    values = np.ascontiguousarray(values, dtype="<f8")
    want = (len(times),) + (n,) * d
    if values.shape != want:
        raise ValueError(f"values shape {values.shape} does not match {want}")
    head = np.array([(d, n, L, len(times))], dtype=_HEAD)
    with open(path, "wb") as fh:
        fh.write(head.tobytes())
        fh.write(times.tobytes())
        fh.write(values.tobytes())


def read_snapshot(path):
    """Return (d, n, L, times, values)."""
    raw = Path(path).read_bytes()
    head = np.frombuffer(raw[:_HEAD.itemsize], dtype=_HEAD)[0]
    d, n, L, nt = int(head["d"]), int(head["n"]), float(head["L"]), int(head["nt"])
    off = _HEAD.itemsize
    times = np.frombuffer(raw[off:off + 8 * nt], dtype="<f8").copy()
    off += 8 * nt
    values = np.frombuffer(raw[off:], dtype="<f8").copy()
    shape = (nt,) + (n,) * d
    if values.size != int(np.prod(shape)):
        raise ValueError("snapshot is truncated or has trailing data")
    return d, n, L, times, values.reshape(shape)


def _fmt(v) -> str:
    return repr(float(v))


def write_csv(path, header, rows) -> None:
    """Rows of numbers written with round-trip float formatting (byte-stable)."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r]
    return header, np.array(data)
