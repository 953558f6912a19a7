"""Uniformly sampled curves and their CSV representation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DataFormatError, InputError

CLOSURE_TOL = 1e-12


@dataclass(frozen=True)
class SampledPath:
    """Curve sampled at ``N + 1`` uniform times on ``[t0, t1]``.

    ``values`` has shape ``(N + 1, d)``. Closed paths repeat the first sample
    as the last one.
    """

    values: np.ndarray
    closed: bool = False
    t0: float = 0.0
    t1: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 2:
            raise InputError(f"path needs at least two samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("path contains non-finite values")
        if not self.t1 > self.t0:
            raise InputError("path time interval must be increasing")
        if self.closed and np.abs(v[0] - v[-1]).max() > CLOSURE_TOL * max(1.0, np.abs(v).max()):
            raise InputError("closed path must repeat its first sample at the end")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        """Number of grid intervals."""
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def h(self) -> float:
        return (self.t1 - self.t0) / self.n

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n + 1)

    def spline(self) -> CubicSpline:
        """C^2 interpolant, periodic for closed paths."""
        bc = "periodic" if self.closed else "not-a-knot"
        v = self.values
        if self.closed:
            v = v.copy()
            v[-1] = v[0]
        if self.n < 3 and not self.closed:
            bc = "natural"
        return CubicSpline(self.times, v, axis=0, bc_type=bc)

    def with_values(self, values) -> "SampledPath":
        return SampledPath(values, self.closed, self.t0, self.t1)

    def reversed(self) -> "SampledPath":
        return self.with_values(self.values[::-1])

    def concatenate(self, other: "SampledPath") -> "SampledPath":
        """Join two paths sharing an endpoint; times rescale to ``[t0, t1]``.

        Both pieces must have the same step so the result stays uniform.
        """
        if not np.isclose(self.h, other.h, rtol=1e-12, atol=0.0):
            raise InputError("concatenated paths must share a grid step")
        if np.abs(self.values[-1] - other.values[0]).max() > 1e-12:
            raise InputError("paths do not share an endpoint")
        v = np.vstack([self.values, other.values[1:]])
        closed = np.abs(v[0] - v[-1]).max() <= CLOSURE_TOL
        return SampledPath(v, closed, self.t0, self.t0 + self.h * (v.shape[0] - 1))


def read_curve_csv(path) -> SampledPath:
    """Read a curve in the ``t,c_1,...,c_q`` CSV format."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DataFormatError("empty curve file", line=1)
    header = [c.strip() for c in rows[0]]
    q = len(header) - 1
    if q < 1 or header[0] != "t" or header[1:] != [f"c_{i}" for i in range(1, q + 1)]:
        raise DataFormatError("header must be t,c_1,...,c_q", line=1)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != q + 1:
            raise DataFormatError(f"expected {q + 1} fields, got {len(row)}", line=lineno)
        try:
            data.append([float(c) for c in row])
        except ValueError:
            raise DataFormatError("non-numeric field", line=lineno) from None
    if len(data) < 2:
        raise DataFormatError("curve needs at least two samples", line=len(rows))
    arr = np.array(data)
    t = arr[:, 0]
    dt = np.diff(t)
    if np.any(dt <= 0):
        bad = int(np.argmax(dt <= 0)) + 3
        raise DataFormatError("times must be strictly increasing", line=bad)
    if np.abs(dt - dt.mean()).max() > 1e-9 * max(1.0, abs(t[-1] - t[0])):
        bad = int(np.argmax(np.abs(dt - dt.mean()))) + 3
        raise DataFormatError("times must be uniformly spaced", line=bad)
    v = arr[:, 1:]
    closed = bool(np.abs(v[0] - v[-1]).max() <= CLOSURE_TOL * max(1.0, np.abs(v).max()))
    if closed:
        v[-1] = v[0]
    return SampledPath(v, closed, float(t[0]), float(t[-1]))


def format_curve_csv(curve: SampledPath) -> str:
    q = curve.dim
    lines = [",".join(["t"] + [f"c_{i}" for i in range(1, q + 1)])]
    for t, row in zip(curve.times, curve.values):
        lines.append(",".join(repr(float(x)) for x in (t, *row)))
    return "\n".join(lines) + "\n"


def write_curve_csv(path, curve: SampledPath) -> None:
    Path(path).write_text(format_curve_csv(curve))
