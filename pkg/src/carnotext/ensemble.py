"""Seeded loop ensembles for benchmarks and refinement studies."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .allcock import AllcockGroup, theta_area
from .contact import HORIZONTAL_TOL, horizontal_lift
from .errors import AdmissibilityError, InputError
from .isoperimetry import isoperimetric_ratio
from .paths import SampledPath

# 1.2 x the largest ratio of the default bench run (heisenberg, 2 copies,
# 100 loops, seed 0, 3 modes, grid 256); a regression guard only
DEFAULT_K = 1.2 * 1.4728727395330596
LOOP_LENGTH = 2 * np.pi
BENCH_COLUMNS = ("index", "seed", "length", "area", "ratio", "kappa_emp")


def loop_seeds(seed: int, count: int) -> list:
    """Independent 64-bit seeds, one per loop, derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(int(count))
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def canceling_planes(group: AllcockGroup) -> list:
    """Copy-1 coordinate planes ``(l, p)`` carrying a nonzero ``b_lp``."""
    b = group.model.b
    m = group.m
    return [(l, p) for l in range(m) for p in range(l + 1, m) if np.any(b[:, l, p] != 0)]


def random_fourier_loop(group: AllcockGroup, rng, n: int, modes: int = 3,
                        scale: float = 1.0, atol: float = 1e-7,
                        length: float | None = LOOP_LENGTH) -> SampledPath:
    """Admissible random loop in ``R^{mn}`` sampled at ``n + 1`` nodes.

    A trigonometric polynomial with modes ``1..modes`` and ``1/k`` decay in every
    coordinate, plus one circle per copy-1 plane at the distinct frequencies
    ``modes + 1, modes + 2, ...``. Different frequencies do not interact in the
    area, so the circle radii (from a least-squares solve over the planes)
    cancel the area exactly. Starts at the origin and, unless ``length`` is
    ``None``, is rescaled to that polygonal length.
    """
    if modes < 0:
        raise InputError("modes must be non-negative")
    d = group.horizontal_dim
    t = np.linspace(0.0, 1.0, n + 1)
    k = np.arange(1, modes + 1)
    ca = rng.standard_normal((modes, d)) * scale / k[:, None]
    cb = rng.standard_normal((modes, d)) * scale / k[:, None]
    ang = 2 * np.pi * np.outer(t, k)
    c = np.cos(ang) @ ca + np.sin(ang) @ cb
    # area of the base polynomial: sum_k pi k omega(a_k, b_k)
    form = group.form
    area = np.pi * np.sum(k[:, None] * form.omega(ca, cb), axis=0) if modes else np.zeros(group.s)
    planes = canceling_planes(group)
    if planes and np.abs(area).max() > 0:
        B = np.stack([group.model.b[:, l, p] for l, p in planes], axis=1)
        S = np.linalg.lstsq(B, -area, rcond=None)[0]
        for idx, ((l, p), sk) in enumerate(zip(planes, S)):
            f = modes + 1 + idx
            r = np.sqrt(abs(sk) / (np.pi * f))
            c[:, l] += r * np.cos(2 * np.pi * f * t)
            c[:, p] += np.sign(sk) * r * np.sin(2 * np.pi * f * t)
    c = c - c[0]
    c[-1] = c[0]
    if length is not None:
        chord = float(np.linalg.norm(np.diff(c, axis=0), axis=1).sum())
        if chord > 0:
            c *= length / chord
    loop = SampledPath(c, closed=True)
    got = theta_area(form, loop)
    L = float(np.linalg.norm(np.diff(c, axis=0), axis=1).sum())
    if np.abs(got).max() > atol * max(1.0, L ** 2):
        raise AdmissibilityError("copy-1 planes cannot cancel the area of this loop", got)
    return loop


def figure_eight_loop(group: AllcockGroup, rng, n: int, scale: float = 1.0) -> SampledPath:
    """Figure-eight ``(sin 2 pi t, sin 4 pi t / 2)`` in a random 2-plane, random phase.

    Its signed area in any plane is zero, so it is admissible for every model.
    """
    d = group.horizontal_dim
    q, _ = np.linalg.qr(rng.standard_normal((d, 2)))
    phase = rng.uniform()
    t = np.linspace(0.0, 1.0, n + 1) + phase
    x = np.sin(2 * np.pi * t)
    y = 0.5 * np.sin(4 * np.pi * t)
    c = scale * (np.outer(x, q[:, 0]) + np.outer(y, q[:, 1]))
    c = c - c[0]
    c[-1] = c[0]
    return SampledPath(c, closed=True)


def lift_loop(group: AllcockGroup, loop: SampledPath) -> SampledPath:
    """Horizontal lift of a layer-1 loop from the identity."""
    return horizontal_lift(group.algebra, loop)


def make_loop(group: AllcockGroup, kind: str, seed: int, n: int, modes: int = 3) -> SampledPath:
    rng = np.random.default_rng(seed)
    if kind == "fourier":
        return random_fourier_loop(group, rng, n, modes)
    if kind == "figure-eight":
        return figure_eight_loop(group, rng, n)
    if kind == "constant":
        return SampledPath(np.zeros((n + 1, group.horizontal_dim)), closed=True)
    raise InputError(f"unknown loop kind {kind!r}")


@dataclass(frozen=True)
class BenchConfig:
    algebra: str = "heisenberg"
    copies: int = 2
    loops: int = 100
    seed: int = 0
    fourier_modes: int = 3
    grid: int = 256
    out: str | None = None
    kind: str = "fourier"
    K: float = DEFAULT_K
    tol: float = HORIZONTAL_TOL
    oversample: int = 16

    def validate(self) -> None:
        if self.loops < 1:
            raise InputError("loops must be at least 1")
        if self.grid < 10:
            raise InputError("grid must be at least 10")
        if self.copies < 1:
            raise InputError("copies must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.oversample < 1:
            raise InputError("oversample must be at least 1")
        if self.fourier_modes < 0:
            raise InputError("fourier_modes must be non-negative")


def run_bench(group: AllcockGroup, config: BenchConfig) -> list:
    """One row per loop: index, seed, length, area, ratio, kappa_emp.

    Loops are sampled ``oversample`` times finer than the disk grid so that
    the sampled contact residual of their lifts stays below the horizontality
    tolerance; the disk boundary is the spline through those samples.
    """
    config.validate()
    rows = []
    for i, s in enumerate(loop_seeds(config.seed, config.loops)):
        loop = make_loop(group, config.kind, s, config.oversample * config.grid,
                         config.fourier_modes)
        rep = isoperimetric_ratio(group, lift_loop(group, loop), config.grid, K=config.K,
                                  tol=config.tol)
        rows.append({"index": i, "seed": s, "length": rep.length, "area": rep.area_sr,
                     "ratio": rep.ratio, "kappa_emp": rep.info.get("kappa_emp", 0.0)})
    rows.sort(key=lambda r: r["index"])
    return rows


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow([r["index"], r["seed"]] + [repr(float(r[c])) for c in BENCH_COLUMNS[2:]])
    return buf.getvalue()
