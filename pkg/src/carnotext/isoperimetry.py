"""Areas of disk maps and the area / length^2 ratio of horizontal loops."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allcock import AllcockGroup
from .contact import HORIZONTAL_TOL, check_horizontal, horizontal_length
from .errors import HorizontalityError, InputError, NumericalError
from .extension import StageRecord, extend_group_loop, wedge_norm
from .grids import DiskMap
from .paths import SampledPath

CONTACT_TOL = 1e-3
STAGE_ORDER = ("Gamma1", "Gamma2", "Gamma3", "Gamma4", "Gamma5")


@dataclass
class AreaReport:
    total: float
    per_stage: dict = field(default_factory=dict)
    quadrature: str = "midpoint"
    bounds: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"total": self.total, "per_stage": dict(self.per_stage),
                "quadrature": self.quadrature, "bounds": dict(self.bounds),
                "checks": dict(self.checks)}


@dataclass
class IsoperimetricReport:
    length: float
    area_sr: float
    ratio: float
    K: float | None
    K_bound_check: bool
    per_stage: dict = field(default_factory=dict)
    grid: int = 0
    info: dict = field(default_factory=dict)

    def to_dict(self, seed=None) -> dict:
        return {"length": self.length, "area": self.area_sr, "ratio": self.ratio,
                "K": self.K, "K_bound_check": self.K_bound_check,
                "per_stage": dict(self.per_stage), "grid": self.grid, "seed": seed,
                **{k: v for k, v in self.info.items() if np.isscalar(v)}}


def _cell_area_density(values: np.ndarray, h0: float, h1: float) -> np.ndarray:
    """``|d_0 f ^ d_1 f|`` at cell centers from the four corner values."""
    a, b = values[:-1, :-1], values[1:, :-1]
    c, d = values[:-1, 1:], values[1:, 1:]
    d0 = (b + d - a - c) / (2 * h0)
    d1 = (c + d - a - b) / (2 * h1)
    return wedge_norm(d0, d1)


def _bands(disk: DiskMap) -> list:
    edges = [0] + sorted(disk.seams) + [disk.n_rho - 1]
    names = ["center"]
    if len(disk.seams) == len(STAGE_ORDER):
        names += list(reversed(STAGE_ORDER))
    else:
        names += [f"band{k}" for k in range(1, len(edges) - 1)]
    return list(zip(names, edges[:-1], edges[1:]))


def graph_area(values, h_rho: float | None = None, h_theta: float | None = None) -> AreaReport:
    """Midpoint quadrature of ``int |d_1 f ^ d_2 f|`` on a polar grid.

    ``values`` is a :class:`DiskMap` (its horizontal part is used) or an array
    of shape ``(n_rho, n_theta, d)``. The image area does not depend on the
    parametrization, so the ``(rho, theta)`` cells are used directly. A disk
    map with seams also gets a per-band breakdown named after the stages.
    """
    disk = values if isinstance(values, DiskMap) else None
    v = disk.horizontal if disk is not None else np.asarray(values, dtype=float)
    if v.ndim != 3 or v.shape[0] < 2 or v.shape[1] < 2:
        raise InputError("graph_area needs values of shape (n_rho, n_theta, d)")
    hr = h_rho if h_rho is not None else 1.0 / (v.shape[0] - 1)
    ht = h_theta if h_theta is not None else 1.0 / (v.shape[1] - 1)
    cell = _cell_area_density(v, hr, ht) * hr * ht
    per = {}
    if disk is not None and disk.seams:
        for name, lo, hi in _bands(disk):
            per[name] = float(cell[lo:hi].sum())
    return AreaReport(float(cell.sum()), per, f"midpoint {v.shape[0] - 1}x{v.shape[1] - 1}")


def contact_defect(group: AllcockGroup, Phi: DiskMap) -> float:
    """Largest edge defect ``|dT - omega(A_a, A_b) / 2|`` over the polar grid edges."""
    if Phi.vertical is None:
        raise InputError("disk map has no vertical part")
    form = group.form
    A, T = Phi.horizontal, Phi.vertical
    worst = 0.0
    for axis in (0, 1):
        a = np.swapaxes(A, 0, axis)
        t = np.swapaxes(T, 0, axis)
        d = t[1:] - t[:-1] - 0.5 * form.omega(a[:-1], a[1:])
        worst = max(worst, float(np.abs(d).max(initial=0.0)))
    return worst


def sr_area(group: AllcockGroup, Phi: DiskMap, tol: float = CONTACT_TOL) -> float:
    """Sub-Riemannian area of a contact disk map: the graph area of its horizontal part.

    The vertical part must be consistent with the contact equations: edge
    defects above ``tol * max(1, osc(A)^2)`` raise :class:`HorizontalityError`,
    where ``osc(A)`` is the largest coordinate range of the horizontal part.
    """
    defect = contact_defect(group, Phi)
    scale = max(1.0, float(np.ptp(Phi.horizontal.reshape(-1, Phi.horizontal.shape[-1]),
                                  axis=0).max()) ** 2)
    if defect > tol * scale:
        raise HorizontalityError(
            f"disk map is not a contact map: edge defect {defect:.3e} > {tol:.1e} x {scale:.3g}")
    return graph_area(Phi.horizontal, Phi.h_rho, Phi.h_theta).total


def riemannian_comparison(group: AllcockGroup, Phi: DiskMap, tol: float = CONTACT_TOL) -> dict:
    """Full graph area against ``sup sqrt(1 + 3|phi|^2)`` times the horizontal area."""
    full = graph_area(Phi.full(), Phi.h_rho, Phi.h_theta).total
    hor = sr_area(group, Phi, tol)
    factor = float(np.sqrt(1 + 3 * np.sum(Phi.horizontal ** 2, axis=-1)).max())
    return {"full_area": full, "sr_area": hor, "factor": factor, "bound": factor * hor,
            "holds": bool(full <= factor * hor + 1e-9 * max(1.0, full))}


def horizontal_loop_length(group: AllcockGroup, Gamma: SampledPath) -> float:
    return horizontal_length(group.algebra, Gamma, check=False)


def isoperimetric_ratio(group: AllcockGroup, Gamma: SampledPath, grid: int = 512,
                        K: float | None = None, tol: float = HORIZONTAL_TOL,
                        eps: float = 1e-9, gauge_lipschitz: bool = False) -> IsoperimetricReport:
    """Extend ``Gamma``, then compare the disk's sub-Riemannian area with ``length^2``."""
    length = horizontal_loop_length(group, Gamma)
    Phi, record = extend_group_loop(group, Gamma, grid, tol=tol, eps=eps,
                                    gauge_lipschitz=gauge_lipschitz)
    if record is None:
        return IsoperimetricReport(length, 0.0, 0.0, K, True, {}, grid, dict(Phi.info))
    area = sr_area(group, Phi)
    ratio = area / length ** 2
    breakdown = graph_area(Phi)
    ok = True if K is None else bool(ratio <= K)
    info = dict(Phi.info)
    info["contact_defect"] = contact_defect(group, Phi)
    return IsoperimetricReport(length, area, ratio, K, ok, breakdown.per_stage, grid, info)


def homotopy_area_breakdown(record: StageRecord, strict: bool = True,
                            rtol: float = 1e-9) -> AreaReport:
    """Wedge areas of the five stages on their own parameter squares.

    Checks ``area(Gamma1) = 0``, ``area(Gamma2) <= 2 L^2``,
    ``area(Gamma3) <= 3 pi L^2`` with ``L = int |alpha'|`` and
    ``area(Gamma5) <= C (int |a'|)^2``. With ``strict`` a failed check raises
    :class:`NumericalError`.
    """
    if record is None:
        return AreaReport(0.0, {name: 0.0 for name in STAGE_ORDER}, "none")
    names = [st.name for st in record.stages]
    if tuple(names) != STAGE_ORDER:
        raise InputError(f"stage record must contain {STAGE_ORDER}, got {tuple(names)}")
    T, S = record.stage_cells()
    cell = 1.0 / (record.n_tau * record.n_t)
    per = {st.name: float(st.area_density(T, S).sum() * cell) for st in record.stages}
    L = record.alpha_length
    La = record.a_length
    C = record.group.model.C_suriso
    bounds = {"Gamma1": 0.0, "Gamma2": 2 * L ** 2, "Gamma3": 3 * np.pi * L ** 2,
              "Gamma5": C * La ** 2}
    checks = {"Gamma1": per["Gamma1"] == 0.0}
    for k in ("Gamma2", "Gamma3", "Gamma5"):
        checks[k] = bool(per[k] <= bounds[k] * (1 + rtol) + 1e-12)
    rep = AreaReport(float(sum(per.values())), per,
                     f"midpoint {record.n_tau}x{record.n_t} per stage", bounds, checks)
    if strict and not all(checks.values()):
        bad = [k for k, v in checks.items() if not v]
        raise NumericalError(f"stage area bounds violated: {bad}")
    return rep


def h_jacobian(L, horizontal_dim: int | None = None) -> float:
    """Jacobian ``|L_1 ^ L_2|`` of a linear map ``R^2 -> R^{mn}``.

    ``L`` has shape ``(d, 2)``; rows at index ``horizontal_dim`` and beyond
    are vertical and must vanish.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[1] != 2:
        raise InputError("L must have shape (d, 2)")
    if horizontal_dim is not None and np.any(L[horizontal_dim:] != 0):
        raise InputError("an h-homomorphism has vanishing vertical rows")
    return float(wedge_norm(L[:, 0], L[:, 1]))


def horizontal_subgroup_bound(alg, x, y, n: int = 64) -> dict:
    """Length of the horizontal segment from ``x`` to ``y`` in an abelian horizontal subgroup.

    ``x`` and ``y`` must lie in ``exp(V)`` for a subspace ``V`` of the first
    layer with ``[V, V] = 0``. The segment ``x exp(s (y - x))`` is horizontal
    and ends at ``y``, so its length bounds the CC distance from above.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d1 = alg.layer_dims[0]
    if np.any(x[d1:] != 0) or np.any(y[d1:] != 0):
        raise InputError("points must lie in a horizontal subgroup")
    if np.abs(alg.bracket(x, y)).max() > 1e-12:
        raise InputError("points do not span an abelian horizontal subspace")
    s = np.linspace(0, 1, n + 1)[:, None]
    seg = SampledPath(alg.bch_product(x, s * (y - x)))
    check_horizontal(alg, seg)
    return {"bound": horizontal_length(alg, seg),
            "euclidean": float(np.linalg.norm(y - x)),
            "endpoint_error": float(np.abs(seg.values[-1] - y).max())}
