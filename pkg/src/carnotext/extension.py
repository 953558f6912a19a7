"""Extension of admissible loops to multi-isotropic disk maps.

Given a loop ``c`` in the first layer ``R^{mn}`` of an Allcock group
(``n >= 2``) with vanishing multi-symplectic area, five homotopies are pasted
on ``[0, 1]^2``:

1. ``alpha~((1 + t) tau - t)``: reparametrize to run on ``[1/2, 1]``;
2. ``B1 alpha~(2 tau - 1 + t) + B2 alpha~(2 tau - 1)``: slide copy 1 back;
3. rotate copy 1 into copy 2 in the plane ``(B1, S B1)``;
4. rotate ``gamma`` out while rotating in the kit loop ``q`` in copy 1;
5. contract ``q`` with the isotropic kit homotopy of the model.

``alpha~`` is ``alpha`` on ``[0, 1]`` and zero elsewhere, ``B1``/``B2`` split
copy 1 from the others and ``S`` moves copy 1 to copy 2. The pasted map
``H(tau, t)`` becomes a disk map by ``phi(rho, theta) = H(theta, 2(1 - rho))``
for ``rho >= 1/2`` and the constant ``q0`` inside.

Each stage lives on its own ``(N + 1) x (M + 1)`` grid with ``M = ceil(N/5)``,
so the pasted grid has ``5M + 1`` rows and all seams fall on grid rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allcock import AllcockGroup, PiecewiseLinear, model_isotropic_kit, theta_area, _opnorm2
from .contact import check_horizontal, HORIZONTAL_TOL, ResidualReport
from .errors import (AdmissibilityError, InputError, NumericalError,
                     UnsupportedModelError)
from .grids import STENCIL, DiskMap, HomotopyGrid, default_exclusion
from .paths import SampledPath

EPS_LENGTH = 1e-9
ADMISSIBILITY_TOL = 1e-6
CLOSEDNESS_TOL = 1e-3


def wedge_norm(u, v):
    """Euclidean norm of ``u ^ v``: square root of the Gram determinant."""
    uu = np.sum(u * u, axis=-1)
    vv = np.sum(v * v, axis=-1)
    uv = np.sum(u * v, axis=-1)
    return np.sqrt(np.maximum(uu * vv - uv * uv, 0.0))


def diff6(f, h: float, axis: int, periodic: bool = False):
    """Sixth-order central difference along ``axis``.

    Periodic data must not repeat the first sample at the end. Nodes within
    three cells of a non-periodic boundary are returned as NaN.
    """
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    w = (-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0)
    if periodic:
        d = sum(c * np.roll(f, -k, axis=0) for k, c in zip(range(-3, 4), w) if c) / (60 * h)
    else:
        d = np.full_like(f, np.nan)
        n = f.shape[0]
        d[3:-3] = sum(c * f[3 + k:n - 3 + k] for k, c in zip(range(-3, 4), w) if c) / (60 * h)
    return np.moveaxis(d, 0, axis)


class _Alpha:
    """Periodic cubic interpolant of the translated loop, extended by zero."""

    def __init__(self, loop: SampledPath):
        self.spline = loop.spline()
        self.dspline = self.spline.derivative()

    def value(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0) & (s <= 1)
        return np.where(inside[..., None], self.spline(np.clip(s, 0, 1)), 0.0)

    def deriv(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0) & (s <= 1)
        return np.where(inside[..., None], self.dspline(np.clip(s, 0, 1)), 0.0)


class Stage:
    """One pasted homotopy with analytic partial derivatives."""

    name = "stage"

    def value(self, tau, t):
        raise NotImplementedError

    def partials(self, tau, t):
        raise NotImplementedError

    def kinks(self, tau, t):
        """Functions whose zero sets are the lines where the stage is not C^1."""
        return [2 * np.asarray(tau) - 1 + 0 * np.asarray(t)]

    def area_density(self, tau, t):
        return wedge_norm(*self.partials(tau, t))


class _Split:
    def __init__(self, m: int, n: int):
        self.m, self.n = m, n

    def b1(self, x):
        out = np.zeros_like(x)
        out[..., :self.m] = x[..., :self.m]
        return out

    def b2(self, x):
        out = x.copy()
        out[..., :self.m] = 0.0
        return out

    def shift(self, x):
        """Move copy 1 into copy 2."""
        out = np.zeros_like(x)
        out[..., self.m:2 * self.m] = x[..., :self.m]
        return out


class Reparametrize(Stage):
    name = "Gamma1"

    def __init__(self, alpha: _Alpha):
        self.alpha = alpha

    def value(self, tau, t):
        return self.alpha.value((1 + t) * tau - t)

    def factored_partials(self, tau, t):
        w = self.alpha.deriv((1 + t) * tau - t)
        return 1 + t, tau - 1, w

    def partials(self, tau, t):
        a, b, w = self.factored_partials(tau, t)
        return a[..., None] * w, b[..., None] * w

    def kinks(self, tau, t):
        s = (1 + t) * tau - t
        return [s, s - 1]

    def area_density(self, tau, t):
        # both partials are multiples of one vector, so the 2-vector vanishes
        a, b, w = self.factored_partials(tau, t)
        return np.abs(a * b) * wedge_norm(w, w)


class SlideFirstCopy(Stage):
    name = "Gamma2"

    def __init__(self, alpha: _Alpha, split: _Split):
        self.alpha, self.split = alpha, split

    def value(self, tau, t):
        sp = self.split
        return sp.b1(self.alpha.value(2 * tau - 1 + t)) + sp.b2(self.alpha.value(2 * tau - 1))

    def partials(self, tau, t):
        sp = self.split
        du = sp.b1(self.alpha.deriv(2 * tau - 1 + t))
        dv = sp.b2(self.alpha.deriv(2 * tau - 1))
        return 2 * du + 2 * dv, du

    def kinks(self, tau, t):
        u = 2 * tau - 1 + t
        v = 2 * tau - 1 + 0 * t
        return [u, u - 1, v, v - 1]


class RotateToSecondCopy(Stage):
    name = "Gamma3"

    def __init__(self, alpha: _Alpha, split: _Split):
        self.alpha, self.split = alpha, split

    def _parts(self, tau):
        sp = self.split
        return (sp.b1(self.alpha.value(2 * tau)), sp.b1(self.alpha.deriv(2 * tau)),
                sp.b2(self.alpha.value(2 * tau - 1)), sp.b2(self.alpha.deriv(2 * tau - 1)))

    def value(self, tau, t):
        x1, _, x2, _ = self._parts(tau)
        c = np.cos(np.pi * t / 2)[..., None]
        s = np.sin(np.pi * t / 2)[..., None]
        return c * x1 + s * self.split.shift(x1) + x2

    def partials(self, tau, t):
        x1, d1, _, d2 = self._parts(tau)
        c = np.cos(np.pi * t / 2)[..., None]
        s = np.sin(np.pi * t / 2)[..., None]
        sh = self.split.shift
        d_tau = 2 * (c * d1 + s * sh(d1) + d2)
        d_t = (np.pi / 2) * (-s * x1 + c * sh(x1))
        return d_tau, d_t


class ExchangeWithKitLoop(Stage):
    name = "Gamma4"

    def __init__(self, alpha: _Alpha, split: _Split, kit, group: AllcockGroup):
        self.alpha, self.split, self.kit, self.group = alpha, split, kit, group

    def gamma(self, tau):
        sp = self.split
        return sp.shift(sp.b1(self.alpha.value(2 * tau))) + sp.b2(self.alpha.value(2 * tau - 1))

    def dgamma(self, tau):
        sp = self.split
        return 2 * (sp.shift(sp.b1(self.alpha.deriv(2 * tau))) +
                    sp.b2(self.alpha.deriv(2 * tau - 1)))

    def value(self, tau, t):
        c = np.cos(np.pi * t / 2)[..., None]
        s = np.sin(np.pi * t / 2)[..., None]
        return c * self.gamma(tau) + s * self.group.embed(self.kit.a_at(tau))

    def partials(self, tau, t):
        c = np.cos(np.pi * t / 2)[..., None]
        s = np.sin(np.pi * t / 2)[..., None]
        q = self.group.embed(self.kit.a_at(tau))
        dq = self.group.embed(self.kit.a_dot(tau))
        return c * self.dgamma(tau) + s * dq, (np.pi / 2) * (-s * self.gamma(tau) + c * q)


class ContractKitLoop(Stage):
    name = "Gamma5"

    def __init__(self, kit, group: AllcockGroup):
        self.kit, self.group = kit, group

    def value(self, tau, t):
        return self.group.embed(self.kit.gamma_at(tau, t))

    def partials(self, tau, t):
        d_tau, d_t = self.kit.gamma_partials(tau, t)
        return self.group.embed(d_tau), self.group.embed(d_t)


@dataclass
class StageRecord:
    """Everything produced on the way from the loop to the disk map."""

    group: AllcockGroup
    n_tau: int
    n_t: int
    lam: float
    stages: list = field(repr=False)
    grids: dict = field(repr=False)
    lip: dict
    lip_H: float
    alpha_length: float
    a_length: float
    sigma: np.ndarray = field(repr=False)
    sigma_mean_removed: np.ndarray = field(repr=False)
    kit: object = field(repr=False)
    H: HomotopyGrid = field(repr=False)
    offset: np.ndarray = field(repr=False)
    area_vector: np.ndarray = field(repr=False)
    lip_c: float = 0.0
    d_t: list = field(default=None, repr=False)

    def stage_grid(self):
        tau = np.linspace(0, 1, self.n_tau + 1)
        t = np.linspace(0, 1, self.n_t + 1)
        return np.meshgrid(tau, t, indexing="ij")

    def stage_cells(self):
        tau = (np.arange(self.n_tau) + 0.5) / self.n_tau
        t = (np.arange(self.n_t) + 0.5) / self.n_t
        return np.meshgrid(tau, t, indexing="ij")


def as_loop(c, closed_tol: float = 1e-12) -> SampledPath:
    if isinstance(c, SampledPath):
        if not c.closed:
            raise InputError("loop must be closed")
        return c
    v = np.asarray(c, dtype=float)
    if np.abs(v[0] - v[-1]).max() > closed_tol:
        raise InputError("loop must be closed")
    return SampledPath(v, closed=True)


def stage_rows(n: int) -> int:
    """Rows per stage for an angular resolution ``n``."""
    return max(2, -(-n // 5))


def _kink_mask(stage: Stage, T, S) -> np.ndarray:
    """Nodes whose difference stencil straddles a kink line of ``stage``."""
    mask = np.zeros(T.shape, dtype=bool)
    for g in stage.kinks(T, S):
        g = np.broadcast_to(g, T.shape)
        lo = g.copy()
        hi = g.copy()
        for k in range(1, STENCIL + 1):
            for axis in (0, 1):
                for sgn in (1, -1):
                    sh = np.roll(g, sgn * k, axis=axis)
                    lo = np.minimum(lo, sh)
                    hi = np.maximum(hi, sh)
        mask |= (lo < 0) & (hi > 0)
    return mask


def disk_lipschitz(values: np.ndarray, points: np.ndarray, alg=None) -> float:
    """Largest ratio over grid edges (radial and angular neighbours).

    Euclidean in the image when ``alg`` is ``None``, otherwise the gauge
    distance of ``alg``. A sampled lower bound of the Lipschitz constant.
    """
    best = 0.0
    for axis in (0, 1):
        a = np.swapaxes(values, 0, axis)
        p = np.swapaxes(points, 0, axis)
        dx = np.linalg.norm(p[1:] - p[:-1], axis=-1)
        if alg is None:
            dv = np.linalg.norm(a[1:] - a[:-1], axis=-1)
        else:
            dv = alg.gauge_quasidistance(a[:-1], a[1:])
        ok = dx > 1e-14
        if ok.any():
            best = max(best, float(np.max(dv[ok] / dx[ok])))
    return best


def loop_lipschitz(loop: SampledPath, alg=None) -> float:
    """Edge-ratio Lipschitz constant of a loop parametrized by the unit circle."""
    v = loop.values
    ang = 2 * np.pi * loop.times
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    dx = np.linalg.norm(pts[1:] - pts[:-1], axis=-1)
    if alg is None:
        dv = np.linalg.norm(v[1:] - v[:-1], axis=-1)
    else:
        dv = alg.gauge_quasidistance(v[:-1], v[1:])
    return float(np.max(dv / dx))


def _constant_disk(group: AllcockGroup, point, n: int, m_rows: int) -> DiskMap:
    n_rho = 10 * m_rows + 1
    vals = np.broadcast_to(point, (n_rho, n + 1, group.horizontal_dim)).copy()
    seams = tuple(range(5 * m_rows, 10 * m_rows, m_rows))
    return DiskMap(vals, group.m, group.copies, group.s, np.array(point, dtype=float), seams)


def build_disk_extension(group: AllcockGroup, c, grid: int = 512, eps: float = EPS_LENGTH,
                         atol: float = ADMISSIBILITY_TOL, sigma_refine: int = 8):
    """Multi-isotropic extension of an admissible loop to the unit disk.

    Returns ``(disk, record)``. The disk map has ``grid + 1`` angular nodes
    and ``10 M + 1`` radial nodes, ``M = ceil(grid / 5)``; ``record`` is a
    :class:`StageRecord` or ``None`` for a degenerate (constant) loop.
    """
    if group.copies < 2:
        raise UnsupportedModelError("the disk extension requires copies >= 2")
    if not group.model.has_kit:
        raise UnsupportedModelError(f"model {group.model.name} has no isotropic-loop kit")
    if grid < 10:
        raise InputError("grid must be at least 10")
    loop = as_loop(c)
    if loop.dim != group.horizontal_dim:
        raise InputError(f"loop has {loop.dim} coordinates, group first layer has "
                         f"{group.horizontal_dim}")
    n = int(grid)
    M = stage_rows(n)
    offset = loop.values[0].copy()
    shifted = loop.with_values(loop.values - offset)
    form = group.form
    area = theta_area(form, shifted)
    length = float(np.linalg.norm(np.diff(shifted.values, axis=0), axis=1).sum())
    if np.abs(area).max() > atol * max(1.0, length ** 2):
        raise AdmissibilityError(
            f"loop is not admissible: multi-symplectic area {area.tolist()}", area)
    if length < eps:
        return _constant_disk(group, offset, n, M), None

    lam = max(length, eps)
    alpha = _Alpha(shifted)
    split = _Split(group.m, group.copies)
    # sigma = omega(gamma, gamma') on a fine grid containing tau = 1/2
    n_sig = 2 * sigma_refine * (-(-n // 2))
    ts = np.linspace(0, 1, n_sig + 1)
    probe = ExchangeWithKitLoop(alpha, split, None, group)
    sig = form.omega(probe.gamma(ts), probe.dgamma(ts))
    pl = PiecewiseLinear(sig)
    mean = pl.cumulative[-1].copy()
    kit = model_isotropic_kit(group.model, SampledPath(sig - mean), lam, n_t=M)
    stages = [Reparametrize(alpha), SlideFirstCopy(alpha, split),
              RotateToSecondCopy(alpha, split), ExchangeWithKitLoop(alpha, split, kit, group),
              ContractKitLoop(kit, group)]

    tau = np.linspace(0, 1, n + 1)
    tl = np.linspace(0, 1, M + 1)
    T, S = np.meshgrid(tau, tl, indexing="ij")
    grids, lip, dts = {}, {}, []
    lip_H = 0.0
    H = np.empty((n + 1, 5 * M + 1, group.horizontal_dim))
    kink_H = np.zeros((n + 1, 5 * M + 1), dtype=bool)
    for k, st in enumerate(stages):
        G = st.value(T, S)
        G[-1] = G[0]
        if k:
            jump = np.abs(G[:, 0] - H[:, k * M]).max()
            if jump > 1e-10 * max(1.0, lam):
                raise NumericalError(f"stages {k} and {k + 1} do not match at the seam ({jump:.2e})")
        grids[st.name] = HomotopyGrid(G)
        H[:, k * M:(k + 1) * M + 1] = G
        d_tau, d_t = st.partials(T, S)
        dts.append(d_t)
        lip[st.name] = float(np.max(_opnorm2(d_tau, d_t)))
        lip_H = max(lip_H, float(np.max(_opnorm2(d_tau, 5 * d_t))))
        kink_H[:, k * M:(k + 1) * M + 1] |= _kink_mask(st, T, S)
    Hgrid = HomotopyGrid(H, seams=tuple(range(M, 5 * M, M)))

    # polar grid: rho_i = i / (10 M), row i >= 5M carries H(theta, 2(1 - rho))
    n_rho = 10 * M + 1
    q0 = group.embed(kit.center)
    disk = np.empty((n_rho, n + 1, group.horizontal_dim))
    disk[:5 * M] = q0
    disk[5 * M:] = np.swapaxes(H[:, ::-1], 0, 1)
    seams = tuple(range(5 * M, 10 * M, M))
    excluded = default_exclusion(n_rho, n + 1, seams)
    excluded[5 * M:] |= np.swapaxes(kink_H[:, ::-1], 0, 1)
    disk += offset
    q0 = q0 + offset
    dmap = DiskMap(disk, group.m, group.copies, group.s, q0, seams, excluded=excluded,
                   offset=offset)

    speed = np.linalg.norm(alpha.deriv(ts[:-1] + 0.5 / n_sig), axis=-1)
    a_speed = np.linalg.norm(kit.a_dot(ts[:-1] + 0.5 / n_sig), axis=-1)
    record = StageRecord(group, n, M, lam, stages, grids, lip, lip_H,
                         alpha_length=float(speed.mean()), a_length=float(a_speed.mean()),
                         sigma=sig, sigma_mean_removed=mean, kit=kit, H=Hgrid,
                         offset=offset, area_vector=area,
                         lip_c=float(np.max(np.linalg.norm(alpha.deriv(ts), axis=-1))) / (2 * np.pi),
                         d_t=dts)
    return dmap, record


def _polar_partials(values: np.ndarray, h_rho: float, h_theta: float):
    """Sixth-order partials in ``rho`` and ``theta`` (turns) on the polar grid."""
    d_rho = diff6(values, h_rho, axis=0)
    per = values[:, :-1]
    d_th = diff6(per, h_theta, axis=1, periodic=True)
    d_th = np.concatenate([d_th, d_th[:, :1]], axis=1)
    return d_rho, d_th


def _pullback(group: AllcockGroup, phi: DiskMap):
    form = group.form
    d_rho, d_th = _polar_partials(phi.horizontal, phi.h_rho, phi.h_theta)
    rho = phi.rho[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = form.omega(d_rho, d_th) / (2 * np.pi * rho[..., None])
        prod = np.linalg.norm(d_rho, axis=-1) * np.linalg.norm(d_th, axis=-1) / (2 * np.pi * rho)
    off = ~phi.excluded & (rho > 0)
    keep = off & np.all(np.isfinite(r), axis=-1)
    w = 2 * np.pi * rho * phi.h_rho * phi.h_theta
    sup, l1 = {}, {}
    for k in range(form.s):
        a = np.abs(r[..., k])
        sup[k + 1] = float(a[keep].max(initial=0.0))
        l1[k + 1] = float(np.sum((a * w)[keep & (np.arange(phi.n_theta) < phi.n_theta - 1)]))
    residual = np.where(keep[..., None], r, 0.0)
    scale = float(prod[off & np.isfinite(prod)].max(initial=0.0))
    return ResidualReport(sup, l1, ~keep, residual), scale


def pullback_omega_residual(group: AllcockGroup, phi: DiskMap) -> ResidualReport:
    """``omega(d_1 phi ^ d_2 phi)`` in Cartesian coordinates, per center component.

    Partial derivatives are sixth-order central differences on the polar
    grid; nodes in ``phi.excluded`` are skipped. The L1 norm uses the polar
    area element.
    """
    return _pullback(group, phi)[0]


def closedness_scale(group: AllcockGroup, phi: DiskMap) -> float:
    """Largest ``|d_1 phi| |d_2 phi|`` off the excluded set, used to normalize residuals."""
    return _pullback(group, phi)[1]


_GAUSS3 = ((0.5 - np.sqrt(0.15), 5 / 18), (0.5, 4 / 9), (0.5 + np.sqrt(0.15), 5 / 18))


def _hermite_increments(form, p0, p1, d0, d1):
    """``int theta`` over the cubic Hermite segments ``p0 -> p1`` with tangents ``d0, d1``.

    The integrand is a quintic in the segment parameter, so three Gauss
    points are exact.
    """
    out = 0.0
    for u, w in _GAUSS3:
        h00, h10, h01, h11 = 2 * u**3 - 3 * u**2 + 1, u**3 - 2 * u**2 + u, -2 * u**3 + 3 * u**2, u**3 - u**2
        g00, g10, g01, g11 = 6 * u**2 - 6 * u, 3 * u**2 - 4 * u + 1, -6 * u**2 + 6 * u, 3 * u**2 - 2 * u
        p = h00 * p0 + h10 * d0 + h01 * p1 + h11 * d1
        dp = g00 * p0 + g10 * d0 + g01 * p1 + g11 * d1
        out = out + w * 0.5 * form.omega(p, dp)
    return out


def radial_tangents(record: StageRecord):
    """Tangents at both ends of the radial segments ``i -> i + 1``, ``i >= 5 M``.

    Taken from the analytic stage partials, in units of the segment
    parameter. Returns ``(5 M, d0, d1)`` with ``d0, d1`` of shape
    ``(5 M, n_theta, mn)``; the inner half of the disk is constant.
    """
    M = record.n_t
    j = 10 * M - np.arange(5 * M, 10 * M)
    # row i sits at stage column j and row i + 1 at column j - 1
    k, l0 = np.divmod(j - 1, M)
    D = np.stack(record.d_t)
    return 5 * M, -D[k, :, l0 + 1] / M, -D[k, :, l0] / M


def _ray_integral(form, phi: np.ndarray, tangents=None):
    inc = 0.5 * form.omega(phi[:-1], phi[1:])
    if tangents is not None:
        i0, d0, d1 = tangents
        inc[i0:] = _hermite_increments(form, phi[i0:-1], phi[i0 + 1:], d0, d1)
    out = np.zeros(phi.shape[:-1] + (form.s,))
    out[1:] = np.cumsum(inc, axis=0)
    return out


def vertical_completion(group: AllcockGroup, phi: DiskMap, boundary_z, tol: float = CLOSEDNESS_TOL,
                        record: StageRecord | None = None):
    """Integrate the closed 1-forms ``f_k = theta^k(d phi)`` along rays.

    ``boundary_z`` is the vertical boundary data on the angular nodes, shape
    ``(n_theta, s)`` (or a path with that many samples); only its value at the
    base point fixes the integration constant, the rest is used to report the
    boundary discrepancy. Refuses when the pullback residual exceeds
    ``tol`` relative to ``closedness_scale(group, phi)``.
    """
    form = group.form
    z = np.asarray(boundary_z.values if isinstance(boundary_z, SampledPath) else boundary_z,
                   dtype=float)
    if z.ndim == 1:
        z = np.broadcast_to(z, (phi.n_theta, form.s))
    if z.shape != (phi.n_theta, form.s):
        raise InputError(f"boundary data must have shape ({phi.n_theta}, {form.s})")
    res, scale = _pullback(group, phi)
    if res.sup > tol * max(scale, 1e-300) and res.sup > 1e-12:
        raise NumericalError(
            f"pullback of omega is not small enough to integrate: {res.sup:.3e} "
            f"(scale {scale:.3e}, tolerance {tol:.1e})")
    tangents = radial_tangents(record) if record is not None and record.d_t else None
    psi = _ray_integral(form, phi.horizontal, tangents)
    psi = psi + (z[0] - psi[-1, 0])
    # audit: along the base ray, then around the circle of radius rho
    arc = 0.5 * form.omega(phi.horizontal[:, :-1], phi.horizontal[:, 1:])
    alt = np.zeros_like(psi)
    alt[:, 0] = psi[:, 0]
    alt[:, 1:] = psi[:, :1] + np.cumsum(arc, axis=1)
    audit = float(np.abs(alt - psi).max())
    out = DiskMap(phi.horizontal, phi.m, phi.n, phi.s, phi.q0, phi.seams, psi,
                  excluded=phi.excluded, offset=phi.offset)
    out.info = {"audit_discrepancy": audit,
                "boundary_discrepancy": float(np.abs(psi[-1] - z).max()),
                "closedness_residual": res.sup, "closedness_scale": scale}
    return out


def close_group_loop(alg, Gamma, atol: float = ADMISSIBILITY_TOL) -> SampledPath:
    """Close a group loop whose vertical end gap is within the admissibility tolerance.

    The layer-1 part must close to round-off. The vertical gap of a lifted
    loop is its area, so a gap at most ``atol * max(1, length^2)`` is snapped
    shut; anything larger is rejected as inadmissible.
    """
    if isinstance(Gamma, SampledPath) and Gamma.closed:
        return Gamma
    v = np.array(Gamma.values if isinstance(Gamma, SampledPath) else Gamma, dtype=float)
    d1 = alg.layer_dims[0]
    gap = alg.bch_product(-v[0], v[-1])
    if np.abs(gap[:d1]).max() > 1e-12 * max(1.0, np.abs(v[:, :d1]).max()):
        raise InputError("loop must be closed")
    length = float(np.linalg.norm(np.diff(v[:, :d1], axis=0), axis=1).sum())
    if np.abs(gap[d1:]).max() > atol * max(1.0, length ** 2):
        raise AdmissibilityError(f"group loop does not close: vertical gap {gap[d1:].tolist()}",
                                 gap[d1:])
    v[-1] = v[0]
    if isinstance(Gamma, SampledPath):
        return SampledPath(v, True, Gamma.t0, Gamma.t1)
    return SampledPath(v, True)


def _resample(path: SampledPath, n: int) -> np.ndarray:
    if path.n == n:
        return path.values.copy()
    return path.spline()(np.linspace(path.t0, path.t1, n + 1))


def extend_group_loop(group: AllcockGroup, Gamma: SampledPath, grid: int = 512,
                      tol: float = HORIZONTAL_TOL, closed_tol: float = CLOSEDNESS_TOL,
                      eps: float = EPS_LENGTH, gauge_lipschitz: bool = True):
    """Lipschitz disk spanning a closed horizontal loop of the Allcock group.

    A vertical end gap within the admissibility tolerance is closed first
    (see :func:`close_group_loop`). The loop is left-translated to start at
    the identity, its layer-1 part is
    extended by :func:`build_disk_extension`, the vertical part is recovered
    by :func:`vertical_completion` and the result is translated back.
    Returns ``(disk, record)`` with ``disk.info`` holding the diagnostics;
    the gauge-distance Lipschitz ratio is skipped when ``gauge_lipschitz`` is
    false.
    """
    if group.copies < 2:
        raise UnsupportedModelError("the disk extension requires copies >= 2")
    if not group.model.has_kit:
        raise UnsupportedModelError(f"model {group.model.name} has no isotropic-loop kit")
    alg = group.algebra
    Gamma = close_group_loop(alg, Gamma)
    if Gamma.dim != alg.dim:
        raise InputError(f"loop has {Gamma.dim} coordinates, group has dimension {alg.dim}")
    g0 = Gamma.values[0].copy()
    moved = Gamma.with_values(alg.bch_product(-g0, Gamma.values))
    check_horizontal(alg, moved, tol)
    mn = group.horizontal_dim
    base = moved.with_values(moved.values[:, :mn])
    disk, record = build_disk_extension(group, base, grid, eps=eps)
    n = int(grid)
    target = _resample(moved, n)
    target[-1] = target[0]
    if record is None:
        disk = DiskMap(disk.horizontal, disk.m, disk.n, disk.s, disk.q0, disk.seams,
                       np.zeros(disk.horizontal.shape[:2] + (group.s,)))
        disk.info = {"audit_discrepancy": 0.0, "boundary_discrepancy": 0.0,
                     "closedness_residual": 0.0, "closedness_scale": 0.0}
    else:
        disk = vertical_completion(group, disk, target[:, mn:], closed_tol, record)
    full = alg.bch_product(g0, disk.full())
    info = dict(disk.info)
    out = DiskMap(full[..., :mn], disk.m, disk.n, disk.s,
                  alg.bch_product(g0, np.r_[disk.q0, disk.vertical[0, 0]])[:mn], disk.seams,
                  full[..., mn:], excluded=disk.excluded, offset=g0)
    target_full = alg.bch_product(g0, target)
    err = np.abs(out.full()[-1] - target_full)
    info["boundary_error_horizontal"] = float(err[:, :mn].max())
    info["boundary_error_vertical"] = float(err[:, mn:].max())
    info["boundary_error"] = float(err.max())
    pts = out.points()
    info["lip_phi"] = disk_lipschitz(out.horizontal, pts)
    info["lip_c"] = loop_lipschitz(Gamma.with_values(Gamma.values[:, :mn]))
    if gauge_lipschitz:
        info["lip_Phi"] = disk_lipschitz(out.full(), pts, alg)
        info["lip_Gamma"] = loop_lipschitz(Gamma, alg)
        info["lip_ratio"] = info["lip_Phi"] / info["lip_Gamma"] if info["lip_Gamma"] > 0 else 0.0
    info["kappa_emp"] = info["lip_phi"] / info["lip_c"] if info["lip_c"] > 0 else 0.0
    out.info = info
    return out, record
