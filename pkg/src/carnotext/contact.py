"""Contact equations, horizontal lifting and horizontal length.

A curve ``gamma`` in exponential coordinates is horizontal when, layer by
layer,

    gamma'_j = sum_{n=2}^{u} (-1)^n / n! * pi_j([gamma, gamma']_{n-1}),

so the layer-1 velocity determines every other component. For step 2 this is
``gamma'_2 = [gamma_1, gamma'_1] / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .algebra import GradedAlgebra
from .errors import HorizontalityError, InputError
from .paths import SampledPath

HORIZONTAL_TOL = 1e-6


@dataclass(frozen=True)
class ResidualReport:
    """Sup and L1 norms of a residual, per layer (curves) or component (forms).

    ``excluded`` is a boolean mask over the grid nodes that were left out.
    """

    per_layer_sup: dict
    per_layer_l1: dict
    excluded: np.ndarray
    residual: np.ndarray | None = field(default=None, repr=False)

    @property
    def sup(self) -> float:
        return max(self.per_layer_sup.values(), default=0.0)

    @property
    def l1(self) -> float:
        return sum(self.per_layer_l1.values())

    @property
    def excluded_nodes(self) -> np.ndarray:
        return np.argwhere(self.excluded) if self.excluded.ndim > 1 else np.flatnonzero(self.excluded)

    def to_dict(self) -> dict:
        return {"sup": self.sup,
                "per_layer_sup": {str(k): float(v) for k, v in self.per_layer_sup.items()},
                "per_layer_l1": {str(k): float(v) for k, v in self.per_layer_l1.items()},
                "excluded": int(self.excluded.sum())}


def contact_velocity(alg: GradedAlgebra, gamma, dgamma1):
    """Full velocity of a horizontal curve from its position and layer-1 velocity.

    Solved layer by layer since layer ``j`` only uses lower-layer velocities.
    """
    gamma = np.asarray(gamma, dtype=float)
    v = np.zeros(gamma.shape)
    v[..., alg.layer_slices[0]] = dgamma1
    for j in range(2, alg.step + 1):
        rhs = contact_rhs(alg, gamma, v)
        sl = alg.layer_slices[j - 1]
        v[..., sl] = rhs[..., sl]
    return v


def contact_rhs(alg: GradedAlgebra, gamma, dgamma):
    """``sum_{n=2}^u (-1)^n/n! [gamma, dgamma]_{n-1}`` (all layers)."""
    out = np.zeros(np.broadcast_shapes(np.shape(gamma), np.shape(dgamma)))
    term = np.asarray(dgamma, dtype=float)
    for n in range(2, alg.step + 1):
        term = alg.bracket(gamma, term)
        out = out + ((-1) ** n / factorial(n)) * term
    return out


def _velocity(path: SampledPath, derivative: str):
    v = path.values
    h = path.h
    if derivative == "spline":
        return path.spline()(path.times, 1)
    if derivative != "central":
        raise InputError(f"unknown derivative rule {derivative!r}")
    d = np.empty_like(v)
    if path.closed:
        w = v[:-1]
        d[:-1] = (np.roll(w, -1, axis=0) - np.roll(w, 1, axis=0)) / (2 * h)
        d[-1] = d[0]
    else:
        d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
        d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return d


def contact_residual_curve(alg: GradedAlgebra, path: SampledPath,
                           derivative: str = "central") -> ResidualReport:
    """Residual of the contact equations at the grid nodes of ``path``.

    ``derivative="central"`` uses second-order central differences; endpoint
    nodes of open curves are excluded from the norms. ``"spline"`` uses the
    derivative of the cubic interpolant instead (fourth order on smooth data).
    """
    if path.n < 4:
        raise InputError(f"contact residual needs N >= 4, got N = {path.n}")
    if path.dim != alg.dim:
        raise InputError(f"path dimension {path.dim} != algebra dimension {alg.dim}")
    d = _velocity(path, derivative)
    r = d - contact_rhs(alg, path.values, d)
    excluded = np.zeros(path.n + 1, dtype=bool)
    if path.closed:
        excluded[-1] = True
    elif derivative == "central":
        excluded[[0, -1]] = True
    keep = ~excluded
    sup, l1 = {}, {}
    for j in range(2, alg.step + 1):
        nj = np.linalg.norm(r[keep][:, alg.layer_slices[j - 1]], axis=1)
        sup[j] = float(nj.max(initial=0.0))
        l1[j] = float(nj.sum() * path.h)
    return ResidualReport(sup, l1, excluded, r)


def check_horizontal(alg: GradedAlgebra, path: SampledPath,
                     tol: float = HORIZONTAL_TOL) -> ResidualReport:
    """Gate used before operations that require horizontal input.

    Accepts when the central-difference residual or the spline residual is
    below ``tol``. Central differences are exact on step-2 piecewise
    horizontal lines with breakpoints on the grid, splines are fourth order on
    smooth curves; a non-horizontal path fails both. Returns the smaller
    report, raises :class:`HorizontalityError` otherwise.
    """
    reports = [contact_residual_curve(alg, path, "central"),
               contact_residual_curve(alg, path, "spline")]
    best = min(reports, key=lambda r: r.sup)
    if best.sup > tol:
        raise HorizontalityError(
            f"path is not horizontal: contact residual {best.sup:.3e} > {tol:.1e}", best)
    return best


def _split_layer1(alg: GradedAlgebra, values):
    v = np.asarray(values, dtype=float)
    d1 = alg.layer_dims[0]
    if v.shape[-1] == d1:
        return v
    if v.shape[-1] == alg.dim:
        if np.abs(v[..., d1:]).max(initial=0.0) > 0:
            raise InputError("gamma1 must lie in the first layer")
        return v[..., :d1]
    raise InputError(f"gamma1 has {v.shape[-1]} coordinates, expected {d1} or {alg.dim}")


def horizontal_lift(alg: GradedAlgebra, gamma1: SampledPath, init=None) -> SampledPath:
    """Horizontal curve over ``gamma1`` starting at ``(gamma1(0), init)``.

    The layer-1 curve is interpolated by a cubic spline (periodic when
    ``gamma1`` is closed) and the contact ODE is integrated by classical RK4
    on the sample grid. For step 2 the right-hand side does not depend on the
    state and RK4 reduces to Simpson's rule, applied in vectorized form.
    The returned path is marked closed only if the lift actually closes.
    """
    c = _split_layer1(alg, gamma1.values)
    d1 = alg.layer_dims[0]
    z0 = np.zeros(alg.dim)
    if init is not None:
        init = np.asarray(init, dtype=float)
        if init.shape != (alg.dim,):
            raise InputError(f"init must have length {alg.dim}")
        if np.any(init[:d1] != 0):
            raise InputError("init must have zero first-layer component")
        z0 = init.copy()
    n = gamma1.n
    out = np.zeros((n + 1, alg.dim))
    out[:, :d1] = c
    out[0, d1:] = z0[d1:]
    if alg.step == 1:
        return SampledPath(out, gamma1.closed, gamma1.t0, gamma1.t1)
    sp = SampledPath(c, gamma1.closed, gamma1.t0, gamma1.t1).spline()
    t = gamma1.times
    h = gamma1.h
    tm = t[:-1] + h / 2

    def full(x1, rest=None):
        g = np.zeros(x1.shape[:-1] + (alg.dim,))
        g[..., :d1] = x1
        if rest is not None:
            g[..., d1:] = rest
        return g

    if alg.step == 2:
        def f(tt):
            g = full(sp(tt))
            return 0.5 * alg.bracket(g, full(sp(tt, 1)))[..., d1:]
        f0 = f(t)
        incr = h / 6 * (f0[:-1] + 4 * f(tm) + f0[1:])
        out[1:, d1:] = z0[d1:] + np.cumsum(incr, axis=0)
    else:
        def f(tt, rest):
            g = full(sp(tt), rest)
            return contact_velocity(alg, g, sp(tt, 1))[d1:]
        y = z0[d1:].copy()
        for i in range(n):
            k1 = f(t[i], y)
            k2 = f(tm[i], y + h / 2 * k1)
            k3 = f(tm[i], y + h / 2 * k2)
            k4 = f(t[i + 1], y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            out[i + 1, d1:] = y
    # layer 1 is copied exactly from the input samples
    out[:, :d1] = c
    closes = gamma1.closed and np.abs(out[-1] - out[0]).max() <= 1e-12 * max(1.0, np.abs(out).max())
    if closes:
        out[-1] = out[0]
    return SampledPath(out, bool(closes), gamma1.t0, gamma1.t1)


def piecewise_horizontal_approx(alg: GradedAlgebra, path: SampledPath, k: int,
                                tol: float = HORIZONTAL_TOL, check: bool = True) -> SampledPath:
    """Piecewise horizontal line approximation on ``k`` equal subintervals.

    On each subinterval the layer-1 velocity is replaced by its average and the
    segment ``g o exp(s V)`` is evaluated exactly with the group law, so no ODE
    integration is involved. ``k`` must divide the number of grid intervals.
    """
    if k < 1:
        raise InputError("k must be a positive integer")
    if path.n % k:
        raise InputError(f"k = {k} must divide the number of grid intervals {path.n}")
    if path.dim != alg.dim:
        raise InputError(f"path dimension {path.dim} != algebra dimension {alg.dim}")
    if check:
        check_horizontal(alg, path, tol)
    d1 = alg.layer_dims[0]
    m = path.n // k
    v = path.values
    out = np.empty_like(v)
    g = v[0].copy()
    out[0] = g
    s = np.arange(1, m + 1) / m
    for b in range(k):
        step = np.zeros(alg.dim)
        step[:d1] = v[(b + 1) * m, :d1] - v[b * m, :d1]
        seg = alg.bch_product(g, s[:, None] * step)
        seg[:, :d1] = g[:d1] + s[:, None] * step[:d1]
        out[b * m + 1:(b + 1) * m + 1] = seg
        g = seg[-1]
    closed = path.closed and np.abs(out[-1] - out[0]).max() <= 1e-12
    return SampledPath(out, bool(closed), path.t0, path.t1)


def horizontal_length(alg: GradedAlgebra, path: SampledPath, tol: float = HORIZONTAL_TOL,
                      check: bool = True) -> float:
    """Length ``int |gamma_1'|`` of a horizontal path.

    Computed as the exact length of the piecewise linear interpolant of the
    layer-1 samples, which makes the length additive under concatenation and
    exact on piecewise horizontal lines. For horizontal curves the Riemannian
    and sub-Riemannian lengths are both this integral.
    """
    if path.dim == alg.dim:
        if check:
            check_horizontal(alg, path, tol)
        low = path.values[:, alg.layer_slices[0]]
    elif path.dim == alg.layer_dims[0]:
        low = path.values
    else:
        raise InputError(f"path dimension {path.dim} does not match the algebra")
    return float(np.linalg.norm(np.diff(low, axis=0), axis=1).sum())


def lipschitz_ratio(alg: GradedAlgebra, sources, images, source_metric="euclidean",
                    source_alg: GradedAlgebra | None = None) -> float:
    """Sampled lower bound on the Lipschitz constant of ``source -> image``.

    Images are points of ``alg`` measured with the gauge distance. Sources are
    measured with the Euclidean distance, the gauge of ``source_alg``, or a
    user callable ``metric(x, y)`` broadcasting over leading axes.
    """
    src = np.asarray(sources, dtype=float)
    img = np.asarray(images, dtype=float)
    if src.ndim == 1:
        src = src[:, None]
    if src.shape[0] != img.shape[0] or src.shape[0] < 2:
        raise InputError("need at least two (source, image) pairs of equal count")
    i, j = np.triu_indices(src.shape[0], k=1)
    if callable(source_metric):
        ds = np.asarray(source_metric(src[i], src[j]), dtype=float)
    elif source_metric == "euclidean":
        ds = np.linalg.norm(src[i] - src[j], axis=-1)
    elif source_metric == "gauge":
        if source_alg is None:
            raise InputError("gauge source metric needs source_alg")
        ds = source_alg.gauge_quasidistance(src[i], src[j])
    else:
        raise InputError(f"unknown source metric {source_metric!r}")
    di = alg.gauge_quasidistance(img[i], img[j])
    zero = ds == 0
    if np.any(zero & (di > 0)):
        raise InputError("duplicate sources with distinct images give an infinite ratio")
    return float(np.max(di[~zero] / ds[~zero], initial=0.0))


# maps between groups

def contact_residual_map(source: GradedAlgebra, target: GradedAlgebra, F, points,
                         h: float = 1e-4) -> np.ndarray:
    """Contact residual of a map ``F`` between groups at ``points``.

    The derivative along each left-invariant horizontal field ``X_i`` of the
    source is the central difference ``[F(p o hX_i) - F(p o -hX_i)] / 2h``;
    the residual is its defect from the contact equations in the target.
    Returns an array ``(P, d_1, q_target)`` whose layer-1 block is zero.
    """
    p = np.asarray(points, dtype=float)
    fp = np.asarray(F(p), dtype=float)
    d1 = source.layer_dims[0]
    out = np.zeros(p.shape[:-1] + (d1, target.dim))
    for i in range(d1):
        e = np.zeros(source.dim)
        e[i] = h
        d = (np.asarray(F(source.bch_product(p, e))) -
             np.asarray(F(source.bch_product(p, -e)))) / (2 * h)
        r = d - contact_rhs(target, fp, d)
        r[..., target.layer_slices[0]] = 0.0
        out[..., i, :] = r
    return out


def non_lipschitz_map_I(x):
    """Smooth map ``(x1, x2, x3) -> (x3, x1, x2)`` of the Heisenberg group."""
    x = np.asarray(x, dtype=float)
    return x[..., [2, 0, 1]]


def heisenberg_affine_vertical(A, a, b, tau: float, atol: float = 1e-10):
    """Vertical component making ``(A x + a t + b, f3)`` contact on h^1.

    Returns ``f3(x, t)`` for ``x`` of shape ``(..., 2)``. The columns ``A_1,
    A_2`` of ``A`` must both be parallel to ``a``.
    """
    A = np.asarray(A, dtype=float).reshape(2, 2)
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)

    def det(u, v):
        return float(u[0] * v[1] - u[1] * v[0])

    bad = [f"det(A_{j} a) = {det(A[:, j - 1], a):.3e}" for j in (1, 2)
           if abs(det(A[:, j - 1], a)) > atol]
    if bad:
        raise InputError("affine map is not contact: " + ", ".join(bad))
    c1 = det(b, A[:, 0]) / 2
    c2 = det(b, A[:, 1]) / 2
    ct = det(b, a) / 2 + float(np.linalg.det(A))

    def f3(x, t):
        x = np.asarray(x, dtype=float)
        return tau + c1 * x[..., 0] + c2 * x[..., 1] + ct * np.asarray(t, dtype=float)

    return f3


def heisenberg_affine_map(A, a, b, tau: float, atol: float = 1e-10):
    """Assembled map ``p -> (A x + a t + b, f3(x, t))`` on h^1 points."""
    A = np.asarray(A, dtype=float).reshape(2, 2)
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    f3 = heisenberg_affine_vertical(A, a, b, tau, atol)

    def F(p):
        p = np.asarray(p, dtype=float)
        x, t = p[..., :2], p[..., 2]
        out = np.empty_like(p)
        out[..., :2] = x @ A.T + t[..., None] * a + b
        out[..., 2] = f3(x, t)
        return out

    return F
