"""Model algebras, Allcock groups, multi-symplectic forms and isotropic-loop kits.

A model is a 2-step algebra ``n = v + z`` (``m = dim v``, ``s = dim z``).
The Allcock group of ``n`` copies has first layer ``v_1 + ... + v_n`` with
copy-major coordinates ``x[(i-1)m + j]``, shared center ``z`` and no
brackets between distinct copies.

Every built-in model carries a kit ``(P, Y_1..Y_s)`` in ``v`` with
``[P, Y_k] = Z_k`` and ``[Y_k, Y_l] = 0``. For a zero-mean ``sigma`` the loop
``a = lam P + A(tau) . Y / lam`` with ``A = int sigma`` satisfies
``[a, a'] = sigma`` and contracts through ``Gamma = lam P + (1 - t)(a - lam P)``
with all partial derivatives in the abelian span of the ``Y_k``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .algebra import GradedAlgebra, h_type
from .errors import AlgebraError, DataFormatError, InputError, UnsupportedModelError
from .grids import HomotopyGrid
from .paths import SampledPath


# quaternion units on R^4 in the basis (X, J1 X, J2 X, J3 X); J[:, i] is J(e_i)
def _quaternion_units() -> np.ndarray:
    J = np.zeros((3, 4, 4))
    for k, images in enumerate([[(1, 1), (0, -1), (3, 1), (2, -1)],
                                [(2, 1), (3, -1), (0, -1), (1, 1)],
                                [(3, 1), (2, 1), (1, -1), (0, -1)]]):
        for i, (row, sign) in enumerate(images):
            J[k, row, i] = sign
    eye = np.eye(4)
    for a in range(3):
        assert np.array_equal(J[a].T, -J[a])
        for b in range(3):
            assert np.array_equal(J[a] @ J[b] + J[b] @ J[a], -2 * eye * (a == b))
    assert np.array_equal(J[0] @ J[1], J[2])
    assert np.array_equal(J[0] @ J[2], -J[1])
    assert np.array_equal(J[1] @ J[2], J[0])
    return J


QUATERNION_UNITS = _quaternion_units()


@dataclass(frozen=True)
class ModelAlgebra:
    """2-step model algebra together with its isotropic-loop kit.

    ``kit_P`` (shape ``(m,)``) and ``kit_Y`` (shape ``(s, m)``) are ``None``
    for models flagged as not surjective on isotropic loops. ``C_suriso``
    bounds ``Lip(Gamma) <= C |sigma|_inf / lam``, ``|a'| <= C |sigma| / lam``
    and ``|a(0)| <= C sqrt(s) lam``.
    """

    kind: str
    algebra: GradedAlgebra
    kit_P: np.ndarray | None = None
    kit_Y: np.ndarray | None = None
    C_suriso: float | None = None
    params: tuple = ()
    surjective: bool | None = None

    def __post_init__(self):
        if self.algebra.step != 2:
            raise AlgebraError(f"model algebra must be 2-step, got step {self.algebra.step}")
        if self.kit_P is not None:
            P = np.asarray(self.kit_P, dtype=float)
            Y = np.atleast_2d(np.asarray(self.kit_Y, dtype=float))
            m, s = self.v_dim, self.z_dim
            if P.shape != (m,) or Y.shape != (s, m):
                raise AlgebraError(f"kit needs P of shape ({m},) and Y of shape ({s}, {m})")
            b = self.b
            PY = np.einsum("klp,l,jp->jk", b, P, Y)
            YY = np.einsum("klp,il,jp->ijk", b, Y, Y)
            if not np.allclose(PY, np.eye(s), atol=1e-12) or np.abs(YY).max() > 1e-12:
                raise AlgebraError("kit must satisfy [P, Y_k] = Z_k and [Y_k, Y_l] = 0")
            object.__setattr__(self, "kit_P", P)
            object.__setattr__(self, "kit_Y", Y)
            if self.C_suriso is None:
                # |Gamma_tau|, |Gamma_t| <= |Y| |sigma|_inf / lam, |a(0)| = lam |P|
                ny = float(np.linalg.norm(Y, 2))
                object.__setattr__(self, "C_suriso",
                                   max(np.sqrt(2.0) * ny, float(np.linalg.norm(P)) / np.sqrt(s)))
            object.__setattr__(self, "surjective", True)
        elif self.surjective is None:
            object.__setattr__(self, "surjective", False)

    @property
    def v_dim(self) -> int:
        return self.algebra.layer_dims[0]

    @property
    def z_dim(self) -> int:
        return self.algebra.layer_dims[1]

    @property
    def b(self) -> np.ndarray:
        """``b[k, l, p]``: antisymmetric coefficients of ``[X_l, X_p]`` on ``Z_k``."""
        m = self.v_dim
        return self.algebra.structure[m:, :m, :m]

    @property
    def name(self) -> str:
        return self.kind + "".join(f":{p}" for p in self.params)

    @property
    def has_kit(self) -> bool:
        return self.kit_P is not None


def heisenberg_model() -> ModelAlgebra:
    alg = GradedAlgebra((2, 1), [(0, 1, 2, 1.0)], name="h1")
    return ModelAlgebra("heisenberg", alg, [1.0, 0.0], [[0.0, 1.0]], C_suriso=2.0)


def cyclic_model(s: int) -> ModelAlgebra:
    """k_s: [X_1, X_j] = Z_{j-1} for j = 2..s+1."""
    if s < 1:
        raise InputError("cyclic model needs s >= 1")
    m = s + 1
    alg = GradedAlgebra((m, s), [(0, j, m + j - 1, 1.0) for j in range(1, m)], name=f"k{s}")
    P = np.eye(m)[0]
    Y = np.eye(m)[1:]
    return ModelAlgebra("cyclic", alg, P, Y, C_suriso=float(np.sqrt(2 * s)), params=(s,))


def multi_heisenberg_model(s: int) -> ModelAlgebra:
    """[X_j, X_{s+j}] = Z_j for j = 1..s."""
    if s < 1:
        raise InputError("multi-Heisenberg model needs s >= 1")
    m = 2 * s
    alg = GradedAlgebra((m, s), [(j, s + j, m + j, 1.0) for j in range(s)], name=f"mh{s}")
    P = np.r_[np.ones(s), np.zeros(s)]
    Y = np.eye(m)[s:]
    return ModelAlgebra("multi_heisenberg", alg, P, Y, C_suriso=float(np.sqrt(2 * s)),
                        params=(s,))


def complexified_heisenberg_model() -> ModelAlgebra:
    """H-type algebra on R^4 + R^2 in the basis (X, J1 X, J2 X, J1 J2 X)."""
    alg = h_type(QUATERNION_UNITS[:2], name="ch1")
    return ModelAlgebra("complexified_heisenberg", alg, np.eye(4)[0], np.eye(4)[1:3],
                        C_suriso=2.0)


def quaternionic_model() -> ModelAlgebra:
    """Three quaternionic copies of R^4 over a shared 3-dimensional center."""
    J = np.zeros((3, 12, 12))
    for l in range(3):
        J[:, 4 * l:4 * l + 4, 4 * l:4 * l + 4] = QUATERNION_UNITS
    alg = h_type(J, name="nH3")
    P = np.zeros(12)
    P[[0, 4, 8]] = 1.0
    Y = np.zeros((3, 12))
    for l in range(3):
        Y[l, 4 * l + l + 1] = 1.0
    return ModelAlgebra("quaternionic_h3", alg, P, Y, C_suriso=float(np.sqrt(6.0)))


def quaternionic_h_type() -> GradedAlgebra:
    """Single quaternionic H-type algebra R^4 + R^3 (dimension 7)."""
    return h_type(QUATERNION_UNITS, name="qH")


def custom_model(alg: GradedAlgebra, kit: dict | None = None,
                 C_suriso: float | None = None) -> ModelAlgebra:
    if kit is None:
        return ModelAlgebra("custom", alg, surjective=False)
    try:
        P, Y = kit["P"], kit["Y"]
    except (KeyError, TypeError):
        raise DataFormatError("kit must provide fields P and Y") from None
    return ModelAlgebra("custom", alg, P, Y, C_suriso=C_suriso)


def load_custom_model(path) -> ModelAlgebra:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: {exc.msg}", line=exc.lineno) from None
    alg = GradedAlgebra.from_dict(data, name=path.stem)
    return custom_model(alg, data.get("kit"), data.get("C_suriso"))


def parse_model(spec: str) -> ModelAlgebra:
    """Model from a registry name: heisenberg, cyclic:s, multiheis:s,
    complex-heis, quaternionic or custom:<file>."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "custom":
        if not arg:
            raise InputError("custom model needs a file: custom:<path>")
        return load_custom_model(arg)
    simple = {"heisenberg": heisenberg_model, "h": heisenberg_model,
              "complex-heis": complexified_heisenberg_model,
              "quaternionic": quaternionic_model}
    param = {"cyclic": cyclic_model, "multiheis": multi_heisenberg_model}
    if name in simple and not arg:
        return simple[name]()
    if name in param:
        try:
            s = int(arg)
        except ValueError:
            raise InputError(f"model {name} needs an integer parameter, e.g. {name}:2") from None
        return param[name](s)
    raise UnsupportedModelError(f"unknown model {spec!r}")


BUILTIN_MODELS = ("heisenberg", "cyclic:1", "cyclic:2", "cyclic:3", "multiheis:1",
                  "multiheis:2", "complex-heis", "quaternionic")


# Allcock groups

@dataclass(frozen=True)
class AllcockGroup:
    model: ModelAlgebra
    copies: int
    algebra: GradedAlgebra = field(repr=False)

    @property
    def m(self) -> int:
        return self.model.v_dim

    @property
    def s(self) -> int:
        return self.model.z_dim

    @property
    def horizontal_dim(self) -> int:
        return self.m * self.copies

    def index(self, i: int, j: int) -> int:
        """Flat 0-based index of ``e_ij`` (copy ``i``, model vector ``j``, both 1-based)."""
        if not (1 <= i <= self.copies and 1 <= j <= self.m):
            raise InputError(f"e_{i}{j} out of range")
        return (i - 1) * self.m + (j - 1)

    @property
    def form(self) -> "MultiSymplecticForm":
        return MultiSymplecticForm(self.model.b, self.copies)

    def embed(self, v, copy: int = 1):
        """Embed model-layer vectors (shape ``(..., m)``) into copy ``copy``."""
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape[:-1] + (self.horizontal_dim,))
        out[..., (copy - 1) * self.m:copy * self.m] = v
        return out

    def to_dict(self) -> dict:
        return self.algebra.to_dict()


def build_allcock(model: ModelAlgebra, n: int) -> AllcockGroup:
    if int(n) != n or n < 1:
        raise InputError(f"number of copies must be a positive integer, got {n}")
    n = int(n)
    m, s = model.v_dim, model.z_dim
    entries = []
    for a, b, k, v in model.algebra.bracket_list():
        if not (a < m and b < m and k >= m):
            raise AlgebraError("model brackets must map the first layer to the center")
        for i in range(n):
            entries.append((i * m + a, i * m + b, m * n + (k - m), v))
    alg = GradedAlgebra((m * n, s), entries, name=f"Al{n}[{model.name}]")
    return AllcockGroup(model, n, alg)


# multi-symplectic form

@dataclass(frozen=True)
class MultiSymplecticForm:
    """``omega^k(u, v) = sum_j sum_{l<p} b^k_lp (u_jl v_jp - u_jp v_jl)`` on R^{mn}."""

    b: np.ndarray
    copies: int

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 3 or b.shape[1] != b.shape[2] or not np.array_equal(b, -b.transpose(0, 2, 1)):
            raise AlgebraError("b must be an antisymmetric tensor of shape (s, m, m)")
        object.__setattr__(self, "b", b)

    @property
    def s(self) -> int:
        return self.b.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    @property
    def dim(self) -> int:
        return self.m * self.copies

    def _blocks(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.dim:
            raise InputError(f"vector length {u.shape[-1]} != {self.dim}")
        return u.reshape(u.shape[:-1] + (self.copies, self.m))

    @cached_property
    def _sparse(self):
        ks, ls, ps = np.nonzero(np.triu(np.ones((self.m, self.m)), 1) * self.b)
        scatter = np.zeros((len(ks), self.s))
        scatter[np.arange(len(ks)), ks] = self.b[ks, ls, ps]
        return ls, ps, scatter

    def omega(self, u, v):
        U, V = self._blocks(u), self._blocks(v)
        l, p, scatter = self._sparse
        return (U[..., l] * V[..., p] - U[..., p] * V[..., l]).sum(axis=-2) @ scatter

    def theta(self, x, dx):
        """Primitive ``theta_x(dx) = omega(x, dx) / 2``."""
        return 0.5 * self.omega(x, dx)


def omega_eval(form: MultiSymplecticForm, u, v):
    return form.omega(u, v)


def theta_area(form: MultiSymplecticForm, loop: SampledPath):
    """Multi-symplectic area ``int_c theta`` of a closed loop.

    Periodic trapezoid rule for ``omega(c, c') / 2`` with ``c'`` from the
    periodic cubic interpolant.
    """
    if not loop.closed:
        raise InputError("theta_area needs a closed loop")
    if loop.dim != form.dim:
        raise InputError(f"loop dimension {loop.dim} != {form.dim}")
    c = loop.values[:-1]
    dc = loop.spline()(loop.times[:-1], 1)
    return 0.5 * form.omega(c, dc).sum(axis=0) * loop.h


# isotropic loop kits

class PiecewiseLinear:
    """Piecewise linear function on a uniform grid of ``[0, 1]`` with exact integral."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        self.values = v
        self.n = v.shape[0] - 1
        self.h = 1.0 / self.n
        cum = np.zeros_like(v)
        cum[1:] = np.cumsum(0.5 * self.h * (v[1:] + v[:-1]), axis=0)
        self.cumulative = cum

    def _locate(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        i = np.minimum((t * self.n).astype(int), self.n - 1)
        return i, t - i * self.h

    def __call__(self, t):
        i, u = self._locate(t)
        v0, v1 = self.values[i], self.values[i + 1]
        return v0 + (v1 - v0) * (u / self.h)[..., None]

    def integral(self, t):
        i, u = self._locate(t)
        v0, v1 = self.values[i], self.values[i + 1]
        u = u[..., None]
        return self.cumulative[i] + v0 * u + (v1 - v0) * u ** 2 / (2 * self.h)


@dataclass(frozen=True)
class IsotropicLoopKit:
    """Loop ``a`` with ``[a, a'] = sigma`` and an isotropic contraction ``Gamma``."""

    model: ModelAlgebra
    lam: float
    sigma: PiecewiseLinear = field(repr=False)
    a: SampledPath = field(repr=False)
    Gamma: HomotopyGrid = field(repr=False)
    lip_bound: float
    a0_bound: float
    sigma_sup: float
    mean_removed: np.ndarray = field(default=None, repr=False)

    @property
    def center(self) -> np.ndarray:
        return self.lam * self.model.kit_P

    def a_at(self, tau):
        A = self.sigma.integral(tau)
        return self.lam * self.model.kit_P + (A @ self.model.kit_Y) / self.lam

    def a_dot(self, tau):
        return (self.sigma(tau) @ self.model.kit_Y) / self.lam

    def gamma_at(self, tau, t):
        t = np.asarray(t, dtype=float)[..., None]
        A = self.sigma.integral(tau)
        return self.lam * self.model.kit_P + (1 - t) * (A @ self.model.kit_Y) / self.lam

    def gamma_partials(self, tau, t):
        t = np.asarray(t, dtype=float)[..., None]
        Y = self.model.kit_Y
        d_tau = (1 - t) * (self.sigma(tau) @ Y) / self.lam
        d_t = -(self.sigma.integral(tau) @ Y) / self.lam
        return d_tau, d_t

    def verify(self) -> dict:
        """Measured soundness quantities on the kit's grids.

        ``bracket_residual`` compares the midpoint-chord bracket
        ``[a_i, a_{i+1}] / h`` of the sampled loop with ``sigma`` at the cell
        midpoints, a second-order rule; ``bracket_residual_central`` uses
        central differences at the nodes instead.
        """
        alg = self.model.algebra
        m = self.model.v_dim
        a = self.a.values
        n = self.a.n
        h = 1.0 / n
        w = a[:-1]
        da = (np.roll(w, -1, axis=0) - np.roll(w, 1, axis=0)) / (2 * h)
        full = np.zeros((n, alg.dim))
        dfull = np.zeros((n, alg.dim))
        full[:, :m], dfull[:, :m] = w, da
        br = alg.bracket(full, dfull)[:, m:]
        sig = self.sigma(np.linspace(0, 1, n + 1)[:-1])
        # midpoint-chord rule: [a_i, a_{i+1}] / h against sigma at cell midpoints
        nxt = np.zeros((n, alg.dim))
        nxt[:, :m] = np.roll(w, -1, axis=0)
        chord = alg.bracket(full, nxt)[:, m:] / h
        sig_mid = self.sigma((np.arange(n) + 0.5) * h)
        G = self.Gamma.values
        ht, hs = 1.0 / self.Gamma.n_tau, 1.0 / self.Gamma.n_t
        g_tau = (G[2:, 1:-1] - G[:-2, 1:-1]) / (2 * ht)
        g_t = (G[1:-1, 2:] - G[1:-1, :-2]) / (2 * hs)
        iso = np.einsum("klp,...l,...p->...k", self.model.b, g_tau, g_t)
        tt = np.linspace(0, 1, self.Gamma.n_t + 1)
        taus = np.linspace(0, 1, self.Gamma.n_tau + 1)
        T, S = np.meshgrid(taus, tt, indexing="ij")
        p_tau, p_t = self.gamma_partials(T, S)
        lip = float(np.max(_opnorm2(p_tau, p_t)))
        return {
            "bracket_residual": float(np.abs(chord - sig_mid).max()),
            "bracket_residual_central": float(np.abs(br - sig).max()),
            "isotropy": float(np.abs(iso).max()),
            "boundary_a": float(np.abs(G[:, 0] - self.a_at(taus)).max()),
            "boundary_point": float(np.abs(G[:, -1] - self.center).max()),
            "periodicity": self.Gamma.periodicity_defect(),
            "a0": float(np.linalg.norm(a[0])),
            "lip_measured": lip,
            "adot_bound": self.model.C_suriso * self.sigma_sup / self.lam,
            "lip_bound": self.lip_bound,
            "a0_bound": self.a0_bound,
            "adot_ratio": float(np.max(np.linalg.norm(self.a_dot(taus), axis=-1) -
                                       self.model.C_suriso / self.lam *
                                       np.linalg.norm(self.sigma(taus), axis=-1))),
        }


def _opnorm2(u, v):
    """Largest singular value of the matrices with columns ``u, v``."""
    a = np.sum(u * u, axis=-1)
    b = np.sum(u * v, axis=-1)
    c = np.sum(v * v, axis=-1)
    return np.sqrt(0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + b * b))


def model_isotropic_kit(model: ModelAlgebra, sigma: SampledPath, lam: float,
                        n_t: int | None = None, mean_tol: float = 1e-8) -> IsotropicLoopKit:
    """Explicit loop realizing ``sigma`` and its isotropic contraction.

    ``sigma`` is sampled on ``[0, 1]`` and interpolated piecewise linearly;
    its trapezoidal mean must vanish up to ``mean_tol * max(1, |sigma|_inf)``
    and the remainder is subtracted so the loop closes exactly.
    """
    if not model.has_kit:
        raise UnsupportedModelError(
            f"model {model.name} has no isotropic-loop kit (not known to be surjective)")
    if not lam > 0:
        raise InputError("lambda must be positive")
    vals = np.asarray(sigma.values, dtype=float)
    if vals.shape[1] != model.z_dim:
        raise InputError(f"sigma has {vals.shape[1]} components, model center has {model.z_dim}")
    sup = float(np.linalg.norm(vals, axis=1).max())
    pl = PiecewiseLinear(vals)
    mean = pl.cumulative[-1]
    if np.abs(mean).max() > mean_tol * max(1.0, sup):
        raise InputError(f"sigma must have zero mean, got {mean}")
    pl = PiecewiseLinear(vals - mean)
    n = sigma.n
    n_t = n if n_t is None else int(n_t)
    taus = np.linspace(0, 1, n + 1)
    kit = IsotropicLoopKit(model, float(lam), pl, None, None,
                           lip_bound=model.C_suriso * (lam + sup / lam),
                           a0_bound=model.C_suriso * np.sqrt(model.z_dim) * lam,
                           sigma_sup=sup, mean_removed=mean)
    a = kit.a_at(taus)
    a[-1] = a[0]
    T, S = np.meshgrid(taus, np.linspace(0, 1, n_t + 1), indexing="ij")
    G = kit.gamma_at(T, S)
    G[-1] = G[0]
    object.__setattr__(kit, "a", SampledPath(a, closed=True))
    object.__setattr__(kit, "Gamma", HomotopyGrid(G))
    return kit
