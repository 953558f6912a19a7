"""Graded nilpotent Lie algebras in exponential coordinates.

A :class:`GradedAlgebra` is defined by structure constants ``c[k, a, b]``
(so that ``[e_a, e_b] = sum_k c[k, a, b] e_k``) over a basis ordered layer by
layer. Algebra vectors and group points are plain ``ndarray`` objects whose
last axis has length ``alg.dim``; leading axes broadcast. Since ``exp`` is the
identity in exponential coordinates, the group law is the BCH product.
"""
from __future__ import annotations

import json
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import bernoulli, factorial

from .errors import AlgebraError, DataFormatError, InputError


class GradedAlgebra:
    """Nilpotent graded Lie algebra with a layer-major orthonormal basis.

    Parameters
    ----------
    layer_dims : sequence of int
        Dimensions ``(d_1, ..., d_u)`` of the layers.
    brackets : iterable of (a, b, k, value)
        Sparse structure constants, 0-based. Only one of ``(a, b)`` and
        ``(b, a)`` needs to be given; the other is filled by antisymmetry.
    name : str, optional
    check : bool
        Verify grading and the Jacobi identity on all basis triples.
    """

    def __init__(self, layer_dims, brackets=(), name: str | None = None,
                 check: bool = True, atol: float = 1e-12):
        dims = tuple(int(d) for d in layer_dims)
        if not dims or any(d < 0 for d in dims) or dims[0] == 0:
            raise AlgebraError(f"invalid layer dimensions {list(layer_dims)}")
        while len(dims) > 1 and dims[-1] == 0:
            dims = dims[:-1]
        self.layer_dims = dims
        self.step = len(dims)
        self.dim = sum(dims)
        self.name = name or f"graded{list(dims)}"
        offsets = np.concatenate([[0], np.cumsum(dims)])
        self.layer_slices = tuple(slice(int(offsets[j]), int(offsets[j + 1]))
                                  for j in range(self.step))
        self.layer_of = np.repeat(np.arange(1, self.step + 1), dims)

        q = self.dim
        c = np.zeros((q, q, q))
        given = np.zeros((q, q, q), dtype=bool)
        for entry in brackets:
            if len(entry) != 4:
                raise AlgebraError(f"bracket entry {entry!r} is not (a, b, k, value)")
            a, b, k, v = int(entry[0]), int(entry[1]), int(entry[2]), float(entry[3])
            if not all(0 <= i < q for i in (a, b, k)):
                raise AlgebraError(f"bracket index out of range in {entry!r}")
            if a == b:
                if v != 0.0:
                    raise AlgebraError(f"[e_{a}, e_{a}] must vanish, got {v}")
                continue
            for (i, j, s) in ((a, b, v), (b, a, -v)):
                if given[k, i, j] and c[k, i, j] != s:
                    raise AlgebraError(f"conflicting values for c^{k}_({i},{j})")
                c[k, i, j] = s
                given[k, i, j] = True
        c.setflags(write=False)
        self.structure = c
        if check:
            self._validate(atol)

    def _validate(self, atol: float) -> None:
        c = self.structure
        lay = self.layer_of
        nz = np.argwhere(c != 0)
        for k, a, b in nz:
            if lay[k] != lay[a] + lay[b]:
                raise AlgebraError(
                    f"grading violated: [e_{a}, e_{b}] has a component on e_{k} "
                    f"(layers {lay[a]}+{lay[b]} -> {lay[k]})")
        # J[k,a,b,d] = [[e_a,e_b],e_d] + cyclic
        t = np.einsum("mab,kmd->kabd", c, c)
        jac = t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)
        err = np.abs(jac).max(initial=0.0)
        if err > atol:
            raise AlgebraError(f"Jacobi identity fails, max defect {err:.3e}")

    # construction helpers

    @classmethod
    def from_structure(cls, layer_dims, structure, name=None, check=True):
        c = np.asarray(structure, dtype=float)
        ks, as_, bs = np.nonzero(c)
        entries = [(a, b, k, c[k, a, b]) for k, a, b in zip(ks, as_, bs) if a < b]
        alg = cls(layer_dims, entries, name=name, check=False)
        if not np.array_equal(alg.structure, c):
            raise AlgebraError("structure tensor is not antisymmetric")
        if check:
            alg._validate(1e-12)
        return alg

    def bracket_list(self):
        """Sparse ``(a, b, k, value)`` list with ``a < b``."""
        ks, as_, bs = np.nonzero(self.structure)
        return [(int(a), int(b), int(k), float(self.structure[k, a, b]))
                for k, a, b in sorted(zip(ks, as_, bs), key=lambda e: (e[1], e[2], e[0]))
                if a < b]

    def to_dict(self) -> dict:
        return {"step": self.step, "layer_dims": list(self.layer_dims),
                "brackets": [list(e) for e in self.bracket_list()]}

    @classmethod
    def from_dict(cls, data: dict, name=None) -> "GradedAlgebra":
        try:
            dims = data["layer_dims"]
            brackets = data.get("brackets", [])
        except (KeyError, TypeError) as exc:
            raise DataFormatError(f"algebra definition lacks field {exc}") from None
        alg = cls(dims, brackets, name=name or data.get("name"))
        if "step" in data and int(data["step"]) != alg.step:
            raise DataFormatError(
                f"declared step {data['step']} but layer_dims give {alg.step}")
        return alg

    @classmethod
    def load(cls, path) -> "GradedAlgebra":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc.msg}", line=exc.lineno) from None
        return cls.from_dict(data, name=path.stem)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    def __repr__(self) -> str:
        return f"GradedAlgebra({self.name!r}, layer_dims={list(self.layer_dims)})"

    # arithmetic

    def _check(self, *xs):
        out = []
        for x in xs:
            x = np.asarray(x, dtype=float)
            if x.ndim == 0 or x.shape[-1] != self.dim:
                raise InputError(
                    f"vector of shape {x.shape} does not match algebra dimension {self.dim}")
            out.append(x)
        return out if len(out) > 1 else out[0]

    @cached_property
    def _sparse(self):
        # entries a < b of c[k, a, b] and the scatter matrix onto k
        ks, as_, bs = np.nonzero(np.triu(np.ones((self.dim, self.dim)), 1) * self.structure)
        scatter = np.zeros((len(ks), self.dim))
        scatter[np.arange(len(ks)), ks] = self.structure[ks, as_, bs]
        return as_, bs, scatter

    def bracket(self, x, y):
        x, y = self._check(x, y)
        a, b, scatter = self._sparse
        return (x[..., a] * y[..., b] - x[..., b] * y[..., a]) @ scatter

    def iterated_bracket(self, x, y, k: int):
        """``[x, y]_k``: ``k``-fold left multiplication by ``ad x``."""
        if k < 0:
            raise InputError("bracket depth must be nonnegative")
        x, y = self._check(x, y)
        out = np.broadcast_to(y, np.broadcast_shapes(x.shape, y.shape)).copy()
        for _ in range(k):
            out = self.bracket(x, out)
        return out

    @cached_property
    def _bch_weights(self):
        # K_2p = B_2p / (2p)!
        b = bernoulli(self.step + 1)
        return {2 * p: b[2 * p] / factorial(2 * p, exact=True)
                for p in range(1, self.step // 2 + 1)}

    def bch_product(self, x, y):
        """Group product ``x o y = log(exp x exp y)`` via the Dynkin recursion."""
        x, y = self._check(x, y)
        shape = np.broadcast_shapes(x.shape, y.shape)
        x = np.broadcast_to(x, shape)
        y = np.broadcast_to(y, shape)
        if self.step == 1:
            return x + y
        if self.step == 2:
            return x + y + 0.5 * self.bracket(x, y)
        s0 = x + y
        d = x - y
        c = {1: s0}
        zero = np.zeros(shape)
        # S[(r, n)] = sum over compositions k_1+..+k_r = n of [c_k1,[..,[c_kr, x+y]]]
        S = {(0, 0): s0}

        def S_get(r, n):
            if r == 0:
                return s0 if n == 0 else zero
            if n < r:
                return zero
            key = (r, n)
            if key not in S:
                acc = np.zeros(shape)
                for k in range(1, n - r + 2):
                    acc = acc + self.bracket(c[k], S_get(r - 1, n - k))
                S[key] = acc
            return S[key]

        for n in range(1, self.step):
            nxt = 0.5 * self.bracket(d, c[n])
            for two_p, w in self._bch_weights.items():
                if two_p <= n:
                    nxt = nxt + w * S_get(two_p, n)
            c[n + 1] = nxt / (n + 1)
        return sum(c[n] for n in range(1, self.step + 1))

    def inverse(self, x):
        return -self._check(x)

    def dilate(self, r: float, x):
        if not np.isfinite(r) or r <= 0:
            raise InputError(f"dilation factor must be positive, got {r}")
        x = self._check(x)
        return x * (float(r) ** self.layer_of)

    def layer_project(self, x, j: int):
        if not 1 <= j <= self.step:
            raise InputError(f"layer {j} out of range 1..{self.step}")
        x = self._check(x)
        out = np.zeros_like(x)
        sl = self.layer_slices[j - 1]
        out[..., sl] = x[..., sl]
        return out

    def layer(self, x, j: int):
        """Coefficients of layer ``j`` only (shape ``(..., d_j)``)."""
        if not 1 <= j <= self.step:
            raise InputError(f"layer {j} out of range 1..{self.step}")
        return self._check(x)[..., self.layer_slices[j - 1]]

    def homogeneous_norm(self, x):
        x = self._check(x)
        total = 0.0
        for j, sl in enumerate(self.layer_slices, start=1):
            nj = np.linalg.norm(x[..., sl], axis=-1)
            total = total + (nj if j == 1 else nj ** (1.0 / j))
        return total

    def gauge_quasidistance(self, x, y):
        x, y = self._check(x, y)
        return self.homogeneous_norm(self.bch_product(-x, y))

    @cached_property
    def beta(self) -> float:
        """Bound ``|[x, y]| <= beta |x| |y|``: spectral norm of the flattened tensor."""
        if not self.structure.any():
            return 0.0
        return float(np.linalg.norm(self.structure.reshape(self.dim, -1), 2))

    def basis(self, i: int):
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def random_vector(self, rng, size=None, scale: float = 1.0):
        shape = (self.dim,) if size is None else tuple(np.atleast_1d(size)) + (self.dim,)
        return scale * rng.standard_normal(shape)


def gauge_constants(alg: GradedAlgebra, rng, n: int = 2000, scale: float = 1.0) -> dict:
    """Sampled symmetry and quasi-triangle constants of the gauge distance."""
    x, y, z = (alg.random_vector(rng, n, scale) for _ in range(3))
    dxy = alg.gauge_quasidistance(x, y)
    dyx = alg.gauge_quasidistance(y, x)
    dyz = alg.gauge_quasidistance(y, z)
    dxz = alg.gauge_quasidistance(x, z)
    return {"symmetry": float(np.max(np.maximum(dxy / dyx, dyx / dxy))),
            "triangle": float(np.max(dxz / (dxy + dyz)))}


# fixtures and standard examples

def heisenberg(n: int = 1) -> GradedAlgebra:
    """Heisenberg algebra h^n with basis (x_1..x_n, y_1..y_n, z), [x_i, y_i] = z."""
    return GradedAlgebra((2 * n, 1), [(i, n + i, 2 * n, 1.0) for i in range(n)],
                         name=f"h{n}")


def engel() -> GradedAlgebra:
    """Filiform 3-step algebra: [X1, X2] = X3, [X1, X3] = X4."""
    return GradedAlgebra((2, 1, 1), [(0, 1, 2, 1.0), (0, 2, 3, 1.0)], name="engel")


def parabolic(n: int = 1) -> GradedAlgebra:
    """Abelian R^n x R graded with weights 1 and 2."""
    return GradedAlgebra((n, 1), [], name=f"parabolic{n}")


def upper_triangular(d: int) -> GradedAlgebra:
    """Strictly upper triangular d x d matrices, graded by superdiagonal.

    Basis ordering is layer-major: layer k holds ``E_{i,i+k}`` for increasing i.
    """
    if d < 2:
        raise InputError("need d >= 2")
    index = {}
    dims = []
    for k in range(1, d):
        dims.append(d - k)
        for i in range(d - k):
            index[(i, i + k)] = len(index)
    entries = []
    for (a, b), p in index.items():
        for (cc, dd), r in index.items():
            # [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
            if b == cc and (a, dd) in index:
                entries.append((p, r, index[(a, dd)], 1.0))
    return GradedAlgebra(dims, [e for e in entries], name=f"n{d}")


def upper_triangular_matrix(d: int, x):
    """Matrix realization of a vector of :func:`upper_triangular` ``(d)``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (d, d))
    p = 0
    for k in range(1, d):
        for i in range(d - k):
            out[..., i, i + k] = x[..., p]
            p += 1
    return out


def free_two_step(r: int) -> GradedAlgebra:
    """Free 2-step nilpotent algebra on r generators, Z_lp = [X_l, X_p] for l < p."""
    pairs = [(l, p) for l in range(r) for p in range(l + 1, r)]
    return GradedAlgebra((r, len(pairs)), [(l, p, r + i, 1.0) for i, (l, p) in enumerate(pairs)],
                         name=f"g{r},2")


def h_type(J, name: str | None = None) -> GradedAlgebra:
    """H-type algebra from skew matrices J_k on R^m with [u, v]^k = <J_k u, v>."""
    J = np.asarray(J, dtype=float)
    s, m, _ = J.shape
    if not np.allclose(J, -J.transpose(0, 2, 1), atol=1e-14):
        raise AlgebraError("J matrices must be skew-symmetric")
    entries = []
    for k in range(s):
        # <J u, v> = sum_{a,b} J[b, a] u_a v_b
        for a in range(m):
            for b in range(a + 1, m):
                if J[k, b, a] != 0:
                    entries.append((a, b, m + k, J[k, b, a]))
    return GradedAlgebra((m, s), entries, name=name)
