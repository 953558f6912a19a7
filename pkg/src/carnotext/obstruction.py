"""Certificate that the free 2-step algebra on five generators is not
surjective on isotropic loops.

The target ``sigma`` has components ``t - 1/2`` on ``Z_13, Z_23, Z_14, Z_24,
Z_15`` and zero elsewhere. A loop with ``[a, a'] = sigma`` would need
``(a_1, a_1') = lam (a_2, a_2')`` (from ``sigma_12 = 0``), then ``lam = 1``
(from the 13/23 and 14/24 pairs) and finally ``sigma_15 = sigma_25``, which
fails. Independently, a least-squares fit of a discrete loop measures how far
``[a, a']`` stays from ``sigma``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import least_squares

from .errors import InputError

PAIRS = [(l, p) for l in range(1, 6) for p in range(l + 1, 6)]
ACTIVE = {(1, 3), (2, 3), (1, 4), (2, 4), (1, 5)}


def free52_sigma(t) -> np.ndarray:
    """Target curve sampled at ``t``, shape ``(len(t), 10)`` in lexicographic Z_lp order."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (len(PAIRS),))
    for i, pair in enumerate(PAIRS):
        if pair in ACTIVE:
            out[..., i] = t - 0.5
    return out


def _col(l, p):
    return PAIRS.index((l, p))


@dataclass
class ObstructionCertificate:
    n: int
    sigma_mean: np.ndarray
    chain: list
    verdict: str
    floor: float
    floor_lower_bound: float
    restarts: list = field(default_factory=list)
    loop: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"N": self.n, "sigma_mean_max": float(np.abs(self.sigma_mean).max()),
                "chain": self.chain, "verdict": self.verdict, "floor": self.floor,
                "floor_lower_bound": self.floor_lower_bound, "restarts": self.restarts}


def analytic_chain(sig: np.ndarray, atol: float = 1e-12) -> tuple[list, str]:
    """Run the proportionality argument on sampled sigma values."""
    s = lambda l, p: sig[:, _col(l, p)]
    steps = []
    nz = (np.abs(s(1, 3)) > atol) & (np.abs(s(2, 3)) > atol)
    steps.append({"step": "sigma_12 = 0 with sigma_13, sigma_23 nonzero a.e. forces "
                          "(a_1, a_1') = lam (a_2, a_2')",
                  "holds": bool(np.abs(s(1, 2)).max() <= atol and nz.mean() > 0.99)})
    lam13 = s(1, 3)[nz] / s(2, 3)[nz]
    nz4 = np.abs(s(2, 4)) > atol
    lam14 = s(1, 4)[nz4] / s(2, 4)[nz4]
    lam_value = float(np.median(lam13)) if lam13.size else float("nan")
    steps.append({"step": "sigma_1p = lam sigma_2p for p = 3, 4 forces lam = 1",
                  "lam": lam_value,
                  "holds": bool(lam13.size and np.allclose(lam13, 1.0, atol=atol)
                                and np.allclose(lam14, 1.0, atol=atol))})
    defect = float(np.abs(s(1, 5) - lam_value * s(2, 5)).max())
    steps.append({"step": "sigma_15 = lam sigma_25 required", "defect": defect,
                  "holds": bool(defect <= atol)})
    feasible = all(st["holds"] for st in steps)
    if not (steps[0]["holds"] and steps[1]["holds"]):
        verdict = "inconclusive"
    else:
        verdict = "feasible" if feasible else "infeasible"
    return steps, verdict


def decomposable_distance_factor() -> float:
    """Distance from ``B = sum_active Z_lp`` to the cone of decomposable bivectors.

    As a skew matrix, ``B`` has singular values ``mu_1 >= mu_2`` (each twice);
    bivectors ``a ^ a'`` have rank at most 2, so the distance is ``mu_2``.
    """
    B = np.zeros((5, 5))
    for (l, p) in ACTIVE:
        B[l - 1, p - 1] = 1.0
        B[p - 1, l - 1] = -1.0
    sv = np.linalg.svd(B, compute_uv=False)
    return float(sv[2])


def _residual(x, n, target, h):
    a = x.reshape(n, 5)
    b = np.roll(a, -1, axis=0)
    w = np.sqrt(h)
    cols = [a[:, l - 1] * b[:, p - 1] - a[:, p - 1] * b[:, l - 1] for (l, p) in PAIRS]
    return (w * (np.stack(cols, axis=1) / h - target)).ravel()


def _jacobian(x, n, target, h):
    a = x.reshape(n, 5)
    b = np.roll(a, -1, axis=0)
    c = 1.0 / np.sqrt(h)
    rows, cols, vals = [], [], []
    i = np.arange(n)
    nxt = (i + 1) % n
    for r, (l, p) in enumerate(PAIRS):
        row = i * len(PAIRS) + r
        for var, val in ((i * 5 + l - 1, b[:, p - 1]), (i * 5 + p - 1, -b[:, l - 1]),
                         (nxt * 5 + p - 1, a[:, l - 1]), (nxt * 5 + l - 1, -a[:, p - 1])):
            rows.append(row)
            cols.append(var)
            vals.append(c * val)
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(n * len(PAIRS), n * 5))


def least_squares_floor(n: int, seed: int = 0, restarts: int = 2, scale: float = 0.5,
                        max_nfev: int = 100):
    """Minimize ``|| [a, a'] - sigma ||_L2`` over periodic nodal loops ``a``.

    On each cell ``[a, a']`` is taken as ``[a_i, a_{i+1}] / h``, the bracket of
    the chord midpoint with the chord slope, and compared with sigma at the
    cell midpoint.
    """
    h = 1.0 / n
    target = free52_sigma((np.arange(n) + 0.5) * h)
    rng = np.random.default_rng(seed)
    best, runs = None, []
    for _ in range(restarts):
        x0 = scale * rng.standard_normal(n * 5)
        res = least_squares(_residual, x0, jac=_jacobian, args=(n, target, h),
                            method="trf", x_scale="jac", max_nfev=max_nfev,
                            xtol=1e-12, ftol=1e-10)
        val = float(np.linalg.norm(res.fun))
        runs.append(val)
        if best is None or val < best[0]:
            best = (val, res.x.reshape(n, 5))
    return best[0], best[1], runs


def free52_obstruction(n: int = 256, seed: int = 0, restarts: int = 2) -> ObstructionCertificate:
    if n < 64:
        raise InputError("free52_obstruction needs N >= 64")
    t = np.linspace(0, 1, n + 1)
    sig = free52_sigma(t)
    mean = 0.5 * (sig[1:] + sig[:-1]).sum(axis=0) / n
    chain, verdict = analytic_chain(sig[np.abs(t - 0.5) > 1e-12])
    floor, loop, runs = least_squares_floor(n, seed, restarts)
    h = 1.0 / n
    mid = (np.arange(n) + 0.5) * h
    lower = decomposable_distance_factor() * float(np.sqrt(h * np.sum((mid - 0.5) ** 2)))
    return ObstructionCertificate(n, mean, chain, verdict, floor, lower, runs, loop)
