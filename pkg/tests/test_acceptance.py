"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected into a summary printed at the end of the
pytest run. Run standalone with ``python3 tests/test_acceptance.py``.
"""
import time

import numpy as np
import pytest

from carnotext.algebra import engel, heisenberg, parabolic
from carnotext.allcock import (BUILTIN_MODELS, build_allcock, heisenberg_model,
                               model_isotropic_kit, parse_model, quaternionic_h_type,
                               quaternionic_model)
from carnotext.contact import (contact_residual_curve, contact_residual_map,
                               heisenberg_affine_map, heisenberg_affine_vertical, horizontal_length,
                               horizontal_lift, lipschitz_ratio, non_lipschitz_map_I,
                               piecewise_horizontal_approx)
from carnotext.ensemble import lift_loop, loop_seeds, make_loop
from carnotext.errors import InputError
from carnotext.extension import extend_group_loop
from carnotext.isoperimetry import (homotopy_area_breakdown, horizontal_loop_length,
                                    horizontal_subgroup_bound, isoperimetric_ratio,
                                    riemannian_comparison)
from carnotext.obstruction import free52_obstruction
from carnotext.paths import SampledPath

RESULTS = {}

ENSEMBLE_SIZE = 50
ENSEMBLE_SEED = 0


def report(number, title, ok, detail):
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def slope(h, y):
    return float(np.polyfit(np.log(h), np.log(y), 1)[0])


def unit_circle(n, based=False):
    t = np.linspace(0, 1, n + 1)
    c = np.stack([np.cos(2 * np.pi * t) - (1 if based else 0), np.sin(2 * np.pi * t)], 1)
    c[-1] = c[0]
    return SampledPath(c, closed=True)


def zero_mean_sigma(rng, s, n, modes=3):
    t = np.linspace(0, 1, n + 1)
    k = np.arange(1, modes + 1)
    ang = 2 * np.pi * np.outer(t, k)
    v = np.cos(ang) @ rng.standard_normal((modes, s)) + np.sin(ang) @ rng.standard_normal((modes, s))
    return SampledPath(v, closed=True)


# 1

def test_criterion_01_group_law():
    t0 = time.perf_counter()
    algebras = [heisenberg(1), parse_model("cyclic:2").algebra, parse_model("multiheis:2").algebra,
                parse_model("complex-heis").algebra, quaternionic_h_type(), engel(), parabolic(2)]
    rng = np.random.default_rng(1)
    worst = 0.0
    for alg in algebras:
        x, y, z = (alg.random_vector(rng, 100) for _ in range(3))
        zero = np.zeros(alg.dim)
        errs = [alg.bch_product(x, zero) - x, alg.bch_product(zero, x) - x,
                alg.bch_product(x, alg.inverse(x)),
                alg.bch_product(alg.bch_product(x, y), z) - alg.bch_product(x, alg.bch_product(y, z))]
        for r in (0.5, 3.0):
            errs.append(alg.dilate(r, alg.bch_product(x, y)) -
                        alg.bch_product(alg.dilate(r, x), alg.dilate(r, y)))
        worst = max(worst, max(float(np.abs(e).max()) for e in errs))
    dt = time.perf_counter() - t0
    report(1, "group law on 7 algebras", worst <= 1e-12 and dt < 10,
           f"max error {worst:.2e} (tol 1e-12), {dt:.2f} s (limit 10 s)")


# 2

def test_criterion_02_lifting():
    h1 = heisenberg(1)
    lift = horizontal_lift(h1, unit_circle(4096))
    err = abs(lift.values[-1, 2] - lift.values[0, 2] - np.pi)
    ns = [64, 128, 256, 512]
    res = []
    for n in ns:
        t = np.linspace(0, 1, n + 1)
        c = np.stack([np.cos(2 * np.pi * t) + 0.3 * np.cos(6 * np.pi * t),
                      np.sin(2 * np.pi * t) - 0.2 * np.sin(4 * np.pi * t)], 1)
        c[-1] = c[0]
        res.append(contact_residual_curve(h1, horizontal_lift(h1, SampledPath(c, closed=True))).sup)
    orders = [float(np.log2(a / b)) for a, b in zip(res, res[1:])]
    report(2, "horizontal lift", err <= 1e-6 and min(orders) >= 1.9,
           f"holonomy error {err:.2e} (tol 1e-6), residual orders "
           f"{', '.join(f'{o:.3f}' for o in orders)} (min 1.9)")


# 3

def test_criterion_03_piecewise_horizontal():
    h1 = heisenberg(1)
    lift = horizontal_lift(h1, unit_circle(4096, based=True))
    length = horizontal_length(h1, piecewise_horizontal_approx(h1, lift, 256))
    rel = abs(length - 2 * np.pi) / (2 * np.pi)
    dists = []
    for k in (8, 32, 128):
        pw = piecewise_horizontal_approx(h1, lift, k)
        dists.append(float(h1.gauge_quasidistance(pw.values, lift.values).max()))
    decreasing = all(a > b for a, b in zip(dists, dists[1:]))
    report(3, "piecewise horizontal approximation", rel <= 0.01 and decreasing,
           f"k=256 length relative error {rel:.2e} (tol 1e-2), sup gauge distance for k=8,32,128 "
           f"{', '.join(f'{d:.3e}' for d in dists)}")


# 4

def test_criterion_04_non_lipschitz():
    h1 = heisenberg(1)
    hs = 2.0 ** -np.arange(4, 13)
    ratios = []
    for h in hs:
        t = np.arange(0, 1 + h / 2, h)
        pts = np.stack([0 * t, 0 * t, t], 1)
        ratios.append(lipschitz_ratio(h1, t, pts))
    s = slope(hs, ratios)
    g = np.linspace(-1, 1, 21)
    P = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
    keep = (np.linalg.norm(P, axis=1) <= 1) & (np.abs(P[:, 2] + P[:, 0] * P[:, 1]) > 0.1) & \
        (P[:, 0] ** 2 > 0.01)
    res = contact_residual_map(h1, h1, non_lipschitz_map_I, P[keep], 1e-5)
    pointwise = np.abs(res).max(axis=(1, 2))
    low = float(pointwise.min())
    report(4, "non-Lipschitz witnesses", abs(s + 0.5) <= 0.05 and low >= 0.5,
           f"vertical-curve log-log slope {s:.4f} (target -0.5 +- 0.05), map I min residual "
           f"{low:.3f} on {int(keep.sum())} ball nodes (min 0.5)")


# 5

def test_criterion_05_affine_heisenberg():
    h1 = heisenberg(1)
    rng = np.random.default_rng(5)
    g = np.linspace(-1, 1, 64)
    X = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    worst = 0.0
    for _ in range(100):
        a = rng.standard_normal(2)
        A = np.outer(a, rng.standard_normal(2))
        b, tau, t = rng.standard_normal(2), rng.standard_normal(), rng.standard_normal()
        F = heisenberg_affine_map(A, a, b, tau)
        P = np.c_[X, np.full(len(X), t)]
        worst = max(worst, float(np.abs(contact_residual_map(h1, h1, F, P, 1e-3)).max()))
    rejected = 0
    for _ in range(100):
        A, a, b = rng.standard_normal((2, 2)), rng.standard_normal(2), rng.standard_normal(2)
        try:
            heisenberg_affine_vertical(A, a, b, 0.0)
        except InputError:
            rejected += 1
    report(5, "affine Heisenberg maps", worst < 1e-8 and rejected == 100,
           f"max contact residual {worst:.2e} on 64^2 grids (tol 1e-8), "
           f"{rejected}/100 inadmissible triples rejected")


# 6

def test_criterion_06_model_kits():
    worst = worst_c = 0.0
    sound = True
    for name in BUILTIN_MODELS:
        model = parse_model(name)
        for s in loop_seeds(6, 50):
            rng = np.random.default_rng(s)
            lam = rng.uniform(0.5, 2.0)
            kit = model_isotropic_kit(model, zero_mean_sigma(rng, model.z_dim, 1024), lam, n_t=8)
            v = kit.verify()
            worst = max(worst, v["bracket_residual"])
            worst_c = max(worst_c, v["bracket_residual_central"])
            sound &= (v["isotropy"] <= 1e-10 and v["boundary_a"] <= 1e-12
                      and v["boundary_point"] <= 1e-12 and v["periodicity"] == 0
                      and v["lip_measured"] <= v["lip_bound"] * (1 + 1e-12)
                      and v["a0"] <= v["a0_bound"] * (1 + 1e-12) and v["adot_ratio"] <= 1e-12)
    rng = np.random.default_rng(60)
    lam = 1.7
    a0_h = np.linalg.norm(model_isotropic_kit(heisenberg_model(), zero_mean_sigma(rng, 1, 1024),
                                              lam, n_t=2).a.values[0])
    a0_q = np.linalg.norm(model_isotropic_kit(quaternionic_model(), zero_mean_sigma(rng, 3, 1024),
                                              lam, n_t=2).a.values[0])
    e_h, e_q = abs(a0_h - lam), abs(a0_q - np.sqrt(3) * lam)
    report(6, "model kits", worst <= 1e-4 and sound and e_h <= 1e-12 and e_q <= 1e-12,
           f"max [a,a']-sigma {worst:.2e} (central differences {worst_c:.2e}) over {len(BUILTIN_MODELS)} models x 50 sigma (tol 1e-4), "
           f"invariants {'hold' if sound else 'violated'}, |a(0)| errors {e_h:.1e} / {e_q:.1e}")


# 7

def test_criterion_07_obstruction():
    c256 = free52_obstruction(256)
    c512 = free52_obstruction(512)
    ok = c256.verdict == "infeasible" and c512.verdict == "infeasible" and c512.floor > 0.5 * c256.floor
    report(7, "free 2-step obstruction", ok,
           f"verdict {c256.verdict}, floor {c256.floor:.5f} (N=256) -> {c512.floor:.5f} (N=512), "
           f"ratio {c512.floor / c256.floor:.3f} (must exceed 0.5)")


# 8, 9, 10 share one seeded ensemble

@pytest.fixture(scope="module")
def H2():
    return build_allcock(heisenberg_model(), 2)


def _member(group, seed, grid, extra):
    t0 = time.perf_counter()
    Gamma = lift_loop(group, make_loop(group, "fourier", seed, 16 * grid))
    Phi, rec = extend_group_loop(group, Gamma, grid, gauge_lipschitz=False)
    areas = homotopy_area_breakdown(rec, strict=False)
    row = {"time": time.perf_counter() - t0, "boundary": Phi.info["boundary_error"],
           "residual": Phi.info["closedness_residual"], "areas": areas}
    if extra:
        rc = riemannian_comparison(group, Phi)
        length = horizontal_loop_length(group, Gamma)
        row.update(ratio=rc["sr_area"] / length ** 2, rc=rc)
    return row


@pytest.fixture(scope="module")
def ensemble(H2):
    seeds = loop_seeds(ENSEMBLE_SEED, ENSEMBLE_SIZE)
    return {grid: [_member(H2, s, grid, True) for s in seeds] for grid in (512, 256)}


def test_criterion_08_extension_pipeline(H2, ensemble):
    from conftest import figure_eight
    rows = ensemble[512]
    h = 1 / 512
    bnd = max(r["boundary"] for r in rows)
    res = max(r["residual"] for r in rows)
    g1 = max(r["areas"].per_stage["Gamma1"] for r in rows)
    g2 = max(r["areas"].per_stage["Gamma2"] / r["areas"].bounds["Gamma2"] for r in rows)
    g3 = max(r["areas"].per_stage["Gamma3"] / r["areas"].bounds["Gamma3"] for r in rows)
    runtime = sum(r["time"] for r in rows)
    eight, _ = extend_group_loop(H2, horizontal_lift(H2.algebra, figure_eight(512)), 512,
                                 gauge_lipschitz=False)
    bnd = max(bnd, eight.info["boundary_error"])
    res = max(res, eight.info["closedness_residual"])
    ok = bnd <= 2 * h and res <= 1e-3 and g1 == 0.0 and g2 <= 1 and g3 <= 1 and runtime <= 60
    report(8, "extension pipeline on H^2", ok,
           f"N=512, {len(rows)} loops + figure-eight: boundary {bnd:.2e} (2h = {2 * h:.2e}), "
           f"pullback residual {res:.2e} (tol 1e-3), Gamma1 area {g1:g}, Gamma2/bound {g2:.3f}, "
           f"Gamma3/bound {g3:.3f}, ensemble runtime {runtime:.1f} s (limit 60 s)")


def test_criterion_09_vertical_completion(H2):
    from conftest import figure_eight
    grids = [128, 256, 512]
    audit, bnd = [], []
    for n in grids:
        Gamma = horizontal_lift(H2.algebra, figure_eight(16 * n))
        Phi, _ = extend_group_loop(H2, Gamma, n, gauge_lipschitz=False)
        audit.append(Phi.info["audit_discrepancy"])
        bnd.append(Phi.info["boundary_discrepancy"])
    hs = 1 / np.array(grids)
    s_audit, s_bnd = slope(hs, audit), slope(hs, bnd)
    ok = s_audit >= 0.9 and s_bnd >= 0.9 and all(b <= h for b, h in zip(bnd, hs))
    report(9, "vertical completion", ok,
           f"two-path discrepancy {', '.join(f'{a:.2e}' for a in audit)} (order {s_audit:.2f}, "
           f"min 0.9); boundary {', '.join(f'{b:.2e}' for b in bnd)} (order {s_bnd:.2f}, each <= h)")


def test_criterion_10_isoperimetry(H2, ensemble):
    from conftest import figure_eight
    drift = 0.0
    loops = [horizontal_lift(H2.algebra, figure_eight(256))]
    loops += [lift_loop(H2, make_loop(H2, "fourier", s, 16 * 256)) for s in loop_seeds(10, 3)]
    for G in loops:
        base = isoperimetric_ratio(H2, G, 256).ratio
        for r in (0.5, 2.0):
            scaled = G.with_values(H2.algebra.dilate(r, G.values))
            drift = max(drift, abs(isoperimetric_ratio(H2, scaled, 256).ratio / base - 1))
    m512 = max(r["ratio"] for r in ensemble[512])
    m256 = max(r["ratio"] for r in ensemble[256])
    change = abs(m512 / m256 - 1)
    exa = all(r["rc"]["holds"] for g in ensemble for r in ensemble[g])
    ok = drift <= 0.01 and change <= 0.2 and exa
    report(10, "isoperimetry", ok,
           f"dilation drift {drift:.1e} (tol 1e-2), ensemble max ratio {m256:.4f} (N=256) -> "
           f"{m512:.4f} (N=512), change {change:.1e} (tol 0.2), Riemannian comparison "
           f"{'holds' if exa else 'fails'} on all {2 * ENSEMBLE_SIZE} runs")


def test_ensemble_area_refinement(ensemble):
    """Reported areas move by less than 1% from N=256 to N=512 on the ensemble."""
    worst = 0.0
    for a, b in zip(ensemble[256], ensemble[512]):
        worst = max(worst, abs(b["rc"]["sr_area"] / a["rc"]["sr_area"] - 1))
        for k, v in b["areas"].per_stage.items():
            if v > 1e-6 * b["areas"].total:
                worst = max(worst, abs(v / a["areas"].per_stage[k] - 1))
    print(f"area refinement 256 -> 512: max relative change {worst:.2e}")
    assert worst < 0.01


# 11

def test_criterion_11_horizontal_subgroup():
    rng = np.random.default_rng(11)
    worst = 0.0
    for alg, planes in ((heisenberg(2), [[0, 1], [2, 3], [0, 3]]),
                        (build_allcock(heisenberg_model(), 3).algebra, [[0, 2, 4], [1, 3, 5]])):
        for idx in planes:
            for _ in range(20):
                x, y = np.zeros(alg.dim), np.zeros(alg.dim)
                x[idx], y[idx] = rng.standard_normal((2, len(idx)))
                r = horizontal_subgroup_bound(alg, x, y)
                worst = max(worst, abs(r["bound"] - r["euclidean"]))
    report(11, "horizontal subgroup distance", worst <= 1e-6,
           f"max |CC bound - euclidean| {worst:.2e} over 100 pairs (tol 1e-6)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
