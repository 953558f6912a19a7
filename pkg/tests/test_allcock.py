import numpy as np
import pytest

from carnotext.allcock import (BUILTIN_MODELS, MultiSymplecticForm, build_allcock,
                               heisenberg_model, model_isotropic_kit, parse_model,
                               quaternionic_model, theta_area)
from carnotext.errors import InputError, UnsupportedModelError
from carnotext.paths import SampledPath

from conftest import circle


def zero_mean_sigma(rng, s, n, modes=3):
    t = np.linspace(0, 1, n + 1)
    k = np.arange(1, modes + 1)
    A = rng.standard_normal((modes, s))
    B = rng.standard_normal((modes, s))
    ang = 2 * np.pi * np.outer(t, k)
    return SampledPath(np.cos(ang) @ A + np.sin(ang) @ B, closed=True)


@pytest.mark.parametrize("copies", [1, 2, 3])
def test_allcock_dims(copies):
    g = build_allcock(heisenberg_model(), copies)
    assert g.algebra.layer_dims == (2 * copies, 1)
    assert g.horizontal_dim == 2 * copies


def test_cross_copy_brackets_vanish(rng):
    g = build_allcock(quaternionic_model(), 2)
    alg = g.algebra
    u = g.embed(rng.standard_normal(g.m), copy=1)
    v = g.embed(rng.standard_normal(g.m), copy=2)
    U, V = np.zeros(alg.dim), np.zeros(alg.dim)
    U[:g.horizontal_dim], V[:g.horizontal_dim] = u, v
    assert np.abs(alg.bracket(U, V)).max() == 0


def test_omega_examples():
    g = build_allcock(heisenberg_model(), 2)
    f = g.form
    e = np.eye(4)
    assert f.omega(e[0], e[1])[0] == 1.0
    assert f.omega(e[2], e[3])[0] == 1.0
    assert f.omega(e[0], e[3])[0] == 0.0
    assert f.omega(e[1], e[0])[0] == -1.0


def test_omega_matches_bracket(rng):
    for name in BUILTIN_MODELS:
        g = build_allcock(parse_model(name), 2)
        x, y = g.algebra.random_vector(rng), g.algebra.random_vector(rng)
        d = g.horizontal_dim
        xh, yh = x.copy(), y.copy()
        xh[d:] = yh[d:] = 0
        assert np.allclose(g.form.omega(x[:d], y[:d]), g.algebra.bracket(xh, yh)[d:], atol=1e-13)


def test_form_validation():
    with pytest.raises(Exception):
        MultiSymplecticForm(np.ones((1, 2, 2)), 1)


def test_theta_area_circle_and_figure_eight():
    f = build_allcock(heisenberg_model(), 1).form
    assert theta_area(f, circle(256))[0] == pytest.approx(np.pi, abs=1e-7)
    t = np.linspace(0, 1, 257)
    eight = SampledPath(np.stack([np.sin(2 * np.pi * t), 0.5 * np.sin(4 * np.pi * t)], 1),
                        closed=True)
    assert abs(theta_area(f, eight)[0]) < 1e-14


def test_heisenberg_kit_closed_form():
    t = np.linspace(0, 1, 1025)
    sig = SampledPath(np.sin(2 * np.pi * t)[:, None], closed=True)
    lam = 1.0
    kit = model_isotropic_kit(heisenberg_model(), sig, lam)
    a = kit.a.values
    # a_1 = lam, a_2 = int_0^tau sigma / lam
    assert np.allclose(a[:, 0], lam)
    assert np.allclose(a[:, 1], (1 - np.cos(2 * np.pi * t)) / (2 * np.pi), atol=1e-6)
    assert np.linalg.norm(a[0]) == pytest.approx(lam, abs=1e-12)


def test_quaternionic_a0():
    rng = np.random.default_rng(0)
    kit = model_isotropic_kit(quaternionic_model(), zero_mean_sigma(rng, 3, 256), 0.7)
    assert np.linalg.norm(kit.a.values[0]) == pytest.approx(np.sqrt(3) * 0.7, abs=1e-12)


@pytest.mark.parametrize("name", BUILTIN_MODELS)
def test_kit_soundness(name):
    model = parse_model(name)
    rng = np.random.default_rng(7)
    kit = model_isotropic_kit(model, zero_mean_sigma(rng, model.z_dim, 512), 1.3)
    v = kit.verify()
    assert v["bracket_residual"] < 1e-3
    assert v["isotropy"] < 1e-12
    assert v["boundary_a"] < 1e-12 and v["boundary_point"] < 1e-12
    assert v["periodicity"] == 0
    assert v["lip_measured"] <= v["lip_bound"] * (1 + 1e-12)
    assert v["a0"] <= v["a0_bound"] * (1 + 1e-12)
    assert v["adot_ratio"] <= 1e-12


def test_kit_rejects_nonzero_mean():
    sig = SampledPath(np.ones((33, 1)) + 0.1, closed=True)
    with pytest.raises(InputError):
        model_isotropic_kit(heisenberg_model(), sig, 1.0)
    with pytest.raises(InputError):
        model_isotropic_kit(heisenberg_model(), SampledPath(np.zeros((33, 1)), closed=True), 0.0)


def test_unknown_model():
    with pytest.raises(UnsupportedModelError):
        parse_model("g52")
    with pytest.raises(InputError):
        parse_model("cyclic:x")


def test_custom_model_without_kit(tmp_path):
    import json
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"layer_dims": [2, 1], "brackets": [[0, 1, 2, 1.0]]}))
    m = parse_model(f"custom:{path}")
    assert not m.has_kit
    with pytest.raises(UnsupportedModelError):
        model_isotropic_kit(m, SampledPath(np.zeros((9, 1)), closed=True), 1.0)
