import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carnotext.algebra import engel, heisenberg, upper_triangular
from carnotext.contact import (check_horizontal, contact_residual_curve, contact_residual_map,
                               heisenberg_affine_map, heisenberg_affine_vertical, horizontal_length,
                               horizontal_lift, lipschitz_ratio, non_lipschitz_map_I,
                               piecewise_horizontal_approx)
from carnotext.errors import HorizontalityError, InputError
from carnotext.paths import SampledPath

from conftest import circle

H1 = heisenberg(1)


def vertical_line(n):
    t = np.linspace(0, 1, n + 1)
    return SampledPath(np.stack([0 * t, 0 * t, t], axis=1))


def test_vertical_line_residual_is_one():
    rep = contact_residual_curve(H1, vertical_line(64))
    assert rep.sup == pytest.approx(1.0)
    with pytest.raises(HorizontalityError):
        check_horizontal(H1, vertical_line(64))


def test_horizontal_segment_residual_zero():
    t = np.linspace(0, 1, 33)
    seg = SampledPath(np.stack([t, 2 * t, 0 * t], axis=1))
    assert contact_residual_curve(H1, seg).sup == 0.0


def test_circle_holonomy_small_grid():
    lift = horizontal_lift(H1, circle(256, based=False))
    assert lift.values[-1, 2] == pytest.approx(np.pi, abs=1e-8)
    assert not lift.closed


def test_lift_reversal_negates_holonomy():
    c = circle(128)
    fwd = horizontal_lift(H1, c).values[-1, 2]
    back = horizontal_lift(H1, c.reversed()).values[-1, 2]
    assert back == pytest.approx(-fwd, rel=1e-10)


def test_lift_with_initial_value():
    lift = horizontal_lift(H1, circle(64), init=[0, 0, 2.5])
    assert lift.values[0, 2] == 2.5
    with pytest.raises(InputError):
        horizontal_lift(H1, circle(64), init=[1, 0, 0])


def test_higher_step_lift_is_horizontal():
    e = engel()
    t = np.linspace(0, 1, 2049)
    c = SampledPath(np.stack([np.sin(2 * np.pi * t), t ** 2], axis=1))
    lift = horizontal_lift(e, c)
    check_horizontal(e, lift)


def test_lift_matches_group_segment_in_step_three():
    # the straight horizontal segment exp(sV) is a one-parameter subgroup
    alg = upper_triangular(4)
    V = np.zeros(alg.dim)
    V[:3] = [1.0, -2.0, 0.5]
    g0 = np.zeros(alg.dim)
    g0[3:] = [0.3, -0.1, 0.7, 0.2, 0.4, -0.6][: alg.dim - 3]
    s = np.linspace(0, 1, 65)[:, None]
    seg = alg.bch_product(g0, s * V)
    lift = horizontal_lift(alg, SampledPath(seg[:, :3]), init=np.r_[np.zeros(3), g0[3:]])
    assert np.allclose(lift.values, seg, atol=1e-12)


def test_piecewise_approx_exactly_horizontal():
    lift = horizontal_lift(H1, circle(512))
    pw = piecewise_horizontal_approx(H1, lift, 16)
    rep = contact_residual_curve(H1, pw)
    # only the 15 interior breakpoints see a mismatched central difference
    bad = np.flatnonzero(np.linalg.norm(rep.residual[:, 2:], axis=1) > 1e-12)
    assert set(bad) <= set(range(0, 513, 32))
    with pytest.raises(InputError):
        piecewise_horizontal_approx(H1, lift, 7)


def test_length_additive_on_concatenation():
    t = np.linspace(0, 1, 9)
    a = SampledPath(np.stack([t, 0 * t, 0 * t], axis=1))
    b = SampledPath(np.stack([1 + 0 * t, t, t / 2], axis=1))
    assert horizontal_length(H1, a.concatenate(b)) == pytest.approx(2.0)


def test_lipschitz_ratio_of_dilation():
    r = np.random.default_rng(3)
    x = H1.random_vector(r, 40)
    assert lipschitz_ratio(H1, x, H1.dilate(3.0, x), "gauge", H1) == pytest.approx(3.0)
    with pytest.raises(InputError):
        lipschitz_ratio(H1, np.zeros((2, 3)), np.eye(3)[:2])


def test_map_I_residual():
    pts = np.array([[0.5, 0.2, 0.1], [0.0, 0.0, 0.0]])
    res = contact_residual_map(H1, H1, non_lipschitz_map_I, pts, 1e-5)
    # along X2 the vertical defect is 1 + x1^2 / 4
    assert abs(res[0, 1, 2]) == pytest.approx(1.0625, abs=1e-8)
    assert abs(res[0, 0, 2]) == pytest.approx(0.5 * (0.1 + 0.05), abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
       st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_affine_contact(a0, a1, l1, l2, b0, b1, tau, _):
    a = np.array([a0, a1])
    A = np.stack([l1 * a, l2 * a], axis=1)
    F = heisenberg_affine_map(A, a, [b0, b1], tau)
    g = np.linspace(-1, 1, 5)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    assert np.abs(contact_residual_map(H1, H1, F, pts, 1e-3)).max() < 1e-8


def test_affine_inadmissible_rejected():
    with pytest.raises(InputError):
        heisenberg_affine_vertical(np.eye(2), [1, 0], [0, 0], 0.0)


def _endpoint_constant(alg, seeds, n=512, stride=8):
    worst = 0.0
    d1 = alg.layer_dims[0]
    for s in seeds:
        r = np.random.default_rng(s)
        t = np.linspace(0, 1, n + 1)[:, None]
        k = np.arange(1, 4)
        c = np.cos(2 * np.pi * t * k) @ r.standard_normal((3, d1)) + \
            np.sin(2 * np.pi * t * k) @ r.standard_normal((3, d1))
        lift = horizontal_lift(alg, SampledPath(c)).values
        seg = np.r_[0.0, np.cumsum(np.linalg.norm(np.diff(c, axis=0), axis=1))]
        idx = np.arange(0, n + 1, stride)
        i, j = np.triu_indices(len(idx), 1)
        d = alg.gauge_quasidistance(lift[idx[i]], lift[idx[j]])
        worst = max(worst, float(np.max(d / (seg[idx[j]] - seg[idx[i]]))))
    return worst


@pytest.mark.parametrize("alg", [heisenberg(1), heisenberg(2), engel()], ids=lambda a: a.name)
def test_lift_endpoint_constant_stable(alg):
    a = _endpoint_constant(alg, range(0, 20))
    b = _endpoint_constant(alg, range(100, 120))
    assert a >= 1 - 1e-9 and b >= 1 - 1e-9  # short arcs are nearly straight
    assert abs(a / b - 1) <= 0.05
