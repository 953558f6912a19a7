import numpy as np
import pytest
from scipy.integrate import trapezoid

from carnotext.errors import InputError
from carnotext.obstruction import (PAIRS, analytic_chain, decomposable_distance_factor, free52_obstruction,
                                   free52_sigma)


def test_sigma_zero_mean():
    t = np.linspace(0, 1, 257)
    s = free52_sigma(t)
    assert s.shape == (257, 10)
    assert np.abs(trapezoid(s, t, axis=0)).max() < 1e-15
    assert np.count_nonzero(np.abs(s).max(axis=0)) == 5


def test_chain_infeasible():
    t = np.linspace(0, 1, 129)
    steps, verdict = analytic_chain(free52_sigma(t[np.abs(t - 0.5) > 1e-12]))
    assert verdict == "infeasible"
    assert steps[1]["lam"] == pytest.approx(1.0)
    assert steps[2]["defect"] > 0.4


def test_chain_feasible_when_consistent():
    t = np.linspace(0, 1, 65)
    s = free52_sigma(t)
    s[:, PAIRS.index((2, 5))] = t - 0.5  # add sigma_25 so that sigma_15 = sigma_25
    _, verdict = analytic_chain(s[np.abs(t - 0.5) > 1e-12])
    assert verdict == "feasible"


def test_distance_factor_positive():
    assert decomposable_distance_factor() > 0.1


def test_certificate_small():
    cert = free52_obstruction(64, restarts=1)
    assert cert.verdict == "infeasible"
    assert cert.floor >= cert.floor_lower_bound * (1 - 1e-9)
    with pytest.raises(InputError):
        free52_obstruction(32)
