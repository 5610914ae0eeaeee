import math

import numpy as np
import pytest

from chbell import AnalyzerConfig, NoViolationError, Polarizer, ValidationError, make_state
from chbell.bell import ch_from_probabilities, r_from_probabilities
from chbell.optimizer import canonicalize_angles, grid_search, objective_function, optimize_angles

from conftest import MAXIMAL_ANGLES, F04_ANGLES


def ch_max(f):
    # CH = (CHSH - 2) / 4 and the pure-state CHSH maximum is 2 sqrt(1 + C^2)
    c = 2 * f / (1 + f * f)
    return (math.sqrt(1 + c * c) - 1) / 2


def angle_distance(a, b):
    return max(abs((x - y + 90) % 180 - 90) for x, y in zip(a, b))


def test_maximal_state_ch():
    res = optimize_angles(make_state(1))
    assert angle_distance(res.angles, MAXIMAL_ANGLES) < 0.1
    assert res.objective_value == pytest.approx((math.sqrt(2) - 1) / 2, abs=1e-9)


def test_maximal_state_ratio():
    res = optimize_angles(make_state(1), objective="R")
    assert res.objective_value == pytest.approx((1 + math.sqrt(2)) / 2, abs=1e-9)


@pytest.mark.parametrize("f", [0.05, 0.2, 0.4, 0.7, 1.0])
def test_ch_optimum_analytic(f):
    res = optimize_angles(make_state(f))
    assert res.objective_value == pytest.approx(ch_max(f), abs=1e-9)
    assert ch_from_probabilities(make_state(f), res.config()) == pytest.approx(res.objective_value, abs=1e-12)


def test_f04_state_anchored_optimum():
    res = optimize_angles(make_state(0.4))
    assert res.angles[3] == 0.0
    assert res.objective_value == pytest.approx(0.1073763777175358, abs=1e-9)
    assert res.objective_value >= ch_from_probabilities(make_state(0.4), AnalyzerConfig(*F04_ANGLES))
    assert angle_distance(res.angles, F04_ANGLES) < 1.5


def test_f04_state_ratio_optimum():
    res = optimize_angles(make_state(0.4), objective="R")
    assert res.objective_value == pytest.approx(1.36176878039384, abs=1e-7)
    assert r_from_probabilities(make_state(0.4), res.config()) == pytest.approx(res.objective_value, abs=1e-12)


@pytest.mark.parametrize("objective", ["CH", "R"])
@pytest.mark.parametrize("f", [0.3, 1.0])
def test_beats_every_grid_point(objective, f):
    # monotone acceptance: refined value >= any probed point of a random cloud
    s = make_state(f)
    res = optimize_angles(s, objective=objective)
    g = objective_function(s, objective=objective)
    rng = np.random.default_rng(11)
    pts = rng.uniform(0, 180, size=(2000, 4))
    assert res.objective_value >= max(g(p) for p in pts)
    assert res.objective_value >= res.grid_value


def test_grid_search_exact_on_coarse_grid(backend):
    value, angles, npts = grid_search(make_state(1), step=22.5)
    assert npts == 8**4
    assert value == pytest.approx((math.sqrt(2) - 1) / 2, abs=1e-12)


def test_leaky_polarizers_lower_the_optimum():
    ideal = optimize_angles(make_state(1)).objective_value
    leaky = optimize_angles(make_state(1), Polarizer(0.95, 0.05), Polarizer(0.95, 0.05)).objective_value
    assert leaky < ideal


def test_product_state_rejected():
    with pytest.raises(NoViolationError):
        optimize_angles(make_state(0))


def test_unknown_objective():
    with pytest.raises(ValidationError):
        optimize_angles(make_state(1), objective="CHSH")


def test_canonicalize_examples():
    assert canonicalize_angles((157.5, 112.5, 135, 90)) == (67.5, 22.5, 45.0, 0.0)
    assert canonicalize_angles((112.5, 157.5, 135, 90)) == (22.5, 67.5, 45.0, 0.0)


def test_canonicalize_preserves_objective():
    s = make_state(0.4)
    g = objective_function(s)
    q = (100.0, 33.0, 140.0, 75.0)
    c = canonicalize_angles(q, s)
    assert g(np.array(c)) == pytest.approx(g(np.array(q)), abs=1e-12)
    assert canonicalize_angles(c, s) == c


def test_result_dict_shape():
    d = optimize_angles(make_state(1)).to_dict()
    assert set(d) == {"angles_deg", "objective", "value", "evaluations"}
    assert len(d["angles_deg"]) == 4
