import math

import pytest

from chbell import AnalyzerConfig, NoViolationError, Polarizer, ValidationError, make_state
from chbell.threshold import ch_with_efficiency, eta_critical, eta_critical_point, threshold_curve


def test_maximal_state_threshold():
    assert eta_critical(make_state(1)) == pytest.approx(2 * (math.sqrt(2) - 1), abs=1e-7)


def test_weak_entanglement_threshold():
    assert eta_critical(make_state(0.01)) == pytest.approx(0.668157117, abs=1e-6)


def test_f04_state_threshold():
    assert eta_critical(make_state(0.4)) == pytest.approx(0.734339055497208, abs=1e-7)


@pytest.mark.parametrize("f", [0.05, 0.4, 1.0])
def test_sign_change_at_threshold(f):
    s = make_state(f)
    pt = eta_critical_point(s)
    cfg = AnalyzerConfig.from_angles(pt.angles, wrap=True)
    assert ch_with_efficiency(s, cfg, pt.eta_crit - 0.01) < 0
    assert ch_with_efficiency(s, cfg, pt.eta_crit + 0.01) > 0
    assert ch_with_efficiency(s, cfg, pt.eta_crit) == pytest.approx(0, abs=1e-9)


def test_counts_form_scales_with_eta_squared():
    s = make_state(0.4)
    cfg = AnalyzerConfig(72.24, 17.76, 45, 0)
    a = ch_with_efficiency(s, cfg, 0.3, form="counts") / 0.09
    b = ch_with_efficiency(s, cfg, 0.9, form="counts") / 0.81
    assert a == pytest.approx(b, abs=1e-14)
    assert a > 0


def test_curve_is_monotone_small():
    curve = threshold_curve(0.05, 1.0, 8)
    assert len(curve.points) == 8
    assert curve.is_monotone()
    assert curve.eta_crit[-1] == pytest.approx(0.8284271, abs=1e-6)
    lines = curve.to_csv().splitlines()
    assert lines[0] == "f,eta_crit" and len(lines) == 9


def test_leakage_raises_threshold():
    leaky = Polarizer(0.97, 0.02)
    assert eta_critical(make_state(1), leaky, leaky) > eta_critical(make_state(1))


@pytest.mark.parametrize("args", [(0, 1, 5), (0.5, 0.4, 5), (0.1, 1.2, 5), (0.1, 1, 1)])
def test_curve_validation(args):
    with pytest.raises(ValidationError):
        threshold_curve(*args)


def test_product_state():
    with pytest.raises(NoViolationError):
        eta_critical(make_state(0))


def test_bad_form():
    with pytest.raises(ValidationError):
        ch_with_efficiency(make_state(1), AnalyzerConfig(0, 0, 0, 0), 0.5, form="rate")
