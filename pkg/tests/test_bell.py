import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chbell import AnalyzerConfig, CoincidenceCounts, UndefinedRatioError, ValidationError, make_state
from chbell.bell import ch_from_counts, ch_from_probabilities, configuration_probabilities, r_from_probabilities

from conftest import MAXIMAL_ANGLES, F04_ANGLES, oracle_ch


def test_maximal_ratio():
    cfg = AnalyzerConfig(*MAXIMAL_ANGLES)
    assert r_from_probabilities(make_state(1), cfg) == pytest.approx((1 + math.sqrt(2)) / 2, abs=1e-12)
    assert ch_from_probabilities(make_state(1), cfg) == pytest.approx((math.sqrt(2) - 1) / 2, abs=1e-12)


def test_f04_state_values_against_oracle():
    # mpmath 30-digit oracle, frozen
    cfg = AnalyzerConfig(*F04_ANGLES)
    ch = ch_from_probabilities(make_state(0.4), cfg)
    r = r_from_probabilities(make_state(0.4), cfg)
    assert ch == pytest.approx(0.107296761992709, abs=1e-12)
    assert r == pytest.approx(1.152127646512149, abs=1e-12)
    och, orr = oracle_ch(0.4, F04_ANGLES)
    assert (ch, r) == pytest.approx((och, orr), abs=1e-12)


def test_uniform_counts_error_propagation():
    res = ch_from_counts(CoincidenceCounts(100, 100, 100, 100, 100, 100))
    assert res.ch == 0
    assert res.ch_sigma == pytest.approx(math.sqrt(600), abs=1e-12)
    assert res.r == 1.0
    assert res.r_sigma == pytest.approx(math.sqrt(0.015), abs=1e-12)
    assert res.significance == 0


def test_hand_example_counts():
    res = ch_from_counts(CoincidenceCounts(500, 100, 450, 420, 600, 580), per_second=False)
    assert res.ch == 90
    assert res.ch_sigma == pytest.approx(math.sqrt(2650), abs=1e-12)
    assert res.r == pytest.approx(1270 / 1180, abs=1e-15)


def test_per_second_scaling():
    c = CoincidenceCounts(500, 100, 450, 420, 600, 580, duration_s=10)
    assert ch_from_counts(c).ch == pytest.approx(9.0)
    assert ch_from_counts(c).units == "counts/s"
    assert ch_from_counts(c, per_second=False).units == "counts"


def test_zero_open_counts():
    with pytest.raises(UndefinedRatioError) as exc:
        ch_from_counts(CoincidenceCounts(5, 0, 3, 2, 0, 0), per_second=False)
    assert exc.value.result.ch == 10
    assert exc.value.result.r is None


def test_all_zero_counts():
    with pytest.raises(UndefinedRatioError) as exc:
        ch_from_counts(CoincidenceCounts(0, 0, 0, 0, 0, 0))
    assert exc.value.result.ch == 0
    assert exc.value.result.significance is None


@pytest.mark.parametrize("bad", [-1, 2.5])
def test_invalid_counts(bad):
    with pytest.raises(ValidationError):
        CoincidenceCounts(bad, 0, 0, 0, 0, 0)


counts = st.integers(0, 10**6)


@given(st.tuples(counts, counts, counts, counts, counts, counts).filter(lambda t: t[4] + t[5] > 0))
def test_invariants(n):
    res = ch_from_counts(CoincidenceCounts(*n), per_second=False)
    assert res.ch_variance == sum(n)
    assert res.ch_sigma == pytest.approx(math.sqrt(sum(n)), rel=1e-15)
    assert (res.r > 1) == (res.ch > 0)


def test_ch_is_chsh_shift():
    # CH = (CHSH - 2) / 4 for the ideal polarizers
    s = make_state(0.4)
    cfg = AnalyzerConfig(10, 50, 80, 130)
    p = configuration_probabilities(s, cfg)
    assert len(p) == 6
    assert ch_from_probabilities(s, cfg) == pytest.approx(p[0] - p[1] + p[2] + p[3] - p[4] - p[5])
