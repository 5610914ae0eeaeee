import itertools

import numpy as np
import pytest

from chbell import ValidationError
from chbell.lhv import (
    DeterministicStrategy,
    counts_form_strategies,
    enumerate_counts_form,
    enumerate_probability_form,
    mixture_bound_check,
    mixture_ch,
)


def test_no_enhancement_counts_form():
    rep = enumerate_counts_form(True)
    assert rep.max_ch == 0
    # each arm: 5 of the 8 (theta, theta', open) tables keep open >= both
    assert rep.strategies_checked == 25
    assert rep.argmax.admissible()


def test_unconstrained_counts_form():
    rep = enumerate_counts_form(False)
    assert rep.max_ch == 2
    assert rep.strategies_checked == 64
    assert not rep.argmax.admissible()


def test_probability_form():
    rep = enumerate_probability_form()
    assert rep.max_ch == 0
    assert rep.strategies_checked == 16


def test_admissibility_rule():
    assert DeterministicStrategy((1, 1, 1), (0, 0, 0)).admissible()
    assert not DeterministicStrategy((1, 0, 0), (0, 0, 0)).admissible()
    assert not DeterministicStrategy((0, 0, 0), (0, 1, 0)).admissible()


def test_vertex_values_range():
    for s in counts_form_strategies(False):
        assert -2 <= s.ch_counts() <= 2


def test_mixtures_respect_bound():
    assert mixture_bound_check(2000, seed=5) <= 1e-12
    assert mixture_bound_check(2000, seed=5) == mixture_bound_check(2000, seed=5)


def test_mixture_ch_linear():
    strats = counts_form_strategies(True)
    w = np.zeros(len(strats))
    w[0] = w[-1] = 0.5
    assert mixture_ch(w, strats) == pytest.approx(0.5 * (strats[0].ch_counts() + strats[-1].ch_counts()))
    with pytest.raises(ValidationError):
        mixture_ch(np.ones(len(strats)), strats)


def test_mixture_samples_validation():
    with pytest.raises(ValidationError):
        mixture_bound_check(0)


def test_report_dict():
    d = enumerate_counts_form(True).to_dict()
    assert set(d) == {"mode", "no_enhancement", "max_ch", "argmax", "strategies_checked"}
    assert set(d["argmax"]["arm1"]) == {"theta", "theta_prime", "open"}


def test_probability_form_mixtures():
    assert mixture_bound_check(500, seed=2, form="probability") <= 1e-12
    with pytest.raises(ValidationError):
        mixture_bound_check(5, form="vertex")
