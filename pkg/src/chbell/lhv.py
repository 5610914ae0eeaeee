"""Deterministic local-hidden-variable strategies for the CH sum.

A deterministic strategy fixes, for each arm, whether the photon is detected
under each available setting. Because the CH sum is linear in the
hidden-variable distribution, its maximum over all local models is reached
at one of these vertices, so enumerating them is exhaustive.

Counts form (as measured): N(x, y) = bit1(x) * bit2(y) over settings
{θ, θ′, open} per arm. Probability form: open-arm terms replaced by the
singles bit1(θ1′), bit2(θ2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class DeterministicStrategy:
    # (θ, θ′, open); open is None in the probability form.
    arm1: tuple[int, int, int | None]
    arm2: tuple[int, int, int | None]

    def admissible(self) -> bool:
        """No-enhancement: removing the polarizer never loses a detection."""
        for t in (self.arm1, self.arm2):
            if t[2] is not None and (t[0] > t[2] or t[1] > t[2]):
                return False
        return True

    def ch_counts(self) -> int:
        x, xp, xo = self.arm1
        y, yp, yo = self.arm2
        return x * y - x * yp + xp * y + xp * yp - xp * yo - xo * y

    def ch_probability(self) -> int:
        x, xp, _ = self.arm1
        y, yp, _ = self.arm2
        return x * y - x * yp + xp * y + xp * yp - xp - y

    def to_dict(self):
        def table(t):
            return {"theta": t[0], "theta_prime": t[1], "open": t[2]}

        return {"arm1": table(self.arm1), "arm2": table(self.arm2)}


@dataclass(frozen=True)
class LhvReport:
    mode: str
    no_enhancement: bool
    max_ch: int
    argmax: DeterministicStrategy
    strategies_checked: int

    def to_dict(self):
        return {
            "mode": self.mode,
            "no_enhancement": self.no_enhancement,
            "max_ch": self.max_ch,
            "argmax": self.argmax.to_dict(),
            "strategies_checked": self.strategies_checked,
        }


def counts_form_strategies(no_enhancement: bool = True) -> list[DeterministicStrategy]:
    arms = list(itertools.product((0, 1), repeat=3))
    out = [DeterministicStrategy(a, b) for a, b in itertools.product(arms, arms)]
    if no_enhancement:
        out = [s for s in out if s.admissible()]
    return out


def probability_form_strategies() -> list[DeterministicStrategy]:
    arms = [(x, xp, None) for x, xp in itertools.product((0, 1), repeat=2)]
    return [DeterministicStrategy(a, b) for a, b in itertools.product(arms, arms)]


def _best(strategies, value):
    # First maximiser in enumeration order.
    best = max(strategies, key=value)
    return value(best), best


def enumerate_counts_form(no_enhancement: bool = True) -> LhvReport:
    strategies = counts_form_strategies(no_enhancement)
    top, arg = _best(strategies, DeterministicStrategy.ch_counts)
    return LhvReport("counts", bool(no_enhancement), top, arg, len(strategies))


def enumerate_probability_form() -> LhvReport:
    strategies = probability_form_strategies()
    top, arg = _best(strategies, DeterministicStrategy.ch_probability)
    return LhvReport("probability", True, top, arg, len(strategies))


def mixture_ch(weights, strategies, form: str = "counts") -> float:
    """CH of the convex mixture ``sum_k weights[k] * strategies[k]``."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(strategies),) or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
        raise ValidationError("weights must be a probability vector over the strategies", field="weights")
    value = DeterministicStrategy.ch_counts if form == "counts" else DeterministicStrategy.ch_probability
    return float(w @ np.array([value(s) for s in strategies], dtype=float))


def mixture_bound_check(samples: int, seed: int = 0, no_enhancement: bool = True, form: str = "counts") -> float:
    """Max CH over ``samples`` random mixtures of the strategies of ``form``.

    Raises ``AssertionError`` if any mixture exceeds the best vertex by more than 1e-12.
    """
    if int(samples) != samples or samples < 1:
        raise ValidationError(f"samples must be a positive integer, got {samples}", field="samples")
    if form == "counts":
        strategies = counts_form_strategies(no_enhancement)
        values = np.array([s.ch_counts() for s in strategies], dtype=float)
    elif form == "probability":
        values = np.array([s.ch_probability() for s in probability_form_strategies()], dtype=float)
    else:
        raise ValidationError(f"form must be 'counts' or 'probability', got {form!r}", field="form")
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(values.size), size=int(samples))
    mix = weights @ values
    top = float(mix.max())
    if top > values.max() + 1e-12:
        raise AssertionError(f"mixture CH {top} exceeds vertex maximum {values.max()}")
    return top
