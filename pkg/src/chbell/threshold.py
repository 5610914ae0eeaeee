"""Critical detection efficiency for a loophole-free CH violation.

With symmetric efficiency η and no background, the CH sum built from true
single-arm detection probabilities reads

    CH(η) = η² [P(θ1,θ2) - P(θ1,θ2′) + P(θ1′,θ2) + P(θ1′,θ2′)] - η [P1(θ1′) + P2(θ2)]

and can only exceed zero for η > (singles) / (coincidences), minimised over
the angles. That minimum is 1 / max R, so the search reuses the optimizer on
the R objective.

The experimental (counts-form) sum replaces the singles by polarizer-removed
coincidences, which also scale as η², so its sign does not depend on η.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bell import configuration_probabilities
from .errors import NoViolationError, ValidationError
from .model import IDEAL, AnalyzerConfig, EntangledState, Polarizer, make_state
from .optimizer import optimize_angles
from .prediction import singles_probability

MONOTONE_TOL = 1e-4


@dataclass(frozen=True)
class ThresholdPoint:
    f: float
    eta_crit: float
    angles: tuple[float, float, float, float]


@dataclass(frozen=True)
class ThresholdCurve:
    points: list[ThresholdPoint]

    @property
    def f(self) -> np.ndarray:
        return np.array([p.f for p in self.points])

    @property
    def eta_crit(self) -> np.ndarray:
        return np.array([p.eta_crit for p in self.points])

    def is_monotone(self, tol: float = MONOTONE_TOL) -> bool:
        return bool(np.all(np.diff(self.eta_crit) >= -tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f", "eta_crit"])
        for p in self.points:
            w.writerow([f"{p.f:.9g}", f"{p.eta_crit:.9g}"])
        return buf.getvalue()

    def to_dict(self):
        return {"points": [{"f": p.f, "eta_crit": p.eta_crit, "angles_deg": list(p.angles)} for p in self.points]}


def ch_with_efficiency(
    state: EntangledState, cfg: AnalyzerConfig, eta1: float, eta2: float | None = None, form: str = "probability"
) -> float:
    """CH sum at detection efficiencies ``eta1``, ``eta2``.

    ``form="probability"`` uses true singles (one η each); ``form="counts"``
    uses polarizer-removed coincidences (η1·η2), as measured in the lab.
    """
    eta2 = eta1 if eta2 is None else eta2
    p = configuration_probabilities(state, cfg)
    corr = p[0] - p[1] + p[2] + p[3]
    if form == "counts":
        return eta1 * eta2 * (corr - p[4] - p[5])
    if form == "probability":
        s1 = singles_probability(state, 1, cfg.theta1_prime, cfg.pol1)
        s2 = singles_probability(state, 2, cfg.theta2, cfg.pol2)
        return eta1 * eta2 * corr - eta1 * s1 - eta2 * s2
    raise ValidationError(f"form must be 'probability' or 'counts', got {form!r}", field="form")


def eta_critical_point(state: EntangledState, pol1: Polarizer = IDEAL, pol2: Polarizer = IDEAL) -> ThresholdPoint:
    if not state.is_entangled:
        raise NoViolationError("product state (|f| = 0) has no efficiency threshold")
    res = optimize_angles(state, pol1, pol2, objective="R", anchor=False)
    if not res.objective_value > 0.0:
        raise NoViolationError("no analyzer setting gives a positive correlation term")
    return ThresholdPoint(abs(state.f), 1.0 / res.objective_value, res.angles)


def eta_critical(state: EntangledState, pol1: Polarizer = IDEAL, pol2: Polarizer = IDEAL) -> float:
    """Smallest symmetric efficiency allowing CH > 0 with true singles."""
    return eta_critical_point(state, pol1, pol2).eta_crit


def threshold_curve(
    f_min: float, f_max: float, steps: int, pol1: Polarizer = IDEAL, pol2: Polarizer = IDEAL
) -> ThresholdCurve:
    if not (0.0 < f_min < f_max <= 1.0):
        raise ValidationError(f"need 0 < f_min < f_max <= 1, got {f_min}, {f_max}", field="f_min")
    if int(steps) != steps or steps < 2:
        raise ValidationError(f"steps must be an integer >= 2, got {steps}", field="steps")
    fs = np.linspace(f_min, f_max, int(steps))
    return ThresholdCurve([eta_critical_point(make_state(float(f)), pol1, pol2) for f in fs])
