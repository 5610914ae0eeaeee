"""Closed-form pass probabilities for the two-arm polarization analyzer.

Each arm's polarizer at angle θ acts as the operator

    M(θ) = ε∥ |θ><θ| + ε⊥ |θ⊥><θ⊥|,   |θ> = sinθ |H> + cosθ |V>,

i.e. an H photon passes an ideal polarizer at θ with amplitude sinθ. This
convention is fixed here and inherited by every other module. Its matrix
elements in the H/V basis are

    <H|M|H> = ε∥ sin²θ + ε⊥ cos²θ      (t_h)
    <V|M|V> = ε∥ cos²θ + ε⊥ sin²θ      (t_v)
    <H|M|V> = (ε∥ - ε⊥) sinθ cosθ      (d)

and an absent polarizer is the identity (t_h = t_v = 1, d = 0).
Probabilities are per emitted pair; detector efficiency is applied elsewhere.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import IDEAL, EntangledState, Polarizer, Setting, as_setting


def arm_factors(angle_deg, pol: Polarizer = IDEAL):
    """Return ``(t_h, t_v, d)`` for one arm; ``angle_deg`` may be an array, ``None`` means open."""
    if angle_deg is None:
        return 1.0, 1.0, 0.0
    th = np.deg2rad(angle_deg)
    s2 = np.sin(th) ** 2
    c2 = np.cos(th) ** 2
    t_h = pol.eps_par * s2 + pol.eps_perp * c2
    t_v = pol.eps_par * c2 + pol.eps_perp * s2
    d = pol.contrast * np.sin(th) * np.cos(th)
    return t_h, t_v, d


def _combine(state: EntangledState, a1, a2):
    t1h, t1v, d1 = a1
    t2h, t2v, d2 = a2
    return (t1h * t2h + state.abs_f2 * t1v * t2v + 2.0 * state.f_re * d1 * d2) / state.norm


def coincidence_probability(
    state: EntangledState,
    s1,
    s2,
    pol1: Polarizer = IDEAL,
    pol2: Polarizer = IDEAL,
) -> float:
    """P(both photons pass) for settings ``s1``, ``s2`` (degrees, :class:`Setting` or OPEN)."""
    s1, s2 = as_setting(s1), as_setting(s2)
    p = _combine(state, arm_factors(s1.angle, pol1), arm_factors(s2.angle, pol2))
    return float(p)


def singles_probability(state: EntangledState, arm: int, s, pol: Polarizer = IDEAL) -> float:
    """P(photon on ``arm`` passes), whatever happens on the other arm."""
    if arm not in (1, 2):
        raise ValidationError(f"arm must be 1 or 2, got {arm!r}", field="arm")
    s = as_setting(s)
    t_h, t_v, _ = arm_factors(s.angle, pol)
    return float((t_h + state.abs_f2 * t_v) / state.norm)


def coincidence_grid(state, angles1, angles2, pol1=IDEAL, pol2=IDEAL) -> np.ndarray:
    """Matrix ``P[i, j]`` of coincidence probabilities over two angle grids (degrees)."""
    a1 = [np.asarray(x, dtype=float)[:, None] for x in arm_factors(np.asarray(angles1, float), pol1)]
    a2 = [np.asarray(x, dtype=float)[None, :] for x in arm_factors(np.asarray(angles2, float), pol2)]
    return _combine(state, a1, a2)


def singles_grid(state, angles, pol=IDEAL) -> np.ndarray:
    t_h, t_v, _ = arm_factors(np.asarray(angles, dtype=float), pol)
    return (t_h + state.abs_f2 * t_v) / state.norm


@dataclass(frozen=True)
class FringeScan:
    fixed_arm: int
    fixed_angle: float
    angles: np.ndarray
    probabilities: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.angles.tolist(), self.probabilities.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["angle_deg", "probability"])
        for a, p in zip(self.angles, self.probabilities):
            w.writerow([f"{a:.9g}", f"{p:.9g}"])
        return buf.getvalue()


def scan_angles(step: float) -> np.ndarray:
    n = int(np.ceil(180.0 / step - 1e-9))
    angles = np.arange(n) * step
    return angles[angles < 180.0]


def fringe_scan(
    state: EntangledState,
    fixed_arm: int,
    fixed_angle: float,
    pol1: Polarizer = IDEAL,
    pol2: Polarizer = IDEAL,
    step: float = 1.0,
) -> FringeScan:
    """Coincidence probability while the non-fixed arm rotates over [0, 180)."""
    if not 0.0 < step <= 5.0:
        raise ValidationError(f"step must lie in (0, 5] degrees, got {step}", field="step")
    if fixed_arm not in (1, 2):
        raise ValidationError(f"fixed_arm must be 1 or 2, got {fixed_arm!r}", field="fixed_arm")
    fixed = Setting(fixed_angle).angle
    angles = scan_angles(step)
    if fixed_arm == 1:
        probs = coincidence_grid(state, [fixed], angles, pol1, pol2)[0]
    else:
        probs = coincidence_grid(state, angles, [fixed], pol1, pol2)[:, 0]
    return FringeScan(fixed_arm, fixed, angles, np.clip(probs, 0.0, 1.0))


def visibility(scan: FringeScan) -> float:
    """(max - min) / (max + min) over the scan samples."""
    p = np.asarray(scan.probabilities)
    if p.size == 0:
        raise ValidationError("empty fringe scan", field="samples")
    hi, lo = float(p.max()), float(p.min())
    if hi + lo <= 0.0:
        raise ValidationError("visibility undefined for an all-zero scan", field="samples")
    return (hi - lo) / (hi + lo)
