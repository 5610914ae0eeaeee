"""State, polarizer, analyzer and detector parameter types.

All angles cross the public API in degrees; conversion to radians happens
once, inside :mod:`chbell.prediction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ValidationError

# Typical SPAD figures: quantum efficiency incl. fiber coupling, and an
# upper bound on the dark-count rate.
DEFAULT_ETA = 0.535
DEFAULT_DARK_RATE = 50.0
# Not reported for the experiment; implementation choice.
DEFAULT_WINDOW_NS = 10.0


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}", field=name)
    return value


@dataclass(frozen=True)
class EntangledState:
    """Pure state (|HH> + f |VV>) / sqrt(1 + |f|^2)."""

    f_re: float
    f_im: float = 0.0
    norm: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "f_re", _finite("f_re", self.f_re))
        object.__setattr__(self, "f_im", _finite("f_im", self.f_im))
        norm = 1.0 + self.f_re**2 + self.f_im**2
        if not math.isfinite(norm):
            raise ValidationError("|f|^2 overflows", field="f_re")
        object.__setattr__(self, "norm", norm)

    @property
    def f(self) -> complex:
        return complex(self.f_re, self.f_im)

    @property
    def abs_f2(self) -> float:
        return self.f_re**2 + self.f_im**2

    @property
    def is_entangled(self) -> bool:
        return self.abs_f2 > 0.0

    @property
    def weights(self) -> tuple[float, float]:
        """Populations of |HH> and |VV>."""
        return 1.0 / self.norm, self.abs_f2 / self.norm

    def conjugate(self) -> "EntangledState":
        return EntangledState(self.f_re, -self.f_im)


def make_state(f_re: float, f_im: float = 0.0) -> EntangledState:
    return EntangledState(f_re, f_im)


@dataclass(frozen=True)
class Polarizer:
    """Intensity transmissions for light polarized along / across the axis."""

    eps_par: float = 1.0
    eps_perp: float = 0.0

    def __post_init__(self):
        par = _finite("eps_par", self.eps_par)
        perp = _finite("eps_perp", self.eps_perp)
        if not 0.0 <= par <= 1.0:
            raise ValidationError(f"eps_par must lie in [0, 1], got {par}", field="eps_par")
        if not 0.0 <= perp <= 1.0:
            raise ValidationError(f"eps_perp must lie in [0, 1], got {perp}", field="eps_perp")
        if perp > par:
            raise ValidationError(
                f"eps_perp ({perp}) must not exceed eps_par ({par})", field="eps_perp"
            )
        object.__setattr__(self, "eps_par", par)
        object.__setattr__(self, "eps_perp", perp)

    @property
    def contrast(self) -> float:
        return self.eps_par - self.eps_perp


IDEAL = Polarizer(1.0, 0.0)


def validate_polarizer(eps_par: float, eps_perp: float) -> Polarizer:
    return Polarizer(eps_par, eps_perp)


def _check_angle(name, angle):
    angle = _finite(name, angle)
    if not 0.0 <= angle < 180.0:
        raise ValidationError(f"{name} must lie in [0, 180) degrees, got {angle}", field=name)
    return angle


@dataclass(frozen=True)
class Setting:
    """Analyzer angle in degrees, or ``angle=None`` when the polarizer is removed."""

    angle: float | None = None

    def __post_init__(self):
        if self.angle is not None:
            object.__setattr__(self, "angle", _check_angle("angle", self.angle))

    @classmethod
    def at(cls, angle: float) -> "Setting":
        return cls(angle)

    @property
    def is_open(self) -> bool:
        return self.angle is None

    def label(self) -> str:
        return "open" if self.angle is None else format(self.angle, ".10g")

    @classmethod
    def parse(cls, text) -> "Setting":
        if isinstance(text, Setting):
            return text
        if isinstance(text, str):
            if text.strip().lower() in ("open", "inf", "none"):
                return OPEN
            try:
                return cls(float(text))
            except ValueError:
                raise ValidationError(f"cannot parse setting {text!r}", field="setting") from None
        if text is None:
            return OPEN
        return cls(float(text))

    def __str__(self):
        return self.label()


OPEN = Setting(None)


def as_setting(s) -> Setting:
    return s if isinstance(s, Setting) else Setting.parse(s)


@dataclass(frozen=True)
class AnalyzerConfig:
    """The four CH analysis angles (degrees) and both arms' polarizers."""

    theta1: float
    theta1_prime: float
    theta2: float
    theta2_prime: float
    pol1: Polarizer = IDEAL
    pol2: Polarizer = IDEAL

    def __post_init__(self):
        for name in ("theta1", "theta1_prime", "theta2", "theta2_prime"):
            object.__setattr__(self, name, _check_angle(name, getattr(self, name)))

    @classmethod
    def from_angles(cls, angles: Sequence[float], pol1=IDEAL, pol2=IDEAL, wrap=False):
        """Build from ``(theta1, theta1', theta2, theta2')``; ``wrap`` reduces mod 180."""
        if len(angles) != 4:
            raise ValidationError(f"expected 4 angles, got {len(angles)}", field="angles")
        vals = [float(a) for a in angles]
        if wrap:
            vals = [a % 180.0 for a in vals]
            vals = [0.0 if a >= 180.0 else a for a in vals]
        return cls(*vals, pol1=pol1, pol2=pol2)

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta1_prime, self.theta2, self.theta2_prime)

    def configurations(self) -> list[tuple[Setting, Setting]]:
        """The six setting pairs of the CH sum, in summation order.

        (θ1,θ2), (θ1,θ2′), (θ1′,θ2), (θ1′,θ2′), (θ1′,open), (open,θ2)
        """
        a, ap, b, bp = (Setting(x) for x in self.angles)
        return [(a, b), (a, bp), (ap, b), (ap, bp), (ap, OPEN), (OPEN, b)]


# Sign of each configuration in the CH sum.
CH_SIGNS = (1, -1, 1, 1, -1, -1)


@dataclass(frozen=True)
class DetectorModel:
    """Per-arm detection efficiency and dark rate, source pair rate, coincidence window.

    ``window_ns`` is the half-width: events coincide when |t1 - t2| <= window_ns.
    """

    pair_rate: float
    eta1: float = DEFAULT_ETA
    eta2: float = DEFAULT_ETA
    dark1: float = DEFAULT_DARK_RATE
    dark2: float = DEFAULT_DARK_RATE
    window_ns: float = DEFAULT_WINDOW_NS

    def __post_init__(self):
        for name in ("eta1", "eta2"):
            v = _finite(name, getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}", field=name)
            object.__setattr__(self, name, v)
        for name in ("dark1", "dark2", "pair_rate"):
            v = _finite(name, getattr(self, name))
            if v < 0.0:
                raise ValidationError(f"{name} must be >= 0, got {v}", field=name)
            object.__setattr__(self, name, v)
        w = _finite("window_ns", self.window_ns)
        if w <= 0.0:
            raise ValidationError(f"window_ns must be > 0, got {w}", field="window_ns")
        object.__setattr__(self, "window_ns", w)


def polarizer_from_dict(d) -> Polarizer:
    if d is None:
        return IDEAL
    return Polarizer(d.get("eps_par", 1.0), d.get("eps_perp", 0.0))


def state_from_dict(d) -> EntangledState:
    if isinstance(d, (int, float)):
        return EntangledState(d)
    return EntangledState(d.get("re", 0.0), d.get("im", 0.0))


def detector_from_dict(d) -> DetectorModel:
    if "pair_rate" not in d:
        raise ValidationError("detector.pair_rate is required", field="pair_rate")
    return DetectorModel(
        pair_rate=d["pair_rate"],
        eta1=d.get("eta1", DEFAULT_ETA),
        eta2=d.get("eta2", DEFAULT_ETA),
        dark1=d.get("dark1", DEFAULT_DARK_RATE),
        dark2=d.get("dark2", DEFAULT_DARK_RATE),
        window_ns=d.get("window_ns", DEFAULT_WINDOW_NS),
    )
