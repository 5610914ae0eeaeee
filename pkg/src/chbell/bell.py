"""Clauser-Horne sum and R ratio, from counts or from predicted probabilities.

The six configurations are always ordered as in
:meth:`chbell.model.AnalyzerConfig.configurations`::

    CH = N(θ1,θ2) - N(θ1,θ2′) + N(θ1′,θ2) + N(θ1′,θ2′) - N(θ1′,open) - N(open,θ2)
    R  = [first four terms] / [N(θ1′,open) + N(open,θ2)]

Local realism (with no-enhancement) demands CH <= 0, equivalently R <= 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import UndefinedRatioError, ValidationError
from .model import CH_SIGNS, AnalyzerConfig, EntangledState
from .prediction import coincidence_probability


@dataclass(frozen=True)
class CoincidenceCounts:
    n_ab: int
    n_ab_prime: int
    n_a_prime_b: int
    n_a_prime_b_prime: int
    n_a_prime_open: int
    n_open_b: int
    duration_s: float = 1.0

    def __post_init__(self):
        for name, v in zip(self._fields(), self.as_tuple()):
            if int(v) != v or v < 0:
                raise ValidationError(f"{name} must be a non-negative integer, got {v!r}", field=name)
            object.__setattr__(self, name, int(v))
        if not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise ValidationError(f"duration_s must be > 0, got {self.duration_s}", field="duration_s")

    @staticmethod
    def _fields():
        return ("n_ab", "n_ab_prime", "n_a_prime_b", "n_a_prime_b_prime", "n_a_prime_open", "n_open_b")

    @classmethod
    def from_sequence(cls, counts, duration_s=1.0):
        if len(counts) != 6:
            raise ValidationError(f"expected 6 counts, got {len(counts)}", field="counts")
        return cls(*counts, duration_s=duration_s)

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(getattr(self, n) for n in self._fields())

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ChResult:
    ch: float
    ch_sigma: float
    r: float | None
    r_sigma: float | None
    significance: float | None
    units: str
    # Raw-count variance of CH; exact integer.
    ch_variance: int | None = None

    def to_dict(self):
        return {
            "ch": self.ch,
            "ch_sigma": self.ch_sigma,
            "r": self.r,
            "r_sigma": self.r_sigma,
            "significance": self.significance,
            "units": self.units,
            "ch_variance": self.ch_variance,
        }


def _ratio(num, den, var_num, var_den):
    r = num / den
    # First-order propagation for independent numerator/denominator.
    var_r = var_num / den**2 + num**2 * var_den / den**4
    return r, math.sqrt(var_r)


def ch_from_counts(c: CoincidenceCounts, per_second: bool = True, accidentals=None) -> ChResult:
    """CH, R and their Poisson errors from six independent counts.

    With ``per_second`` CH and its error are divided by the (uniform) live
    time. ``accidentals`` (six expected accidental counts) are subtracted
    from the counts before combining; the variance stays that of the raw
    counts. Raises :class:`UndefinedRatioError` when the two open-arm counts
    are both zero; the exception's ``result`` still holds CH.
    """
    raw = c.as_tuple()
    variance = sum(raw)
    n = raw if accidentals is None else tuple(x - a for x, a in zip(raw, accidentals))
    ch_counts = sum(s * x for s, x in zip(CH_SIGNS, n))
    scale = c.duration_s if per_second else 1.0
    ch = ch_counts / scale
    sigma = math.sqrt(variance) / scale
    significance = ch / sigma if sigma > 0 else None
    units = "counts/s" if per_second else "counts"

    num = n[0] - n[1] + n[2] + n[3]
    den = n[4] + n[5]
    if den <= 0 or raw[4] + raw[5] == 0:
        partial = ChResult(ch, sigma, None, None, significance, units, variance)
        raise UndefinedRatioError("R undefined: N(θ1′,open) + N(open,θ2) = 0", result=partial)
    r, r_sigma = _ratio(num, den, sum(raw[:4]), raw[4] + raw[5])
    return ChResult(ch, sigma, r, r_sigma, significance, units, variance)


def configuration_probabilities(state: EntangledState, cfg: AnalyzerConfig) -> list[float]:
    return [
        coincidence_probability(state, s1, s2, cfg.pol1, cfg.pol2)
        for s1, s2 in cfg.configurations()
    ]


def ch_from_probabilities(state: EntangledState, cfg: AnalyzerConfig) -> float:
    p = configuration_probabilities(state, cfg)
    return sum(s * x for s, x in zip(CH_SIGNS, p))


def r_from_probabilities(state: EntangledState, cfg: AnalyzerConfig) -> float:
    p = configuration_probabilities(state, cfg)
    den = p[4] + p[5]
    if den <= 0.0:
        raise UndefinedRatioError("R undefined: open-arm probabilities vanish")
    return (p[0] - p[1] + p[2] + p[3]) / den
