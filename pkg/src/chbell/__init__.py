"""Clauser-Horne Bell-test toolkit for non-maximally entangled photon pairs."""

from ._kernels import BACKEND
from .bell import ChResult, CoincidenceCounts, ch_from_counts, ch_from_probabilities, r_from_probabilities
from .errors import (
    FormatError,
    ManifestError,
    NoViolationError,
    UndefinedRatioError,
    ValidationError,
)
from .model import (
    IDEAL,
    OPEN,
    AnalyzerConfig,
    DetectorModel,
    EntangledState,
    Polarizer,
    Setting,
    make_state,
    validate_polarizer,
)
from .optimizer import OptimizationResult, canonicalize_angles, optimize_angles
from .prediction import FringeScan, coincidence_probability, fringe_scan, singles_probability, visibility
from .threshold import ThresholdCurve, eta_critical, threshold_curve

__version__ = "0.1.0"
