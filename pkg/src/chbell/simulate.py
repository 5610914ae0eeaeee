"""Monte-Carlo event generation for a six-configuration CH run.

Per configuration, pair emissions form a Poisson process at ``pair_rate``.
Each pair lands in one of four detection outcomes (both arms, arm 1 only,
arm 2 only, neither), with probabilities obtained by thinning the quantum
pass/block distribution by each arm's efficiency:

    both  = η1 η2 P(pass, pass)
    only1 = η1 P1(pass) - both
    only2 = η2 P2(pass) - both

Dark counts are independent Poisson streams. ``simulate_counts`` draws the
six coincidence totals directly and adds accidentals as an independent
Poisson term of mean 2·window·r1·r2·T, where r_i is the rate of
uncorrelated clicks on arm i. ``simulate_events`` produces the timestamps
and leaves coincidence finding to :mod:`chbell.analyze`.

Random streams come from numpy's PCG64 seeded by
``SeedSequence(seed, spawn_key=(configuration, label))``, so each
configuration and each purpose gets its own stream regardless of the order
in which configurations are simulated. The bit streams are stable across
numpy releases; outputs are byte-identical for a fixed numpy version.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .bell import CoincidenceCounts
from .errors import ValidationError
from .model import AnalyzerConfig, DetectorModel, EntangledState, Setting
from .prediction import coincidence_probability, singles_probability

_PAIRS, _DARK1, _DARK2, _JITTER1, _JITTER2, _ACCIDENTAL = range(6)


@dataclass(frozen=True)
class RunPlan:
    state: EntangledState
    cfg: AnalyzerConfig
    detector: DetectorModel
    duration_s: float
    seed: int = 0
    jitter_ns: float = 0.0

    def __post_init__(self):
        if not (self.duration_s > 0 and np.isfinite(self.duration_s)):
            raise ValidationError(f"duration_s must be > 0, got {self.duration_s}", field="duration_s")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}", field="seed")
        if not self.jitter_ns >= 0:
            raise ValidationError(f"jitter_ns must be >= 0, got {self.jitter_ns}", field="jitter_ns")


@dataclass(frozen=True)
class EventStream:
    channel: int
    timestamps: np.ndarray
    setting1: Setting
    setting2: Setting
    duration_s: float
    run: int = 0

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.uint64)
        object.__setattr__(self, "timestamps", ts)
        if ts.size and np.any(ts[1:] < ts[:-1]):
            bad = int(np.argmax(ts[1:] < ts[:-1])) + 1
            raise ValidationError(f"timestamps not sorted at index {bad}", field="timestamps")
        if ts.size and ts[-1] >= self.duration_s * 1e9:
            raise ValidationError("timestamp beyond run duration", field="timestamps")

    def __len__(self):
        return int(self.timestamps.size)


def _rng(seed, run, label):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(run, label))))


def outcome_probabilities(state, s1, s2, cfg: AnalyzerConfig, detector: DetectorModel):
    """Per-pair probabilities of (both, only arm 1, only arm 2, neither) being detected."""
    pp = coincidence_probability(state, s1, s2, cfg.pol1, cfg.pol2)
    q1 = singles_probability(state, 1, s1, cfg.pol1)
    q2 = singles_probability(state, 2, s2, cfg.pol2)
    both = detector.eta1 * detector.eta2 * pp
    only1 = max(detector.eta1 * q1 - both, 0.0)
    only2 = max(detector.eta2 * q2 - both, 0.0)
    none = max(1.0 - both - only1 - only2, 0.0)
    p = np.array([both, only1, only2, none])
    return p / p.sum()


def expected_rates(plan: RunPlan, s1, s2):
    """(true coincidence, uncorrelated arm-1, uncorrelated arm-2) rates in s^-1."""
    d = plan.detector
    both, only1, only2, _ = outcome_probabilities(plan.state, s1, s2, plan.cfg, d)
    return d.pair_rate * both, d.pair_rate * only1 + d.dark1, d.pair_rate * only2 + d.dark2


def accidental_rate(plan: RunPlan, s1, s2) -> float:
    _, u1, u2 = expected_rates(plan, s1, s2)
    return 2.0 * plan.detector.window_ns * 1e-9 * u1 * u2


def expected_counts(plan: RunPlan) -> np.ndarray:
    """Mean coincidence count per configuration, accidentals included."""
    out = []
    for s1, s2 in plan.cfg.configurations():
        true, _, _ = expected_rates(plan, s1, s2)
        out.append((true + accidental_rate(plan, s1, s2)) * plan.duration_s)
    return np.array(out)


def simulate_counts(plan: RunPlan) -> CoincidenceCounts:
    counts = []
    for k, (s1, s2) in enumerate(plan.cfg.configurations()):
        rng = _rng(plan.seed, k, _PAIRS)
        n_pairs = rng.poisson(plan.detector.pair_rate * plan.duration_s)
        probs = outcome_probabilities(plan.state, s1, s2, plan.cfg, plan.detector)
        true = int(rng.multinomial(n_pairs, probs)[0])
        acc = int(_rng(plan.seed, k, _ACCIDENTAL).poisson(accidental_rate(plan, s1, s2) * plan.duration_s))
        counts.append(true + acc)
    return CoincidenceCounts.from_sequence(counts, duration_s=plan.duration_s)


def _to_ns(times, limit):
    t = np.floor(times)
    np.clip(t, 0, limit - 1, out=t)
    t = t.astype(np.uint64)
    t.sort(kind="stable")
    return t


def simulate_configuration(plan: RunPlan, k: int, s1: Setting, s2: Setting) -> tuple[EventStream, EventStream]:
    d = plan.detector
    t_ns = plan.duration_s * 1e9
    rng = _rng(plan.seed, k, _PAIRS)
    n_pairs = rng.poisson(d.pair_rate * plan.duration_s)
    emit = rng.uniform(0.0, t_ns, n_pairs)
    outcome = rng.choice(4, size=n_pairs, p=outcome_probabilities(plan.state, s1, s2, plan.cfg, d))
    streams = []
    for ch, (hit, dark, jit) in enumerate(
        [((0, 1), d.dark1, _JITTER1), ((0, 2), d.dark2, _JITTER2)], start=1
    ):
        t = emit[np.isin(outcome, hit)]
        if plan.jitter_ns > 0:
            t = t + _rng(plan.seed, k, jit).normal(0.0, plan.jitter_ns, t.size)
        drng = _rng(plan.seed, k, _DARK1 if ch == 1 else _DARK2)
        darks = drng.uniform(0.0, t_ns, drng.poisson(dark * plan.duration_s))
        ts = _to_ns(np.concatenate([t, darks]), int(np.ceil(t_ns)))
        streams.append(EventStream(ch, ts, s1, s2, plan.duration_s, run=k))
    return streams[0], streams[1]


def simulate_events(plan: RunPlan) -> list[tuple[EventStream, EventStream]]:
    """Timestamped (channel 1, channel 2) streams for each of the six configurations."""
    return [simulate_configuration(plan, k, s1, s2) for k, (s1, s2) in enumerate(plan.cfg.configurations())]


def write_event_file(path, timestamps):
    with open(path, "w", newline="\n") as fh:
        fh.write("timestamp_ns\n")
        if len(timestamps):
            np.savetxt(fh, np.asarray(timestamps, dtype=np.uint64), fmt="%d")


def write_events(runs, out_dir, angles=None) -> dict:
    """Write ``run<k>_ch<c>.csv`` files plus ``manifest.json``; returns the manifest."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for k, (e1, e2) in enumerate(runs):
        names = []
        for e in (e1, e2):
            name = f"run{k}_ch{e.channel}.csv"
            write_event_file(os.path.join(out_dir, name), e.timestamps)
            names.append(name)
        entries.append(
            {
                "setting1": e1.setting1.label(),
                "setting2": e1.setting2.label(),
                "file1": names[0],
                "file2": names[1],
                "duration_s": e1.duration_s,
            }
        )
    manifest = {"runs": entries}
    if angles is not None:
        manifest["angles_deg"] = [float(a) for a in angles]
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
