"""Coincidence counting on timestamp files and CH evaluation of a full run.

Matching is one-to-one and greedy over the two time-ordered streams: the
heads of both streams are compared, matched and consumed if
|t1 - t2| <= window, otherwise the earlier head is discarded (it can no
longer match anything). Each event is used at most once and, for a given
ch1 event, the earliest eligible ch2 event is taken. On sorted input this
greedy rule yields a maximum one-to-one matching, so the count is symmetric
in the two channels and non-decreasing in the window.

File-based counting streams both files in fixed-size chunks.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bell import ChResult, CoincidenceCounts, ch_from_counts
from .errors import FormatError, ManifestError, ValidationError
from .model import AnalyzerConfig, Setting

CHUNK = 1 << 16
HEADER = "timestamp_ns"


def _as_array(x):
    ts = getattr(x, "timestamps", x)
    return np.ascontiguousarray(np.asarray(ts, dtype=np.int64))


def _check_sorted(ts, offset=0, previous=None, name="stream"):
    if previous is not None and ts.size and ts[0] < previous:
        raise FormatError(f"{name}: timestamps not sorted at index {offset}", index=offset)
    if ts.size > 1:
        bad = np.flatnonzero(ts[1:] < ts[:-1])
        if bad.size:
            idx = offset + int(bad[0]) + 1
            raise FormatError(f"{name}: timestamps not sorted at index {idx}", index=idx)


def _check_window(window_ns):
    w = float(window_ns)
    if not w > 0:
        raise ValidationError(f"window_ns must be > 0, got {window_ns}", field="window_ns")
    return w


def count_coincidences(ch1, ch2, window_ns: float) -> int:
    """Greedy one-to-one coincidences between two sorted timestamp streams (ns)."""
    w = _check_window(window_ns)
    t1, t2 = _as_array(ch1), _as_array(ch2)
    _check_sorted(t1, name="ch1")
    _check_sorted(t2, name="ch2")
    count, _, _ = _kernels.match_heads(t1, t2, 0, 0, w)
    return int(count)


def iter_chunks(path, chunk_size: int = CHUNK):
    """Yield int64 arrays of timestamps from an event CSV, ``chunk_size`` lines at a time."""
    try:
        fh = open(path)
    except OSError as exc:
        raise OSError(f"cannot open event file {path}: {exc.strerror}") from exc
    with fh:
        header = fh.readline().strip()
        if header != HEADER:
            raise FormatError(f"{path}: expected header {HEADER!r}, got {header!r}")
        while True:
            lines = list(itertools.islice(fh, chunk_size))
            if not lines:
                return
            try:
                yield np.fromiter((int(s) for s in lines if s.strip()), dtype=np.int64)
            except ValueError as exc:
                raise FormatError(f"{path}: {exc}") from None


class _Cursor:
    def __init__(self, path, chunk_size, name):
        self._it = iter_chunks(path, chunk_size)
        self.name = name
        self.buf = np.empty(0, dtype=np.int64)
        self.pos = 0
        self.offset = 0
        self.total = 0
        self.last = None
        self.done = False

    def refill(self):
        """Load the next chunk once the current one is consumed; False at EOF."""
        while self.pos >= self.buf.size:
            self.offset += self.buf.size
            try:
                nxt = next(self._it)
            except StopIteration:
                self.done = True
                return False
            _check_sorted(nxt, self.offset, self.last, self.name)
            if nxt.size:
                self.last = nxt[-1]
            self.total += nxt.size
            self.buf, self.pos = nxt, 0
        return True

    def drain(self):
        while self.refill():
            self.pos = self.buf.size


def count_coincidences_files(path1, path2, window_ns: float, chunk_size: int = CHUNK):
    """Stream two event files; returns ``(coincidences, events_ch1, events_ch2)``."""
    w = _check_window(window_ns)
    c1, c2 = _Cursor(path1, chunk_size, str(path1)), _Cursor(path2, chunk_size, str(path2))
    count = 0
    while c1.refill() and c2.refill():
        n, c1.pos, c2.pos = _kernels.match_heads(c1.buf, c2.buf, c1.pos, c2.pos, w)
        count += n
    c1.drain()
    c2.drain()
    return count, c1.total, c2.total


def read_events(path) -> np.ndarray:
    chunks = list(iter_chunks(path))
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class RunEntry:
    setting1: Setting
    setting2: Setting
    file1: str
    file2: str
    duration_s: float


@dataclass(frozen=True)
class RunManifest:
    runs: list[RunEntry]
    angles: tuple[float, float, float, float] | None = None
    base_dir: str = "."

    def path(self, name):
        return name if os.path.isabs(name) else os.path.join(self.base_dir, name)


def _same(a: Setting, b: Setting):
    if a.is_open or b.is_open:
        return a.is_open and b.is_open
    return abs(a.angle - b.angle) < 1e-9


def load_manifest(path) -> RunManifest:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read manifest {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc.msg})") from None
    return manifest_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def manifest_from_dict(data, base_dir=".") -> RunManifest:
    try:
        runs = [
            RunEntry(
                Setting.parse(r["setting1"]),
                Setting.parse(r["setting2"]),
                r["file1"],
                r["file2"],
                float(r["duration_s"]),
            )
            for r in data["runs"]
        ]
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"manifest run entry missing field: {exc}") from None
    angles = data.get("angles_deg")
    return RunManifest(runs, tuple(float(a) for a in angles) if angles is not None else None, base_dir)


def _infer_angles(runs):
    if len(runs) != 6:
        raise ManifestError(f"expected 6 runs when angles_deg is absent, got {len(runs)}")
    a_prime = [r.setting1 for r in runs if r.setting2.is_open and not r.setting1.is_open]
    b = [r.setting2 for r in runs if r.setting1.is_open and not r.setting2.is_open]
    if len(a_prime) != 1 or len(b) != 1:
        raise ManifestError("need exactly one (θ1′, open) run and one (open, θ2) run")
    a_prime, b = a_prime[0], b[0]
    arm1 = [r.setting1 for r in runs if not r.setting1.is_open and not _same(r.setting1, a_prime)]
    arm2 = [r.setting2 for r in runs if not r.setting2.is_open and not _same(r.setting2, b)]
    if not arm1 or not arm2:
        raise ManifestError("cannot identify θ1 and θ2′ from the run settings")
    return (arm1[0].angle, a_prime.angle, b.angle, arm2[0].angle)


def ch_runs(manifest: RunManifest) -> list[RunEntry]:
    """The six runs in CH summation order; raises ManifestError on gaps or duplicates."""
    angles = manifest.angles or _infer_angles(manifest.runs)
    try:
        cfg = AnalyzerConfig.from_angles(angles)
    except ValidationError as exc:
        raise ManifestError(f"invalid analysis angles: {exc}") from None
    ordered, missing = [], []
    for s1, s2 in cfg.configurations():
        hits = [r for r in manifest.runs if _same(r.setting1, s1) and _same(r.setting2, s2)]
        if len(hits) > 1:
            raise ManifestError(f"duplicate runs for configuration ({s1}, {s2})")
        if not hits:
            missing.append(f"({s1}, {s2})")
        else:
            ordered.append(hits[0])
    if missing:
        raise ManifestError("manifest lacks configuration(s): " + ", ".join(missing))
    durations = {r.duration_s for r in ordered}
    if len(durations) != 1 or not all(d > 0 for d in durations):
        raise ManifestError(f"CH runs need one common positive duration, got {sorted(durations)}")
    return ordered


@dataclass(frozen=True)
class RunCount:
    setting1: Setting
    setting2: Setting
    coincidences: int
    singles1: int
    singles2: int
    duration_s: float


def count_runs(manifest: RunManifest, window_ns: float) -> list[RunCount]:
    out = []
    for r in ch_runs(manifest):
        n, s1, s2 = count_coincidences_files(manifest.path(r.file1), manifest.path(r.file2), window_ns)
        out.append(RunCount(r.setting1, r.setting2, n, s1, s2, r.duration_s))
    return out


def per_run_csv(counts: list[RunCount]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["setting1", "setting2", "coincidences", "duration_s"])
    for c in counts:
        w.writerow([c.setting1.label(), c.setting2.label(), c.coincidences, f"{c.duration_s:.9g}"])
    return buf.getvalue()


def accidental_estimate(c: RunCount, window_ns: float) -> float:
    """Expected accidentals 2·window·r1·r2·T from the measured singles rates."""
    r1, r2 = c.singles1 / c.duration_s, c.singles2 / c.duration_s
    return 2.0 * window_ns * 1e-9 * r1 * r2 * c.duration_s


def analyze_counts(counts: list[RunCount], window_ns: float, subtract_accidentals: bool = False) -> ChResult:
    cc = CoincidenceCounts.from_sequence([c.coincidences for c in counts], duration_s=counts[0].duration_s)
    acc = [accidental_estimate(c, window_ns) for c in counts] if subtract_accidentals else None
    return ch_from_counts(cc, per_second=True, accidentals=acc)


def analyze_run(manifest: RunManifest, window_ns: float, subtract_accidentals: bool = False) -> ChResult:
    """Count coincidences for every CH configuration and combine them."""
    if isinstance(manifest, (str, os.PathLike)):
        manifest = load_manifest(manifest)
    return analyze_counts(count_runs(manifest, window_ns), window_ns, subtract_accidentals)
