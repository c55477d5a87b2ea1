"""Pitch-contour ornaments between note stays, and onset rhythm.

Every note event is a stay ("no transition"). The voiced samples between
stays form spans, and each span gets one of five movement classes:

* Hat: rises to a peak and returns near its starting pitch
* Valley: dips to a trough and returns near its starting pitch
* Rising / Falling: net move of at least ``reversal_threshold`` with no
  counter-move of that size
* Mixed: anything else

Rising and falling spans also get a shape (convex, concave, linear). Hats and
valleys also get a skew and a magnitude. All geometry is measured in semitones.
"""

from __future__ import annotations

import enum
import io
import statistics
from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .notedetect import DEFAULT_MIN_DWELL, NoteDatabase, NoteEvent, detect
from .pitchdata import PitchTrack, semitones

CSV_HEADER = ("kind", "t0", "t1", "shape", "skew", "magnitude", "extent_semitones")

# keeps the symmetric-skew window open at its boundary despite float error
_BOUNDARY_EPS = 1e-12


class Kind(str, enum.Enum):
    STAY = "Stay"
    RISING = "Rising"
    FALLING = "Falling"
    MIXED = "Mixed"
    HAT = "Hat"
    VALLEY = "Valley"


class Shape(str, enum.Enum):
    CONVEX = "Convex"
    CONCAVE = "Concave"
    LINEAR = "Linear"
    NA = "NotApplicable"


class Skew(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    SYMMETRIC = "Symmetric"
    NA = "NotApplicable"


class Magnitude(str, enum.Enum):
    LOW = "Low"
    MODERATE = "Moderate"
    HIGH = "High"
    NA = "NotApplicable"


VALLEY_MAGNITUDE_NAMES = {Magnitude.LOW: "Shallow", Magnitude.MODERATE: "Moderate", Magnitude.HIGH: "Deep"}


@dataclass(frozen=True)
class ContourParams:
    reversal_threshold: float = 0.5
    return_tolerance: float = 0.5
    linear_tolerance: float = 0.05
    skew_tolerance: float = 0.1
    mag_lo: float = 1.0
    mag_hi: float = 3.0
    cv_threshold: float = 0.3

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")
        if self.mag_hi < self.mag_lo:
            raise ValueError("mag_hi must be >= mag_lo")
        if self.skew_tolerance >= 0.5:
            raise ValueError("skew_tolerance must be below 0.5")

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "ContourParams":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown contour parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ContourSegment:
    kind: Kind
    t0: float
    t1: float
    shape: Shape = Shape.NA
    skew: Skew = Skew.NA
    magnitude: Magnitude = Magnitude.NA
    extent_semitones: float = 0.0
    note: Optional[str] = None  # stays only

    @property
    def magnitude_label(self) -> str:
        if self.kind is Kind.VALLEY and self.magnitude is not Magnitude.NA:
            return VALLEY_MAGNITUDE_NAMES[self.magnitude]
        return self.magnitude.value


def _excursions(p: np.ndarray) -> tuple[float, float]:
    """Largest drop after a running max, and largest rise after a running min."""
    drawdown = float(np.max(np.maximum.accumulate(p) - p))
    drawup = float(np.max(p - np.minimum.accumulate(p)))
    return drawdown, drawup


def classify_direction(
    times: Sequence[float], pitches: Sequence[float], params: ContourParams = ContourParams()
) -> Kind:
    p = np.asarray(pitches, dtype=float)
    if p.size < 2:
        raise ValueError("need at least two samples")
    thr = params.reversal_threshold
    start, end = p[0], p[-1]
    returns = abs(end - start) < params.return_tolerance
    if returns and p.max() - max(start, end) >= thr:
        return Kind.HAT
    if returns and min(start, end) - p.min() >= thr:
        return Kind.VALLEY
    net = end - start
    drawdown, drawup = _excursions(p)
    if net >= thr and drawdown < thr:
        return Kind.RISING
    if net <= -thr and drawup < thr:
        return Kind.FALLING
    return Kind.MIXED


def chord_area(times: Sequence[float], pitches: Sequence[float]) -> float:
    """Signed area between curve and endpoint chord, per unit duration and unit net change."""
    t = np.asarray(times, dtype=float)
    p = np.asarray(pitches, dtype=float)
    net = p[-1] - p[0]
    span = t[-1] - t[0]
    if net == 0:
        raise ValueError("shape is undefined for a span with zero net change")
    if not span > 0:
        raise ValueError("span must have positive duration")
    chord = p[0] + net * (t - t[0]) / span
    d = p - chord
    area = float(np.sum((d[1:] + d[:-1]) * np.diff(t)) / 2.0)
    return area / (span * abs(net))


def classify_shape(
    times: Sequence[float], pitches: Sequence[float], params: ContourParams = ContourParams()
) -> Shape:
    """Convex when the curve sags below its chord, concave when it bulges above."""
    a = chord_area(times, pitches)
    if a < -params.linear_tolerance:
        return Shape.CONVEX
    if a > params.linear_tolerance:
        return Shape.CONCAVE
    return Shape.LINEAR


def classify_hat_valley(
    times: Sequence[float],
    pitches: Sequence[float],
    kind: Kind = Kind.HAT,
    params: ContourParams = ContourParams(),
) -> tuple[Skew, Magnitude, float]:
    """Skew from where the extremum falls in the span; magnitude from its height over the mean endpoint.

    Returns ``(skew, magnitude, extent_semitones)``.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(pitches, dtype=float)
    if kind not in (Kind.HAT, Kind.VALLEY):
        raise ValueError("kind must be Hat or Valley")
    i = int(np.argmax(p) if kind is Kind.HAT else np.argmin(p))
    r = (t[i] - t[0]) / (t[-1] - t[0])
    if abs(r - 0.5) < params.skew_tolerance - _BOUNDARY_EPS:
        skew = Skew.SYMMETRIC
    elif r < 0.5:
        skew = Skew.POSITIVE
    else:
        skew = Skew.NEGATIVE
    extent = float(abs(p[i] - (p[0] + p[-1]) / 2.0))
    if extent < params.mag_lo:
        mag = Magnitude.LOW
    elif extent <= params.mag_hi:
        mag = Magnitude.MODERATE
    else:
        mag = Magnitude.HIGH
    return skew, mag, extent


def classify_span(times: Sequence[float], pitches: Sequence[float], params: ContourParams = ContourParams()) -> ContourSegment:
    """Full classification of one non-stay span (pitches in semitones)."""
    kind = classify_direction(times, pitches, params)
    t0, t1 = float(times[0]), float(times[-1])
    if kind in (Kind.RISING, Kind.FALLING):
        return ContourSegment(
            kind, t0, t1, shape=classify_shape(times, pitches, params),
            extent_semitones=float(abs(pitches[-1] - pitches[0])),
        )
    if kind in (Kind.HAT, Kind.VALLEY):
        skew, mag, extent = classify_hat_valley(times, pitches, kind, params)
        return ContourSegment(kind, t0, t1, skew=skew, magnitude=mag, extent_semitones=extent)
    return ContourSegment(kind, t0, t1, extent_semitones=float(np.max(pitches) - np.min(pitches)))


def span_indices(track: PitchTrack, stay_spans: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Index ranges of maximal voiced runs outside every stay, split by unvoiced samples."""
    in_stay = np.zeros(len(track.samples), dtype=bool)
    for a, b in stay_spans:
        in_stay[a : b + 1] = True
    out = []
    start = None
    for i, s in enumerate(track.samples):
        free = s.f0 is not None and not in_stay[i]
        if free and start is None:
            start = i
        elif not free and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(track.samples) - 1))
    return out


def segment_contour(
    track: PitchTrack,
    db: NoteDatabase,
    min_dwell: float = DEFAULT_MIN_DWELL,
    params: ContourParams = ContourParams(),
) -> list[ContourSegment]:
    """Stays plus one classified segment per non-stay voiced span of two or more samples."""
    detection = detect(track, db, min_dwell)
    samples = track.samples
    segments = []
    for ev, (a, b) in zip(detection.events, detection.spans):
        pitch = semitones([s.f0 for s in samples[a : b + 1]])
        segments.append(
            ContourSegment(Kind.STAY, ev.onset, ev.offset, extent_semitones=max(pitch) - min(pitch), note=ev.name)
        )
    for a, b in span_indices(track, detection.spans):
        if b - a + 1 < 2:
            continue
        chunk = samples[a : b + 1]
        segments.append(classify_span([s.t for s in chunk], semitones([s.f0 for s in chunk]), params))
    segments.sort(key=lambda s: s.t0)
    return segments


@dataclass
class ContourSummary:
    kinds: Counter = field(default_factory=Counter)
    shapes: Counter = field(default_factory=Counter)  # (kind, shape)
    skews: Counter = field(default_factory=Counter)  # (kind, skew)
    magnitudes: Counter = field(default_factory=Counter)  # (kind, magnitude)

    def to_dict(self) -> dict:
        def shapes(kind):
            d = {s.value.lower(): self.shapes[(kind, s)] for s in (Shape.CONVEX, Shape.CONCAVE, Shape.LINEAR)}
            return {"total": self.kinds[kind], **d}

        def hv(kind):
            skew = {s.value.lower(): self.skews[(kind, s)] for s in (Skew.POSITIVE, Skew.NEGATIVE, Skew.SYMMETRIC)}
            names = VALLEY_MAGNITUDE_NAMES if kind is Kind.VALLEY else {m: m.value for m in VALLEY_MAGNITUDE_NAMES}
            mag = {names[m].lower(): self.magnitudes[(kind, m)] for m in (Magnitude.LOW, Magnitude.MODERATE, Magnitude.HIGH)}
            return {"total": self.kinds[kind], "skew": skew, "magnitude": mag}

        return {
            "no_transition": self.kinds[Kind.STAY],
            "rising": shapes(Kind.RISING),
            "falling": shapes(Kind.FALLING),
            "mixed": self.kinds[Kind.MIXED],
            "hats": hv(Kind.HAT),
            "valleys": hv(Kind.VALLEY),
        }


def summarize(segments: Sequence[ContourSegment]) -> ContourSummary:
    summary = ContourSummary()
    for s in segments:
        summary.kinds[s.kind] += 1
        if s.shape is not Shape.NA:
            summary.shapes[(s.kind, s.shape)] += 1
        if s.skew is not Skew.NA:
            summary.skews[(s.kind, s.skew)] += 1
        if s.magnitude is not Magnitude.NA:
            summary.magnitudes[(s.kind, s.magnitude)] += 1
    return summary


def format_segments(segments: Sequence[ContourSegment]) -> str:
    out = io.StringIO()
    out.write(",".join(CSV_HEADER) + "\n")
    for s in segments:
        out.write(
            f"{s.kind.value},{s.t0!r},{s.t1!r},{s.shape.value},{s.skew.value},"
            f"{s.magnitude_label},{s.extent_semitones:.6g}\n"
        )
    return out.getvalue()


@dataclass(frozen=True)
class IOIReport:
    intervals: tuple[float, ...]
    mean: float
    cv: float
    rhythmic: bool


def ioi_report(events_or_onsets: Sequence[NoteEvent] | Sequence[float], cv_threshold: float = 0.3) -> IOIReport:
    """Inter-onset intervals; rhythmic when their coefficient of variation is at most ``cv_threshold``."""
    onsets = [e.onset if isinstance(e, NoteEvent) else float(e) for e in events_or_onsets]
    if len(onsets) < 2:
        raise ValueError("need at least two onsets")
    intervals = tuple(b - a for a, b in zip(onsets, onsets[1:]))
    mean = statistics.fmean(intervals)
    cv = statistics.pstdev(intervals) / mean if mean > 0 else 0.0
    return IOIReport(intervals, mean, cv, cv <= cv_threshold)
