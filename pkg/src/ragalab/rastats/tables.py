"""Note-occurrence counting: frequency tables, time segments, windowed counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..notedetect import NOTE_NAMES, NoteEvent

_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class FrequencyTable:
    labels: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        counts = tuple(int(c) for c in self.counts)
        if len(labels) != len(counts):
            raise ValueError(f"{len(labels)} labels but {len(counts)} counts")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, label: str) -> int:
        return self.counts[self.labels.index(label)]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.labels, self.counts))

    def scaled(self, factor: int) -> "FrequencyTable":
        return FrequencyTable(self.labels, tuple(c * factor for c in self.counts))


@dataclass(frozen=True)
class SegmentSpec:
    """A time span. Both ends are included unless ``closed`` is False (then ``[start, end)``)."""

    start: float
    end: float
    closed: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError("segment bounds must be finite")
        if not (self.end > self.start >= 0):
            raise ValueError(f"segment needs end > start >= 0, got {self.start}:{self.end}")

    def __contains__(self, t: float) -> bool:
        if self.closed:
            return self.start <= t <= self.end
        return self.start <= t < self.end

    def __str__(self) -> str:
        return f"{self.start:g}:{self.end:g}"


def parse_segments(text: str) -> list[SegmentSpec]:
    """Parse ``start:end[,start:end...]`` (seconds)."""
    segments = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        bounds = part.split(":")
        if len(bounds) != 2:
            raise ValueError(f"bad segment {part!r}; expected start:end")
        try:
            start, end = float(bounds[0]), float(bounds[1])
        except ValueError:
            raise ValueError(f"bad segment {part!r}; bounds must be numbers") from None
        segments.append(SegmentSpec(start, end))
    if not segments:
        raise ValueError("no segments given")
    return segments


def default_segments(duration: float) -> list[SegmentSpec]:
    """First half, middle, last half; ``0:30,20:50,30:60`` for a 60 s recording."""
    return [
        SegmentSpec(0.0, duration / 2),
        SegmentSpec(duration / 3, 5 * duration / 6),
        SegmentSpec(duration / 2, duration),
    ]


def scale_labels(names: Iterable[str]) -> tuple[str, ...]:
    """Distinct note names in chromatic order starting from Sa."""
    return tuple(sorted(set(names), key=NOTE_NAMES.index))


def count_notes(
    events: Sequence[NoteEvent],
    segment: Optional[SegmentSpec] = None,
    labels: Optional[Sequence[str]] = None,
) -> FrequencyTable:
    """Count events per note name (all octaves pooled) whose onset falls in ``segment``."""
    if labels is None:
        labels = scale_labels(e.name for e in events)
    labels = tuple(labels)
    index = {name: i for i, name in enumerate(labels)}
    counts = [0] * len(labels)
    for e in events:
        if segment is not None and e.onset not in segment:
            continue
        if e.name not in index:
            raise ValueError(f"event note {e.name!r} not among labels {labels}")
        counts[index[e.name]] += 1
    return FrequencyTable(labels, tuple(counts))


def relative(table: FrequencyTable) -> np.ndarray:
    if table.total == 0:
        raise ValueError("relative frequencies undefined for an empty table")
    return np.asarray(table.counts, dtype=float) / table.total


def expected_counts(overall_rel: Sequence[float], n_segment: int) -> np.ndarray:
    if n_segment < 0:
        raise ValueError("n_segment must be non-negative")
    return np.asarray(overall_rel, dtype=float) * n_segment


@dataclass(frozen=True)
class WindowedCounts:
    label: str
    window: float
    edges: tuple[float, ...]  # upper limit of each window
    counts: tuple[int, ...]
    cumulative: tuple[int, ...]


def windowed_counts(
    events: Sequence[NoteEvent], label: str, window: float, span: SegmentSpec
) -> WindowedCounts:
    """Per-window counts of one note plus the less-than cumulative frequency.

    Windows are ``[lo, hi)``; the last one is clipped to the span and follows
    the span's closedness at its upper end.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    n = max(1, math.ceil((span.end - span.start) / window - _EDGE_EPS))
    edges = [min(span.start + (i + 1) * window, span.end) for i in range(n)]
    counts = [0] * n
    for e in events:
        if e.name != label or e.onset not in span:
            continue
        i = int((e.onset - span.start) // window)
        # guard float rounding right at an edge
        if 0 < i < n and e.onset < edges[i - 1]:
            i -= 1
        elif i < n - 1 and e.onset >= edges[i]:
            i += 1
        counts[min(i, n - 1)] += 1
    cumulative = np.cumsum(counts).tolist() if counts else []
    return WindowedCounts(label, float(window), tuple(edges), tuple(counts), tuple(int(c) for c in cumulative))


@dataclass(frozen=True)
class TableComparison:
    labels: tuple[str, ...]
    counts_a: tuple[int, ...]
    counts_b: tuple[int, ...]
    rel_a: tuple[float, ...]
    rel_b: tuple[float, ...]
    deltas: tuple[float, ...]
    tvd: float


def compare_tables(a: FrequencyTable, b: FrequencyTable) -> TableComparison:
    """Relative-frequency differences ``a - b`` and their total-variation distance."""
    if a.labels != b.labels:
        raise ValueError(f"label mismatch: {a.labels} vs {b.labels}")
    ra, rb = relative(a), relative(b)
    d = ra - rb
    return TableComparison(
        labels=a.labels,
        counts_a=a.counts,
        counts_b=b.counts,
        rel_a=tuple(ra.tolist()),
        rel_b=tuple(rb.tolist()),
        deltas=tuple(d.tolist()),
        tvd=float(0.5 * np.abs(d).sum()),
    )
