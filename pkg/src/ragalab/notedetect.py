"""Note calibration database, Chebyshev bands, and note-event detection.

Each note has a calibrated mean and standard deviation of its fundamental
frequency. By Chebyshev's inequality ``P(|X - mean| < k*sd) >= 1 - 1/k^2`` for
any distribution, so the band ``mean +/- k*sd`` captures the note with at least
that probability (35/36 for the default k = 6). A sample inside exactly one band
is attributed to that note; a run of such samples that lasts long enough is a
note event, anything shorter is a glide.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

from .pitchdata import PitchTrack

NOTE_NAMES = (
    "Sa",
    "Komal Re",
    "Sudh Re",
    "Komal Ga",
    "Sudh Ga",
    "Sudh Ma",
    "Tibra Ma",
    "Pa",
    "Komal Dha",
    "Sudh Dha",
    "Komal Ni",
    "Sudh Ni",
)
OCTAVES = (-1, 0, 1)
DEFAULT_K = 6.0
DEFAULT_MIN_DWELL = 0.10
DEFAULT_MIN_LONG = 1.0

# absorbs float noise in sample-time differences, e.g. 19 * 0.01 vs 0.19
_TIME_EPS = 1e-9

NOTEDB_HEADER = ("note", "octave", "mean_hz", "sd_hz")
EVENTS_HEADER = ("note", "octave", "onset_sec", "offset_sec", "n_samples")


class NoteDatabaseError(ValueError):
    """Malformed calibration data."""


class DatabaseValidationError(NoteDatabaseError):
    """Well-formed calibration data that fails validation: duplicates or overlapping bands."""


def scale_index(name: str) -> int:
    try:
        return NOTE_NAMES.index(name)
    except ValueError:
        raise ValueError(f"unknown note name {name!r}") from None


@dataclass(frozen=True)
class NoteSpec:
    name: str
    octave: int
    mean_hz: float
    sd_hz: float

    def __post_init__(self):
        if self.name not in NOTE_NAMES:
            raise NoteDatabaseError(f"unknown note name {self.name!r}")
        if self.octave not in OCTAVES:
            raise NoteDatabaseError(f"octave must be one of {OCTAVES}, got {self.octave}")
        if not (math.isfinite(self.mean_hz) and self.mean_hz > 0):
            raise NoteDatabaseError(f"{self.name}: mean_hz must be positive")
        if not (math.isfinite(self.sd_hz) and self.sd_hz >= 0):
            raise NoteDatabaseError(f"{self.name}: sd_hz must be non-negative")

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, self.octave)


@dataclass(frozen=True)
class ChebyshevBand:
    lo: float
    hi: float
    min_prob: float

    def __contains__(self, f0: float) -> bool:
        return self.lo <= f0 <= self.hi


def band(spec: NoteSpec, k: float = DEFAULT_K) -> ChebyshevBand:
    """``mean +/- k*sd`` with its distribution-free coverage bound ``1 - 1/k^2``."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    half = k * spec.sd_hz
    # the bound is vacuous (negative) for k < 1
    return ChebyshevBand(spec.mean_hz - half, spec.mean_hz + half, max(0.0, 1.0 - 1.0 / k**2))


class NoteDatabase:
    """Validated set of note specs. Bands must be pairwise disjoint at the chosen k."""

    def __init__(self, specs: Iterable[NoteSpec], k: float = DEFAULT_K):
        if not k > 0:
            raise NoteDatabaseError(f"k must be positive, got {k}")
        self.k = float(k)
        self.specs: tuple[NoteSpec, ...] = tuple(specs)
        self._by_key: dict[tuple[str, int], NoteSpec] = {}
        for spec in self.specs:
            if spec.key in self._by_key:
                raise DatabaseValidationError(f"duplicate note {spec.name} (octave {spec.octave})")
            self._by_key[spec.key] = spec

        ordered = sorted(self.specs, key=lambda s: s.mean_hz)
        self._bands = [band(s, self.k) for s in ordered]
        self._ordered = ordered
        for (a, ba), (b, bb) in zip(zip(ordered, self._bands), zip(ordered[1:], self._bands[1:])):
            if not ba.hi < bb.lo:
                raise DatabaseValidationError(
                    f"bands overlap at k={self.k:g}: {a.name}({a.octave:+d}) "
                    f"[{ba.lo:.4f}, {ba.hi:.4f}] and {b.name}({b.octave:+d}) [{bb.lo:.4f}, {bb.hi:.4f}]"
                )
        self._los = [b.lo for b in self._bands]

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def __repr__(self) -> str:
        return f"NoteDatabase({len(self.specs)} notes, k={self.k:g})"

    def get(self, name: str, octave: int = 0) -> NoteSpec:
        try:
            return self._by_key[(name, octave)]
        except KeyError:
            raise KeyError(f"{name} (octave {octave}) not in database") from None

    def band_of(self, spec: NoteSpec) -> ChebyshevBand:
        return band(spec, self.k)

    def with_k(self, k: float) -> "NoteDatabase":
        return NoteDatabase(self.specs, k)

    def classify(self, f0: float) -> Optional[NoteSpec]:
        i = bisect.bisect_right(self._los, f0) - 1
        if i >= 0 and f0 <= self._bands[i].hi:
            return self._ordered[i]
        return None


def expand_octaves(middle: Sequence[NoteSpec], k: float = DEFAULT_K) -> NoteDatabase:
    """Add lower and upper octaves by halving/doubling means; sd is kept as is."""
    specs = list(middle)
    for s in specs:
        if s.octave != 0:
            raise NoteDatabaseError(f"expand_octaves expects middle-octave specs, got {s.name} octave {s.octave}")
    seen = set()
    for s in specs:
        if s.name in seen:
            raise DatabaseValidationError(f"duplicate note name {s.name}")
        seen.add(s.name)
    lower = [NoteSpec(s.name, -1, s.mean_hz / 2.0, s.sd_hz) for s in specs]
    upper = [NoteSpec(s.name, 1, s.mean_hz * 2.0, s.sd_hz) for s in specs]
    return NoteDatabase(lower + specs + upper, k)


def classify_sample(f0: float, db: NoteDatabase) -> Optional[NoteSpec]:
    if not isinstance(db, NoteDatabase):
        raise TypeError("classify_sample needs a validated NoteDatabase")
    return db.classify(f0)


def parse_notedb(text: str, k: float = DEFAULT_K, expand: bool = True) -> NoteDatabase:
    """Parse note-database CSV. A file with only middle-octave rows is expanded to three octaves."""
    rows = csv.reader(io.StringIO(text.lstrip("\ufeff"), newline=""))
    header = next(rows, None)
    if header is None or tuple(h.strip() for h in header) != NOTEDB_HEADER:
        raise NoteDatabaseError("note database header must be 'note,octave,mean_hz,sd_hz'")
    specs = []
    for line, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise NoteDatabaseError(f"line {line}: expected 4 columns, got {len(row)}")
        try:
            specs.append(NoteSpec(row[0].strip(), int(row[1]), float(row[2]), float(row[3])))
        except NoteDatabaseError as exc:
            raise NoteDatabaseError(f"line {line}: {exc}") from None
        except ValueError:
            raise NoteDatabaseError(f"line {line}: non-numeric field in {row!r}") from None
    if expand and specs and all(s.octave == 0 for s in specs):
        return expand_octaves(specs, k)
    return NoteDatabase(specs, k)


def read_notedb(path, k: float = DEFAULT_K, expand: bool = True) -> NoteDatabase:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_notedb(fh.read(), k, expand)


def default_notedb_text() -> str:
    return resources.files("ragalab").joinpath("data/notedb_harmonium.csv").read_text(encoding="utf-8")


def default_notedb(k: float = DEFAULT_K) -> NoteDatabase:
    """Bundled harmonium calibration (Sa at natural C), expanded to three octaves."""
    return parse_notedb(default_notedb_text(), k)


@dataclass(frozen=True)
class NoteEvent:
    name: str
    octave: int
    onset: float
    offset: float
    n_samples: int

    @property
    def duration(self) -> float:
        return self.offset - self.onset

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, self.octave)


@dataclass
class Detection:
    events: list[NoteEvent]
    # sample index range [first, last] of each event, parallel to events
    spans: list[tuple[int, int]] = field(default_factory=list)
    out_of_band: int = 0
    # in-band samples whose run was too short to count as a note
    glide_samples: int = 0
    glide_runs: int = 0
    unvoiced: int = 0

    def diagnostics(self) -> dict:
        return {
            "n_events": len(self.events),
            "out_of_band_samples": self.out_of_band,
            "short_run_samples": self.glide_samples,
            "short_runs": self.glide_runs,
            "unvoiced_samples": self.unvoiced,
        }


def classified_runs(track: PitchTrack, db: NoteDatabase):
    """Yield ``(spec, first, last)`` for each maximal run of consecutive samples in one band.

    Unvoiced and out-of-band samples end a run and belong to no run.
    """
    spec_run: Optional[NoteSpec] = None
    first = 0
    for i, s in enumerate(track.samples):
        spec = db.classify(s.f0) if s.f0 is not None else None
        if spec is not None and spec is spec_run:
            continue
        if spec_run is not None:
            yield spec_run, first, i - 1
        spec_run, first = spec, i
    if spec_run is not None:
        yield spec_run, first, len(track.samples) - 1


def detect(track: PitchTrack, db: NoteDatabase, min_dwell: float = DEFAULT_MIN_DWELL) -> Detection:
    """Segment a track into note events, keeping a tally of what was discarded."""
    if not min_dwell > 0:
        raise ValueError(f"min_dwell must be positive, got {min_dwell}")
    result = Detection(events=[])
    samples = track.samples
    in_runs = 0
    for spec, first, last in classified_runs(track, db):
        n = last - first + 1
        in_runs += n
        onset, offset = samples[first].t, samples[last].t
        if n >= 2 and offset - onset >= min_dwell - _TIME_EPS:
            result.events.append(NoteEvent(spec.name, spec.octave, onset, offset, n))
            result.spans.append((first, last))
        else:
            result.glide_samples += n
            result.glide_runs += 1
    result.unvoiced = len(samples) - track.n_voiced
    result.out_of_band = track.n_voiced - in_runs
    return result


def detect_events(track: PitchTrack, db: NoteDatabase, min_dwell: float = DEFAULT_MIN_DWELL) -> list[NoteEvent]:
    return detect(track, db, min_dwell).events


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


@dataclass(frozen=True)
class LongStays:
    events: list[NoteEvent]
    fit: Optional[LinearFit] = None

    @property
    def onsets(self) -> list[float]:
        return [e.onset for e in self.events]


def onset_rank_fit(onsets: Sequence[float]) -> Optional[LinearFit]:
    """OLS of onset time against rank 1..m; None when fewer than two onsets."""
    y = np.asarray(onsets, dtype=float)
    if y.size < 2:
        return None
    x = np.arange(1, y.size + 1, dtype=float)
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LinearFit(slope, intercept, r2)


def long_stays(events: Sequence[NoteEvent], min_long: float = DEFAULT_MIN_LONG) -> LongStays:
    if not min_long > 0:
        raise ValueError(f"min_long must be positive, got {min_long}")
    chosen = [e for e in events if e.duration >= min_long - _TIME_EPS]
    return LongStays(chosen, onset_rank_fit([e.onset for e in chosen]))


def format_events(events: Sequence[NoteEvent]) -> str:
    out = io.StringIO()
    out.write(",".join(EVENTS_HEADER) + "\n")
    for e in events:
        # repr keeps times exactly round-trippable
        out.write(f"{e.name},{e.octave},{float(e.onset)!r},{float(e.offset)!r},{e.n_samples}\n")
    return out.getvalue()


def parse_events(text: str) -> list[NoteEvent]:
    rows = csv.reader(io.StringIO(text.lstrip("\ufeff"), newline=""))
    header = next(rows, None)
    if header is None or tuple(h.strip() for h in header) != EVENTS_HEADER:
        raise ValueError("events header must be 'note,octave,onset_sec,offset_sec,n_samples'")
    events = []
    for line, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 5:
            raise ValueError(f"line {line}: expected 5 columns, got {len(row)}")
        name = row[0].strip()
        if name not in NOTE_NAMES:
            raise ValueError(f"line {line}: unknown note name {name!r}")
        try:
            ev = NoteEvent(name, int(row[1]), float(row[2]), float(row[3]), int(row[4]))
        except ValueError:
            raise ValueError(f"line {line}: non-numeric field in {row!r}") from None
        if events and ev.onset < events[-1].onset:
            raise ValueError(f"line {line}: events must be ordered by onset")
        events.append(ev)
    return events


def read_events(path) -> list[NoteEvent]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_events(fh.read())


def write_events(events: Sequence[NoteEvent], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_events(events))
