"""Pitch tracks: parsing, validation, and conversion from Hz to MIDI pitch space.

A pitch track is a time-ordered list of ``(t, f0)`` samples as exported by a
monophonic pitch tracker. Unvoiced frames carry ``f0 = None``.

CSV format::

    time_sec,f0_hz
    0.00,243.27
    0.01,          <- blank (or 0) means unvoiced
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

HEADER = ("time_sec", "f0_hz")
A4_HZ = 440.0
A4_MIDI = 69.0


class TrackParseError(ValueError):
    """Malformed pitch-track input. ``line`` is 1-based (the header is line 1)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class PitchSample:
    t: float
    f0: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError(f"sample time must be finite, got {self.t}")
        if self.f0 is not None and not (math.isfinite(self.f0) and self.f0 > 0):
            raise ValueError(f"f0 must be positive when present, got {self.f0}")

    @property
    def voiced(self) -> bool:
        return self.f0 is not None


@dataclass(frozen=True)
class PitchTrack:
    samples: tuple[PitchSample, ...]
    duration: float = field(default=-1.0)

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        for prev, cur in zip(samples, samples[1:]):
            if not cur.t > prev.t:
                raise ValueError(f"sample times must strictly increase ({prev.t} then {cur.t})")
        last = samples[-1].t if samples else 0.0
        if self.duration < 0:
            object.__setattr__(self, "duration", last)
        elif self.duration < last:
            raise ValueError(f"duration {self.duration} shorter than last sample time {last}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def voiced(self) -> list[PitchSample]:
        return [s for s in self.samples if s.f0 is not None]

    @property
    def n_voiced(self) -> int:
        return sum(1 for s in self.samples if s.f0 is not None)

    @classmethod
    def from_arrays(cls, times: Iterable[float], f0s: Iterable[Optional[float]]) -> "PitchTrack":
        samples = []
        for t, f in zip(times, f0s):
            if f is not None and (f == 0 or (isinstance(f, float) and math.isnan(f))):
                f = None
            samples.append(PitchSample(float(t), None if f is None else float(f)))
        return cls(tuple(samples))


@dataclass(frozen=True)
class PitchValue:
    midi_real: float
    midi_int: int


def to_midi(f0: float) -> PitchValue:
    """Map a fundamental frequency to MIDI pitch (A440 = 69, 12 per octave)."""
    if not f0 > 0:
        raise ValueError(f"f0 must be positive, got {f0}")
    real = A4_MIDI + 12.0 * math.log2(f0 / A4_HZ)
    return PitchValue(real, round_half_up(real))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def semitones(f0s: Sequence[float]) -> list[float]:
    """Real-valued MIDI pitch for each frequency."""
    return [A4_MIDI + 12.0 * math.log2(f / A4_HZ) for f in f0s]


@dataclass(frozen=True)
class PitchProfile:
    times: tuple[float, ...]
    midi: tuple[float, ...]
    min_int: int
    max_int: int

    def __len__(self) -> int:
        return len(self.times)


def pitch_profile(track: PitchTrack) -> PitchProfile:
    """MIDI pitch curve over the voiced samples, with integer extremes."""
    voiced = track.voiced
    if not voiced:
        raise ValueError("pitch profile needs at least one voiced sample")
    values = [to_midi(s.f0) for s in voiced]
    ints = [v.midi_int for v in values]
    return PitchProfile(
        times=tuple(s.t for s in voiced),
        midi=tuple(v.midi_real for v in values),
        min_int=min(ints),
        max_int=max(ints),
    )


def _parse_number(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise TrackParseError(f"non-numeric {what} {text!r}", line) from None
    if not math.isfinite(value):
        raise TrackParseError(f"non-finite {what} {text!r}", line)
    return value


def parse_track(text: str | io.TextIOBase) -> PitchTrack:
    """Parse pitch-track CSV text (or an open text stream) into a validated track."""
    if not isinstance(text, str):
        text = text.read()
    if text.startswith("\ufeff"):
        text = text[1:]
    rows = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(rows)
    except StopIteration:
        raise TrackParseError("empty input; expected header 'time_sec,f0_hz'", 1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise TrackParseError(f"bad header {','.join(header)!r}; expected 'time_sec,f0_hz'", 1)

    samples: list[PitchSample] = []
    for line, row in enumerate(rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise TrackParseError(f"expected 2 columns, got {len(row)}", line)
        t = _parse_number(row[0].strip(), "time", line)
        f_text = row[1].strip()
        f0 = None
        if f_text:
            f = _parse_number(f_text, "f0", line)
            if f < 0:
                raise TrackParseError(f"negative f0 {f_text}", line)
            f0 = f if f > 0 else None
        if samples and not t > samples[-1].t:
            raise TrackParseError(f"non-increasing time {row[0].strip()}", line)
        samples.append(PitchSample(t, f0))
    return PitchTrack(tuple(samples))


def format_track(track: PitchTrack, decimals: Optional[int] = None) -> str:
    """CSV text for a track; ``decimals=None`` writes the shortest exact float repr."""

    def fmt(x: float) -> str:
        return repr(float(x)) if decimals is None else f"{x:.{decimals}f}"

    out = io.StringIO()
    out.write(",".join(HEADER) + "\n")
    for s in track.samples:
        f = "" if s.f0 is None else fmt(s.f0)
        out.write(f"{fmt(s.t)},{f}\n")
    return out.getvalue()


def read_track(path) -> PitchTrack:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_track(fh.read())


def write_track(track: PitchTrack, path, decimals: Optional[int] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_track(track, decimals))
