"""Seeded synthetic performances: multinomial note sequences rendered to pitch tracks.

Randomness comes from numpy's PCG64 bit generator. The seed is split with
``SeedSequence.spawn`` into one stream for the symbol sequence and one for the
rendering, so changing render parameters never changes the sequence.
Categorical draws use inverse-CDF lookup on a uniform; Gaussian jitter uses the
Box-Muller transform on pairs of uniforms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .notedetect import NoteDatabase
from .pitchdata import PitchSample, PitchTrack

GENERATOR_ID = "numpy-PCG64/SeedSequence.spawn(2)/inverse-cdf/box-muller"

Symbol = Union[str, tuple[str, int]]

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorConfig:
    labels: tuple[str, ...]
    probabilities: tuple[float, ...]
    drift: Optional[tuple[float, ...]] = None
    stay_duration_mean: float = 0.4
    stay_duration_jitter: float = 0.1
    glide_duration: float = 0.05
    f0_jitter_scale: float = 1.0
    sample_period: float = 0.01
    seed: int = 0
    octave: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        if self.drift is not None:
            object.__setattr__(self, "drift", tuple(float(d) for d in self.drift))
        validate_config(self)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["labels"] = list(self.labels)
        d["probabilities"] = list(self.probabilities)
        d["drift"] = None if self.drift is None else list(self.drift)
        return d


def validate_config(cfg: GeneratorConfig) -> None:
    p = cfg.probabilities
    if len(p) != len(cfg.labels) or not p:
        raise ValueError("need one probability per label")
    if any(not (0.0 <= v <= 1.0) for v in p) or abs(sum(p) - 1.0) > _PROB_TOL:
        raise ValueError("probabilities must lie in [0, 1] and sum to 1")
    if cfg.drift is not None and len(cfg.drift) != len(p):
        raise ValueError("drift must have one entry per label")
    if not cfg.sample_period > 0:
        raise ValueError("sample_period must be positive")
    if not cfg.stay_duration_mean > cfg.stay_duration_jitter >= 0:
        raise ValueError("need stay_duration_mean > stay_duration_jitter >= 0")
    if cfg.glide_duration < 0 or cfg.f0_jitter_scale < 0:
        raise ValueError("glide_duration and f0_jitter_scale must be non-negative")
    if not 0 <= cfg.seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    seq, render = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(seq)), np.random.Generator(np.random.PCG64(render))


class _Normal:
    """Box-Muller standard normals drawn from a uniform stream, both variates used."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._spare: Optional[float] = None

    def __call__(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = 1.0 - self.rng.random()  # (0, 1]
        u2 = self.rng.random()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)


def _draw(cdf: np.ndarray, u: float) -> int:
    i = int(np.searchsorted(cdf, u, side="right"))
    return min(i, cdf.size - 1)


def generate_sequence(cfg: GeneratorConfig, n: int) -> list[str]:
    """n categorical draws; with drift, p is shifted, clipped at 0 and renormalized after every trial."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng, _ = _streams(cfg.seed)
    p = np.asarray(cfg.probabilities, dtype=float)
    drift = None
    if cfg.drift is not None and any(cfg.drift):
        drift = np.asarray(cfg.drift, dtype=float)
    cdf = np.cumsum(p)
    out = []
    for _ in range(n):
        out.append(cfg.labels[_draw(cdf, rng.random() * cdf[-1])])
        if drift is not None:
            p = np.clip(p + drift, 0.0, None)
            total = p.sum()
            if total <= 0:
                raise ValueError("drift drove every probability to zero")
            p = p / total
            cdf = np.cumsum(p)
    return out


@dataclass(frozen=True)
class RenderedStay:
    name: str
    octave: int
    start: float
    end: float


@dataclass(frozen=True)
class Rendering:
    track: PitchTrack
    stays: list[RenderedStay] = field(default_factory=list)


def _key(symbol: Symbol, default_octave: int) -> tuple[str, int]:
    if isinstance(symbol, str):
        return symbol, default_octave
    name, octave = symbol
    return name, int(octave)


def render(sequence: Sequence[Symbol], db: NoteDatabase, cfg: GeneratorConfig) -> Rendering:
    """Render symbols as jittered stays joined by linear-in-Hz glides.

    A repeated note is separated from its predecessor by an unvoiced gap of
    ``glide_duration`` instead of a glide, so the two stays stay distinct.
    """
    specs = []
    for sym in sequence:
        name, octave = _key(sym, cfg.octave)
        try:
            specs.append(db.get(name, octave))
        except KeyError as exc:
            raise ValueError(f"unknown note label {sym!r}: {exc}") from None

    _, rng = _streams(cfg.seed)
    normal = _Normal(rng)
    period = cfg.sample_period
    n_gap = max(1, round(cfg.glide_duration / period)) if cfg.glide_duration > 0 else 0
    i = 0
    samples: list[PitchSample] = []
    stays: list[RenderedStay] = []

    def t_of(idx: int) -> float:
        return round(idx * period, 9)

    prev = None
    for spec in specs:
        if prev is not None and n_gap:
            if spec is prev:
                for _ in range(n_gap):
                    samples.append(PitchSample(t_of(i), None))
                    i += 1
            else:
                for s in range(1, n_gap + 1):
                    frac = s / (n_gap + 1)
                    f = prev.mean_hz + frac * (spec.mean_hz - prev.mean_hz)
                    samples.append(PitchSample(t_of(i), round(f, 6)))
                    i += 1
        dur = cfg.stay_duration_mean + cfg.stay_duration_jitter * (2.0 * rng.random() - 1.0)
        n_stay = max(2, round(dur / period) + 1)
        start = t_of(i)
        sd = cfg.f0_jitter_scale * spec.sd_hz
        for _ in range(n_stay):
            f = spec.mean_hz + sd * normal() if sd > 0 else spec.mean_hz
            samples.append(PitchSample(t_of(i), round(f, 6)))
            i += 1
        stays.append(RenderedStay(spec.name, spec.octave, start, t_of(i - 1)))
        prev = spec
    return Rendering(PitchTrack(tuple(samples)), stays)


def render_track(sequence: Sequence[Symbol], db: NoteDatabase, cfg: GeneratorConfig) -> PitchTrack:
    return render(sequence, db, cfg).track


def sidecar(cfg: GeneratorConfig, sequence: Sequence[Symbol], rendering: Rendering) -> dict:
    """Ground truth accompanying a synthetic track."""
    return {
        "generator": GENERATOR_ID,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "sequence": [list(_key(s, cfg.octave)) for s in sequence],
        "stays": [
            {"note": s.name, "octave": s.octave, "start_sec": s.start, "end_sec": s.end} for s in rendering.stays
        ],
    }
