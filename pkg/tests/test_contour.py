import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ragalab.contour import (
    ContourParams,
    ContourSegment,
    Kind,
    Magnitude,
    Shape,
    Skew,
    chord_area,
    classify_direction,
    classify_hat_valley,
    classify_shape,
    format_segments,
    ioi_report,
    segment_contour,
    summarize,
)
from ragalab.datasets import PILU_LABELS, PILU_LONG_STAY_ONSETS, PILU_OVERALL
from ragalab.notedetect import detect_events
from ragalab.pitchdata import PitchSample, PitchTrack
from ragalab.rastats import relative
from ragalab.synth import GeneratorConfig, generate_sequence, render_track

P = ContourParams()
PERIOD = 0.01


def hz(midi):
    return 440.0 * 2 ** ((midi - 69.0) / 12.0)


def _times(n):
    return [i * PERIOD for i in range(n)]


# direction

def test_rising_and_falling():
    assert classify_direction(_times(5), [60, 60.5, 61, 61.5, 62]) is Kind.RISING
    assert classify_direction(_times(5), [62, 61.5, 61, 60.5, 60]) is Kind.FALLING


def test_valley_and_hat():
    assert classify_direction(_times(7), [60, 59, 58, 57, 58, 59, 60]) is Kind.VALLEY
    assert classify_direction(_times(5), [60, 61, 62, 61, 60.1]) is Kind.HAT


def test_mixed_when_return_tolerance_violated():
    # up 2, down 2, up 2: ends 2 semitones above the start
    assert classify_direction(_times(7), [60, 61, 62, 61, 60, 61, 62]) is Kind.MIXED
    # rise with a large dip on the way
    assert classify_direction(_times(5), [60, 62, 61, 63, 64]) is Kind.MIXED


def test_small_wiggle_is_not_a_reversal():
    assert classify_direction(_times(5), [60, 61, 60.8, 62, 63]) is Kind.RISING


# shape

def test_shape_linear_convex_concave():
    t = np.linspace(0, 1, 21)
    assert classify_shape(t, 60 + 2 * t) is Shape.LINEAR
    assert chord_area(t, 60 + 2 * t) == pytest.approx(0, abs=1e-12)
    assert classify_shape(t, 60 + 2 * t**2) is Shape.CONVEX
    assert classify_shape(t, 60 + 2 * np.sqrt(t)) is Shape.CONCAVE


def test_convex_area_analytic():
    t = np.linspace(0, 1, 2001)
    # area of t^2 below its chord is -1/6; normalized by duration 1 and net change 2 per unit
    assert chord_area(t, 2 * t**2) == pytest.approx(-1 / 6, abs=1e-6)


def test_shape_zero_net_change_rejected():
    with pytest.raises(ValueError):
        chord_area([0, 1, 2], [60, 61, 60])


def test_reflection_about_chord_flips_shape():
    t = np.linspace(0, 1, 15)
    for curve in (60 + 3 * t**2, 60 + 3 * np.sqrt(t), 63 - 3 * t**3):
        chord = curve[0] + (curve[-1] - curve[0]) * t
        mirrored = 2 * chord - curve
        a, b = classify_shape(t, curve), classify_shape(t, mirrored)
        assert {a, b} == {Shape.CONVEX, Shape.CONCAVE}


# hats and valleys

def test_symmetric_low_hat():
    t = _times(11)
    p = [60 + 0.5 * (1 - abs(i - 5) / 5) for i in range(11)]
    skew, mag, extent = classify_hat_valley(t, p, Kind.HAT)
    assert (skew, mag) == (Skew.SYMMETRIC, Magnitude.LOW)
    assert extent == pytest.approx(0.5)


def test_early_high_hat():
    t = [i / 10 for i in range(11)]
    p = [60 + 4 * (i / 2 if i <= 2 else (10 - i) / 8) for i in range(11)]
    assert classify_hat_valley(t, p, Kind.HAT)[:2] == (Skew.POSITIVE, Magnitude.HIGH)


def test_skew_boundary_is_exclusive():
    t = [i / 10 for i in range(11)]
    p = [60.0] * 11
    p[6] = 62.0  # r = 0.5 + skew_tolerance exactly
    assert classify_hat_valley(t, p, Kind.HAT)[0] is Skew.NEGATIVE
    p = [60.0] * 11
    p[4] = 62.0
    assert classify_hat_valley(t, p, Kind.HAT)[0] is Skew.POSITIVE


def test_valley_magnitude_names():
    t = _times(9)
    p = [60, 59, 58, 57, 56, 57, 58, 59, 60]
    skew, mag, extent = classify_hat_valley(t, p, Kind.VALLEY)
    assert (skew, mag, extent) == (Skew.SYMMETRIC, Magnitude.HIGH, 4.0)
    seg = ContourSegment(Kind.VALLEY, 0, 0.08, skew=skew, magnitude=mag, extent_semitones=extent)
    assert seg.magnitude_label == "Deep"


# independent per-span oracle

def _oracle_span(times, p, params):
    n = len(p)
    start, end = p[0], p[-1]
    thr = params.reversal_threshold
    returns = abs(end - start) < params.return_tolerance
    if returns and max(p) - max(start, end) >= thr:
        kind = Kind.HAT
    elif returns and min(start, end) - min(p) >= thr:
        kind = Kind.VALLEY
    else:
        drop = max(p[i] - p[j] for i in range(n) for j in range(i, n))
        rise = max(p[j] - p[i] for i in range(n) for j in range(i, n))
        net = end - start
        if net >= thr and drop < thr:
            kind = Kind.RISING
        elif net <= -thr and rise < thr:
            kind = Kind.FALLING
        else:
            kind = Kind.MIXED
    shape = skew = mag = None
    if kind in (Kind.RISING, Kind.FALLING):
        dur, net = times[-1] - times[0], end - start
        area = 0.0
        for i in range(n - 1):
            d0 = p[i] - (start + net * (times[i] - times[0]) / dur)
            d1 = p[i + 1] - (start + net * (times[i + 1] - times[0]) / dur)
            area += 0.5 * (d0 + d1) * (times[i + 1] - times[i])
        area /= dur * abs(net)
        tol = params.linear_tolerance
        shape = Shape.CONVEX if area < -tol else Shape.CONCAVE if area > tol else Shape.LINEAR
    elif kind in (Kind.HAT, Kind.VALLEY):
        ext = max(p) if kind is Kind.HAT else min(p)
        i = p.index(ext)
        r = (times[i] - times[0]) / (times[-1] - times[0])
        lo, hi = 0.5 - params.skew_tolerance, 0.5 + params.skew_tolerance
        skew = Skew.POSITIVE if r <= lo + 1e-12 else Skew.NEGATIVE if r >= hi - 1e-12 else Skew.SYMMETRIC
        height = abs(ext - (start + end) / 2)
        mag = Magnitude.LOW if height < params.mag_lo else Magnitude.HIGH if height > params.mag_hi else Magnitude.MODERATE
    return kind, shape, skew, mag


def _oracle(track, db, min_dwell, params):
    stays = detect_events(track, db, min_dwell)
    out = [(Kind.STAY, e.onset, e.offset, None, None, None) for e in stays]

    def in_stay(t):
        return any(e.onset <= t <= e.offset for e in stays)

    runs, cur = [], []
    for s in track.samples:
        if s.f0 is None or in_stay(s.t):
            if cur:
                runs.append(cur)
            cur = []
        else:
            cur.append(s)
    if cur:
        runs.append(cur)
    for run in runs:
        if len(run) < 2:
            continue
        times = [s.t for s in run]
        p = [69 + 12 * math.log2(s.f0 / 440) for s in run]
        out.append((*_oracle_span(times, p, params)[:1], times[0], times[-1], *_oracle_span(times, p, params)[1:]))
    return sorted(out, key=lambda r: r[1])


def _pipeline(track, db, min_dwell, params):
    def opt(v, na):
        return None if v is na else v

    return [
        (s.kind, s.t0, s.t1, opt(s.shape, Shape.NA), opt(s.skew, Skew.NA), opt(s.magnitude, Magnitude.NA))
        for s in segment_contour(track, db, min_dwell, params)
    ]


def _random_span(rng, start_midi, n):
    x = np.linspace(0, 1, n)
    kind = rng.integers(0, 5)
    amp = rng.uniform(0.6, 5.0) * rng.choice([-1, 1])
    if kind == 0:  # power-law ramp
        shape = x ** rng.choice([0.4, 1.0, 2.5])
        return start_midi + amp * shape
    if kind == 1:  # hat or valley with random peak position
        c = rng.uniform(0.15, 0.85)
        tri = np.where(x <= c, x / c, (1 - x) / (1 - c))
        return start_midi + amp * tri + rng.uniform(-0.3, 0.3) * x
    if kind == 2:  # zigzag
        return start_midi + amp * np.sin(2.5 * np.pi * x)
    if kind == 3:  # ramp with noise
        return start_midi + amp * x + rng.normal(0, 0.3, n)
    return start_midi + rng.normal(0, 0.2, n)  # nearly flat


def seeded_contour_track(seed, db):
    """Stays on random notes separated by random analytic spans, some behind unvoiced gaps."""
    rng = np.random.default_rng(seed)
    notes = [s for s in db if s.octave == 0]
    samples, i = [], 0

    def emit(f0):
        nonlocal i
        samples.append(PitchSample(round(i * PERIOD, 9), f0))
        i += 1

    for _ in range(int(rng.integers(3, 9))):
        spec = notes[int(rng.integers(len(notes)))]
        for _ in range(int(rng.integers(12, 40))):
            emit(spec.mean_hz + rng.normal(0, spec.sd_hz))
        if rng.random() < 0.5:
            emit(None)
        start = 69 + 12 * math.log2(spec.mean_hz / 440) + rng.uniform(-0.4, 0.4)
        for m in _random_span(rng, start, int(rng.integers(2, 10))):
            emit(hz(m))
        if rng.random() < 0.5:
            emit(None)
    return PitchTrack(tuple(samples))


@pytest.mark.parametrize("seed", range(40))
def test_segment_contour_matches_oracle(seed, db):
    track = seeded_contour_track(seed, db)
    params = ContourParams()
    assert _pipeline(track, db, 0.1, params) == _oracle(track, db, 0.1, params)


def test_oracle_covers_every_kind(db):
    kinds = set()
    for seed in range(40):
        kinds |= {row[0] for row in _oracle(seeded_contour_track(seed, db), db, 0.1, P)}
    assert kinds == set(Kind)


def test_synthetic_render_summary_matches_oracle(db):
    cfg = GeneratorConfig(PILU_LABELS, tuple(relative(PILU_OVERALL)), seed=11)
    track = render_track(generate_sequence(cfg, 80), db, cfg)
    segs = segment_contour(track, db, 0.1, P)
    assert _pipeline(track, db, 0.1, P) == _oracle(track, db, 0.1, P)
    summary = summarize(segs).to_dict()
    assert summary["no_transition"] == sum(1 for s in segs if s.kind is Kind.STAY) == 80


# analytic fixtures through the whole pipeline

def _build(parts):
    """parts: ('stay', midi, n) or ('span', [midi...]) or ('gap',)."""
    samples, i = [], 0
    for part in parts:
        if part[0] == "stay":
            vals = [hz(part[1])] * part[2]
        elif part[0] == "span":
            vals = [hz(m) for m in part[1]]
        else:
            vals = [None]
        for v in vals:
            samples.append(PitchSample(round(i * PERIOD, 9), v))
            i += 1
    return PitchTrack(tuple(samples))


SA = 69 + 12 * math.log2(243.2661 / 440)
GA = 69 + 12 * math.log2(287.6051 / 440)


def test_analytic_fixture_two_rises_one_fall_one_hat(db):
    x = np.linspace(0, 1, 8)
    lo, hi = SA + 0.3, GA - 0.3
    track = _build(
        [
            ("stay", SA, 20), ("gap",), ("span", list(lo + (hi - lo) * x)), ("gap",),
            ("stay", GA, 20), ("gap",), ("span", list(hi - (hi - lo) * x)), ("gap",),
            ("stay", SA, 20), ("gap",), ("span", list(lo + (hi - lo) * x**2)), ("gap",),
            ("stay", GA, 20), ("gap",), ("span", list(hi + 2 * (1 - abs(2 * x - 1)))), ("gap",),
            ("stay", GA, 20),
        ]
    )
    segs = segment_contour(track, db, 0.1, P)
    kinds = [s.kind for s in segs if s.kind is not Kind.STAY]
    assert kinds == [Kind.RISING, Kind.FALLING, Kind.RISING, Kind.HAT]
    assert [s.shape for s in segs if s.kind is Kind.RISING] == [Shape.LINEAR, Shape.CONVEX]
    summary = summarize(segs).to_dict()
    assert summary["rising"] == {"total": 2, "convex": 1, "concave": 0, "linear": 1}
    assert summary["hats"]["total"] == 1 and summary["no_transition"] == 5


def test_ramp_between_stays_is_one_rising_segment(db):
    track = _build([("stay", SA, 20), ("span", list(np.linspace(SA + 0.3, GA - 0.3, 6))), ("stay", GA, 20)])
    segs = segment_contour(track, db, 0.1, P)
    assert [s.kind for s in segs] == [Kind.STAY, Kind.RISING, Kind.STAY]


def test_up_and_back_is_a_hat(db):
    up = list(np.linspace(SA + 0.3, GA - 0.3, 5))
    track = _build([("stay", SA, 20), ("span", up + up[-2::-1]), ("stay", SA, 20)])
    assert [s.kind for s in segment_contour(track, db, 0.1, P)] == [Kind.STAY, Kind.HAT, Kind.STAY]


def test_all_stay_and_empty_tracks(db):
    track = _build([("stay", SA, 20), ("gap",), ("stay", GA, 20)])
    assert {s.kind for s in segment_contour(track, db, 0.1, P)} == {Kind.STAY}
    empty = PitchTrack(())
    assert segment_contour(empty, db, 0.1, P) == []
    assert format_segments([]) == "kind,t0,t1,shape,skew,magnitude,extent_semitones\n"


def test_segments_do_not_overlap(db):
    for seed in range(10):
        segs = segment_contour(seeded_contour_track(seed, db), db, 0.1, P)
        for a, b in zip(segs, segs[1:]):
            assert a.t1 < b.t0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=12),
    st.floats(-100, 100, allow_nan=False),
    st.floats(-24, 24, allow_nan=False),
)
def test_direction_invariant_to_shift_and_transposition(offsets, dt, dp):
    p = np.cumsum(offsets) + 60
    t = np.arange(len(p)) * 0.01
    base = classify_direction(t, p)
    shifted = classify_direction(t + dt, p + dp)
    # only compare when no quantity sits within rounding distance of a threshold
    d = np.subtract.outer(p, p)
    margins = np.abs(np.concatenate([d.ravel() - 0.5, d.ravel() + 0.5]))
    if margins.min() > 1e-9:
        assert shifted is base


def test_summary_subcategories_sum_to_kind_counts(db):
    for seed in range(20):
        s = summarize(segment_contour(seeded_contour_track(seed, db), db, 0.1, P)).to_dict()
        for k in ("rising", "falling"):
            assert s[k]["convex"] + s[k]["concave"] + s[k]["linear"] == s[k]["total"]
        for k in ("hats", "valleys"):
            assert sum(s[k]["skew"].values()) == s[k]["total"] == sum(s[k]["magnitude"].values())


def test_summarize_empty_and_small():
    d = summarize([]).to_dict()
    assert d["no_transition"] == 0 and d["rising"]["total"] == 0
    segs = [
        ContourSegment(Kind.RISING, 0, 1, shape=Shape.CONVEX),
        ContourSegment(Kind.RISING, 2, 3, shape=Shape.LINEAR),
        ContourSegment(Kind.RISING, 4, 5, shape=Shape.LINEAR),
    ]
    assert summarize(segs).to_dict()["rising"] == {"total": 3, "convex": 1, "concave": 0, "linear": 2}


def test_params_from_dict():
    p = ContourParams.from_dict({"mag_hi": 4.0})
    assert p.mag_hi == 4.0 and p.mag_lo == 1.0
    with pytest.raises(ValueError):
        ContourParams.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        ContourParams(reversal_threshold=-1)


# IOI

def test_ioi_examples():
    r = ioi_report([1, 2, 3, 4])
    assert r.intervals == (1, 1, 1) and r.cv == 0 and r.rhythmic
    r = ioi_report([0, 1, 5])
    assert r.intervals == (1, 4) and r.cv > 0.5 and not r.rhythmic
    assert ioi_report(PILU_LONG_STAY_ONSETS).mean == pytest.approx(3.674, abs=0.01)
    with pytest.raises(ValueError):
        ioi_report([1.0])
