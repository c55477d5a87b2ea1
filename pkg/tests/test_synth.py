import itertools
from collections import Counter

import numpy as np
import pytest
import scipy.stats

from ragalab.datasets import PILU_LABELS, PILU_OVERALL
from ragalab.notedetect import detect_events
from ragalab.pitchdata import format_track, parse_track
from ragalab.rastats import MultinomialModel, multinomial_pmf, relative
from ragalab.synth import GENERATOR_ID, GeneratorConfig, generate_sequence, render, render_track, sidecar

PILU_P = tuple(relative(PILU_OVERALL))


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(("Sa", "Pa"), (0.5, 0.6))
    with pytest.raises(ValueError):
        GeneratorConfig(("Sa", "Pa"), (0.5, 0.5), sample_period=0)
    with pytest.raises(ValueError):
        GeneratorConfig(("Sa", "Pa"), (0.5, 0.5), stay_duration_mean=0.1, stay_duration_jitter=0.2)
    with pytest.raises(ValueError):
        GeneratorConfig(("Sa", "Pa"), (0.5, 0.5), drift=(0.1,))
    with pytest.raises(ValueError):
        GeneratorConfig(("Sa", "Pa"), (0.5, 0.5), seed=-1)


def test_degenerate_probabilities():
    cfg = GeneratorConfig(("Sa", "Pa", "Ni"), (1.0, 0.0, 0.0), seed=9)
    assert generate_sequence(cfg, 50) == ["Sa"] * 50


def test_uniform_law_of_large_numbers():
    cfg = GeneratorConfig(PILU_LABELS, (1 / 7,) * 7, seed=42)
    counts = Counter(generate_sequence(cfg, 70_000))
    for label in PILU_LABELS:
        assert abs(counts[label] / 70_000 - 1 / 7) <= 0.01


def test_zero_drift_equals_pure_multinomial():
    a = GeneratorConfig(PILU_LABELS, PILU_P, seed=5)
    b = GeneratorConfig(PILU_LABELS, PILU_P, drift=(0.0,) * 7, seed=5)
    assert generate_sequence(a, 500) == generate_sequence(b, 500)


def test_drift_moves_probability_mass():
    cfg = GeneratorConfig(("Sa", "Pa"), (0.5, 0.5), drift=(0.01, -0.01), seed=2)
    seq = generate_sequence(cfg, 400)
    assert seq[200:].count("Sa") > seq[:200].count("Sa")
    assert seq[-100:] == ["Sa"] * 100


def test_determinism_and_seed_sensitivity(db):
    cfg = GeneratorConfig(PILU_LABELS, PILU_P, seed=123)
    s1, s2 = generate_sequence(cfg, 100), generate_sequence(cfg, 100)
    assert s1 == s2
    assert format_track(render_track(s1, db, cfg)) == format_track(render_track(s2, db, cfg))
    other = GeneratorConfig(PILU_LABELS, PILU_P, seed=124)
    assert generate_sequence(other, 100) != s1


def test_render_params_do_not_change_sequence():
    a = GeneratorConfig(PILU_LABELS, PILU_P, seed=8)
    b = GeneratorConfig(PILU_LABELS, PILU_P, seed=8, glide_duration=0.2, f0_jitter_scale=0.5)
    assert generate_sequence(a, 100) == generate_sequence(b, 100)


def test_noise_free_single_stay(db):
    cfg = GeneratorConfig(("Sa",), (1.0,), f0_jitter_scale=0.0, seed=1)
    track = render_track(["Sa"], db, cfg)
    assert {s.f0 for s in track.samples} == {243.2661}
    assert 31 <= len(track.samples) <= 51


def test_two_notes_give_one_rising_span(db):
    from ragalab.contour import Kind, segment_contour

    cfg = GeneratorConfig(("Sa", "Komal Ga"), (0.5, 0.5), seed=4)
    track = render_track(["Sa", "Komal Ga"], db, cfg)
    kinds = [s.kind for s in segment_contour(track, db)]
    assert kinds == [Kind.STAY, Kind.RISING, Kind.STAY]


def test_unknown_label(db):
    cfg = GeneratorConfig(("Sa",), (1.0,))
    with pytest.raises(ValueError):
        render_track(["Xa"], db, cfg)
    with pytest.raises(ValueError):
        render_track([("Sa", 2)], db, cfg)


def test_octave_symbols(db):
    cfg = GeneratorConfig(("Sa",), (1.0,), seed=3)
    events = detect_events(render_track([("Sa", -1), "Sa", ("Sa", 1)], db, cfg), db)
    assert [e.key for e in events] == [("Sa", -1), ("Sa", 0), ("Sa", 1)]


def test_round_trip_100_seeds(db):
    """200-symbol sequences with note-sd jitter are recovered exactly."""
    for seed in range(1, 101):
        cfg = GeneratorConfig(PILU_LABELS, PILU_P, seed=seed)
        seq = generate_sequence(cfg, 200)
        track = render_track(seq, db, cfg)
        assert [e.name for e in detect_events(track, db, 0.1)] == seq, f"seed {seed}"


def test_round_trip_through_csv(db):
    cfg = GeneratorConfig(PILU_LABELS, PILU_P, seed=21)
    seq = generate_sequence(cfg, 50)
    rendering = render(seq, db, cfg)
    track = parse_track(format_track(rendering.track))
    events = detect_events(track, db)
    assert [e.name for e in events] == seq
    for e, stay in zip(events, rendering.stays):
        assert stay.start <= e.onset < e.offset <= stay.end


def test_sidecar_contents(db):
    cfg = GeneratorConfig(("Sa", "Pa"), (0.5, 0.5), seed=77)
    seq = generate_sequence(cfg, 5)
    side = sidecar(cfg, seq, render(seq, db, cfg))
    assert side["generator"] == GENERATOR_ID
    assert side["seed"] == 77
    assert [s[0] for s in side["sequence"]] == seq
    assert len(side["stays"]) == 5
    assert side["config"]["probabilities"] == [0.5, 0.5]


def test_box_muller_jitter_is_gaussian(db):
    cfg = GeneratorConfig(("Pa",), (1.0,), stay_duration_mean=5.0, stay_duration_jitter=0.0, seed=6)
    track = render_track(["Pa"] * 20, db, cfg)
    spec = db.get("Pa")
    z = np.array([(s.f0 - spec.mean_hz) / spec.sd_hz for s in track.samples if s.f0 is not None])
    assert abs(z.mean()) < 0.05
    assert abs(z.std() - 1) < 0.05
    assert scipy.stats.kstest(z, "norm").pvalue > 0.001


def test_empirical_pmf_matches_multinomial():
    """10^5 replicates of n=5, k=3; chi-square GOF against the exact pmf at the 0.1% level."""
    p = (0.2, 0.3, 0.5)
    cfg = GeneratorConfig(("a", "b", "c"), p, seed=2024)
    draws = generate_sequence(cfg, 500_000)
    codes = np.array(["abc".index(d) for d in draws]).reshape(-1, 5)
    counts = np.stack([(codes == j).sum(axis=1) for j in range(3)], axis=1)
    observed = Counter(map(tuple, counts))
    comps = [x for x in itertools.product(range(6), repeat=3) if sum(x) == 5]
    model = MultinomialModel(5, p)
    exp = np.array([multinomial_pmf(model, x) for x in comps]) * len(counts)
    obs = np.array([observed[x] for x in comps])
    assert obs.sum() == 100_000
    assert scipy.stats.chisquare(obs, exp).pvalue > 0.001
