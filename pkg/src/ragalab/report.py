"""Analysis report assembly and canonical JSON serialization.

Reports are plain dicts. ``canonical_json`` fixes key order (sorted), rounds
every float to 6 significant digits, maps non-finite floats to null and uses
LF line endings, so reruns on identical inputs are byte-identical.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .contour import ContourParams, ioi_report, segment_contour, summarize
from .notedetect import Detection, NoteEvent, long_stays
from .pitchdata import PitchTrack, pitch_profile
from .rastats import (
    PoolingSpec,
    SegmentSpec,
    auto_pool,
    chi_square_gof,
    count_notes,
    expected_counts,
    multinomial_moments,
    MultinomialModel,
    parse_pooling,
    polyfit,
    relative,
    run_test,
    scale_labels,
    stability_report,
    windowed_counts,
)
from .rastats.runs import TiePolicy

SCHEMA_VERSION = 1
FIT_DEGREE = 4


def _clean(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(f"{x:.6g}")
        return 0.0 if x == 0 else x
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def events_section(events: Sequence[NoteEvent]) -> list[dict]:
    return [
        {"note": e.name, "octave": e.octave, "onset_sec": e.onset, "offset_sec": e.offset, "n_samples": e.n_samples}
        for e in events
    ]


@dataclass
class StatsParams:
    segments: list[SegmentSpec]
    pools: list[str] = field(default_factory=lambda: ["auto"])  # one per segment, or one for all
    window: float = 10.0
    labels: Optional[tuple[str, ...]] = None
    eligibility_floor: Optional[float] = None
    tie_policy: str = TiePolicy.ASSIGN_L.value
    min_expected: float = 5.0

    def pool_for(self, i: int) -> str:
        if len(self.pools) == 1:
            return self.pools[0]
        if len(self.pools) != len(self.segments):
            raise ValueError(f"{len(self.pools)} pooling specs for {len(self.segments)} segments")
        return self.pools[i]

    def to_dict(self) -> dict:
        return {
            "segments": [str(s) for s in self.segments],
            "segments_closed": [s.closed for s in self.segments],
            "pool": list(self.pools),
            "window_sec": self.window,
            "labels": None if self.labels is None else list(self.labels),
            "eligibility_floor": self.eligibility_floor,
            "tie_policy": self.tie_policy,
            "min_expected": self.min_expected,
        }


def _table_dict(table) -> dict:
    return {"labels": list(table.labels), "counts": list(table.counts), "total": table.total}


def _fit_dict(xs, ys) -> Optional[dict]:
    if len(set(xs)) < FIT_DEGREE + 1:
        return None
    fit = polyfit(xs, ys, FIT_DEGREE)
    return {"degree": fit.degree, "coefficients": list(fit.coefficients), "r2": fit.r2, "ss_res": fit.ss_res}


def stats_section(events: Sequence[NoteEvent], params: StatsParams) -> dict:
    """Counting, chi-square per segment, runs test, moments, stability, windowed counts and fits."""
    labels = params.labels or scale_labels(e.name for e in events)
    overall = count_notes(events, None, labels)
    if overall.total == 0:
        raise ValueError("no note events to analyze")
    rel = relative(overall)

    seg_tables, seg_out = [], []
    for i, seg in enumerate(params.segments):
        table = count_notes(events, seg, labels)
        seg_tables.append(table)
        exp = expected_counts(rel, table.total)
        mode = params.pool_for(i)
        if mode == "auto":
            pooling = auto_pool(exp, params.min_expected)
        else:
            pooling = parse_pooling(mode, len(labels))
        chi = chi_square_gof(table, exp, pooling)
        seg_out.append(
            {
                "segment": str(seg),
                "table": _table_dict(table),
                "relative": relative(table).tolist() if table.total else None,
                "expected": exp.tolist(),
                "pooling": {
                    "mode": "auto" if mode == "auto" else "explicit",
                    "spec": str(pooling),
                    "blocks": pooling.labels(labels),
                },
                "chi_square": {
                    "statistic": chi.statistic,
                    "df": chi.df,
                    "p_value": chi.p_value,
                    "significant_5pct": chi.significant(0.05),
                    "observed_pooled": list(chi.observed),
                    "expected_pooled": list(chi.expected),
                },
            }
        )

    codes = [labels.index(e.name) + 1 for e in events]
    rt = run_test(codes, params.tie_policy) if len(codes) >= 2 else None

    model = MultinomialModel.from_counts(overall.counts)
    mom = multinomial_moments(model)

    stab = stability_report(overall, seg_tables, params.eligibility_floor) if len(seg_tables) >= 2 else None
    candidates = [c for c in (stab.vadi_candidate, stab.samvadi_candidate) if c] if stab else []

    pair = None
    if len(candidates) == 2:
        i, j = (labels.index(c) for c in candidates)
        pair = {
            "vadi": candidates[0],
            "samvadi": candidates[1],
            "var_vadi": mom.var[i],
            "var_samvadi": mom.var[j],
            "cov": mom.cov[i, j],
            "corr": mom.corr[i, j],
        }

    span_end = max(s.end for s in params.segments)
    span = SegmentSpec(0.0, span_end, closed=False)
    windowed = {}
    for label in candidates:
        wc = windowed_counts(events, label, params.window, span)
        idx = list(range(1, len(wc.counts) + 1))
        windowed[label] = {
            "edges": list(wc.edges),
            "counts": list(wc.counts),
            "cumulative": list(wc.cumulative),
            "fit_counts": _fit_dict(idx, wc.counts),
            "fit_cumulative": _fit_dict(list(wc.edges), wc.cumulative),
        }

    return {
        "labels": list(labels),
        "overall": {**_table_dict(overall), "relative": rel.tolist()},
        "segments": seg_out,
        "run_test": None
        if rt is None
        else {
            "n": rt.n,
            "U": rt.U,
            "E_U": rt.E_U,
            "Var_U": rt.Var_U,
            "Z": rt.Z,
            "median": rt.median,
            "significant_5pct": rt.significant,
            "tie_policy": TiePolicy(params.tie_policy).value,
        },
        "multinomial": {
            "n": model.n,
            "mean": mom.mean.tolist(),
            "var": mom.var.tolist(),
            "cov": mom.cov.tolist(),
            "corr": mom.corr.tolist(),
            "candidates": pair,
        },
        "stability": None
        if stab is None
        else {
            "eligibility_floor": stab.eligibility_floor,
            "notes": {
                n.label: {"overall_rel": n.overall_rel, "score": n.score, "eligible": n.eligible} for n in stab.notes
            },
            "ranking": list(stab.ranking),
            "vadi_candidate": stab.vadi_candidate,
            "samvadi_candidate": stab.samvadi_candidate,
        },
        "windowed": windowed,
    }


def detection_section(detection: Detection) -> dict:
    return {"events": events_section(detection.events), "diagnostics": detection.diagnostics()}


def contour_section(track: PitchTrack, db, min_dwell: float, params: ContourParams) -> dict:
    segments = segment_contour(track, db, min_dwell, params)
    return {
        "summary": summarize(segments).to_dict(),
        "segments": [
            {
                "kind": s.kind,
                "t0": s.t0,
                "t1": s.t1,
                "shape": s.shape,
                "skew": s.skew,
                "magnitude": s.magnitude_label,
                "extent_semitones": s.extent_semitones,
            }
            for s in segments
        ],
    }


def metrics_section(track: PitchTrack, events: Sequence[NoteEvent], min_long: float, cv_threshold: float) -> dict:
    out: dict = {"pitch_profile": None, "ioi": None, "long_stays": None}
    if track.n_voiced:
        prof = pitch_profile(track)
        out["pitch_profile"] = {
            "min_midi": prof.min_int,
            "max_midi": prof.max_int,
            "series": [[t, m] for t, m in zip(prof.times, prof.midi)],
        }
    if len(events) >= 2:
        ioi = ioi_report(events, cv_threshold)
        out["ioi"] = {"intervals": list(ioi.intervals), "mean": ioi.mean, "cv": ioi.cv, "rhythmic": ioi.rhythmic}
    ls = long_stays(events, min_long)
    out["long_stays"] = {
        "min_long_sec": min_long,
        "onsets": ls.onsets,
        "notes": [e.name for e in ls.events],
        "fit": None if ls.fit is None else {"slope": ls.fit.slope, "intercept": ls.fit.intercept, "r2": ls.fit.r2},
    }
    return out


def metadata(command: str, inputs: dict, parameters: dict) -> dict:
    return {
        "tool": "ragalab",
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "parameters": parameters,
    }
