"""``ragalab`` command line.

Exit codes: 0 success, 1 input error, 2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .contour import ContourParams, format_segments, segment_contour, summarize
from .datasets import PILU_LABELS, PILU_OVERALL
from .notedetect import (
    DEFAULT_K,
    DEFAULT_MIN_DWELL,
    DEFAULT_MIN_LONG,
    DatabaseValidationError,
    NoteDatabase,
    NoteDatabaseError,
    NoteEvent,
    default_notedb,
    detect,
    format_events,
    parse_events,
    read_notedb,
)
from .pitchdata import TrackParseError, parse_track, write_track
from .rastats import (
    FrequencyTable,
    NumericalError,
    PoolingError,
    compare_tables,
    count_notes,
    default_segments,
    parse_segments,
    relative,
    scale_labels,
)
from .report import (
    SCHEMA_VERSION,
    StatsParams,
    canonical_json,
    contour_section,
    detection_section,
    metadata,
    metrics_section,
    stats_section,
)
from .synth import GeneratorConfig, generate_sequence, render, sidecar

NOTEDB_ENV = "RAGALAB_NOTEDB"
EXIT_OK, EXIT_INPUT, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3
PLOT_KINDS = ("onsets", "ioi", "pitch_profile", "note_frequencies", "cumulative", "compare_bars")


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT, stage: Optional[str] = None):
        super().__init__(message)
        self.code = code
        self.stage = stage


class _Stage:
    """Translate library exceptions raised inside a pipeline stage into CLIError."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, CLIError):
            return False
        if isinstance(exc, (DatabaseValidationError, PoolingError)):
            raise CLIError(str(exc), EXIT_VALIDATION, self.name) from exc
        if isinstance(exc, (NumericalError, ArithmeticError)):
            raise CLIError(str(exc), EXIT_NUMERIC, self.name) from exc
        if isinstance(exc, (OSError, ValueError, KeyError, UnicodeDecodeError)):
            raise CLIError(str(exc), EXIT_INPUT, self.name) from exc
        return False


def _read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _warn(msg: str) -> None:
    print(f"ragalab: warning: {msg}", file=sys.stderr)


def _load_db(path: Optional[str], k: float) -> tuple[NoteDatabase, str]:
    path = path or os.environ.get(NOTEDB_ENV) or None
    if path is None:
        return default_notedb(k), "builtin:notedb_harmonium"
    return read_notedb(path, k), str(path)


def _contour_params(args, base: Optional[dict] = None) -> ContourParams:
    d = dict(base or {})
    for name in ContourParams.__dataclass_fields__:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    return ContourParams.from_dict(d)


def _pools(values: Optional[Sequence[str]]) -> list[str]:
    return list(values) if values else ["auto"]


# detect

def cmd_detect(args) -> int:
    with _Stage("load"):
        track = parse_track(_read_text(args.track))
    with _Stage("detect"):
        db, _ = _load_db(args.notedb, args.k)
        det = detect(track, db, args.min_dwell)
    if track.n_voiced == 0:
        _warn("track has no voiced samples; no events detected")
    print(json.dumps({"diagnostics": det.diagnostics()}, sort_keys=True), file=sys.stderr)
    _emit(format_events(det.events), args.out)
    return EXIT_OK


# stats

def _stats_params(args, events: Sequence[NoteEvent], end: float) -> StatsParams:
    segments = parse_segments(args.segments) if args.segments else default_segments(end)
    for s in segments:
        if s.start >= end:
            raise ValueError(f"segment {s} lies outside the recording (ends at {end:g} s)")
    labels = tuple(x.strip() for x in args.labels.split(",")) if getattr(args, "labels", None) else None
    return StatsParams(
        segments=segments,
        pools=_pools(args.pool),
        window=args.window,
        labels=labels,
        eligibility_floor=args.eligibility_floor,
        tie_policy=args.tie_policy,
    )


def cmd_stats(args) -> int:
    with _Stage("load"):
        events = parse_events(_read_text(args.events))
        if not events:
            raise ValueError("events file contains no events")
    with _Stage("stats"):
        end = max(e.offset for e in events)
        params = _stats_params(args, events, end)
        stats = stats_section(events, params)
    report = {
        "schema_version": SCHEMA_VERSION,
        "metadata": metadata("stats", {"events": str(args.events)}, {"stats": params.to_dict()}),
        "stats": stats,
    }
    _emit(canonical_json(report), args.out)
    return EXIT_OK


# contour

def cmd_contour(args) -> int:
    with _Stage("load"):
        track = parse_track(_read_text(args.track))
    with _Stage("contour"):
        db, _ = _load_db(args.notedb, args.k)
        params = _contour_params(args)
        segments = segment_contour(track, db, args.min_dwell, params)
    _emit(canonical_json({"summary": summarize(segments).to_dict(), "parameters": params.to_dict()}), args.out)
    if args.csv:
        Path(args.csv).write_text(format_segments(segments), encoding="utf-8", newline="\n")
    return EXIT_OK


# synth

def cmd_synth(args) -> int:
    with _Stage("synth"):
        if args.labels:
            labels = tuple(x.strip() for x in args.labels.split(","))
            probs = tuple(float(x) for x in args.probs.split(","))
        else:
            labels = PILU_LABELS
            probs = tuple(relative(PILU_OVERALL).tolist())
        drift = tuple(float(x) for x in args.drift.split(",")) if args.drift else None
        cfg = GeneratorConfig(
            labels=labels,
            probabilities=probs,
            drift=drift,
            stay_duration_mean=args.stay,
            stay_duration_jitter=args.stay_jitter,
            glide_duration=args.glide,
            f0_jitter_scale=args.jitter_scale,
            sample_period=args.period,
            seed=args.seed,
        )
        db, _ = _load_db(args.notedb, args.k)
        seq = generate_sequence(cfg, args.n)
        rendering = render(seq, db, cfg)
    write_track(rendering.track, args.out)
    truth = args.truth or str(Path(args.out).with_suffix(".truth.json"))
    Path(truth).write_text(canonical_json(sidecar(cfg, seq, rendering)), encoding="utf-8", newline="\n")
    return EXIT_OK


# compare

def _read_table(path: str) -> FrequencyTable:
    text = _read_text(path)
    header = text.lstrip("\ufeff").splitlines()[0] if text.strip() else ""
    if [h.strip() for h in header.split(",")] == ["note", "count"]:
        rows = list(csv.reader(io.StringIO(text.lstrip("\ufeff"))))[1:]
        rows = [r for r in rows if r and any(c.strip() for c in r)]
        try:
            return FrequencyTable(tuple(r[0].strip() for r in rows), tuple(int(r[1]) for r in rows))
        except (IndexError, ValueError):
            raise ValueError(f"{path}: malformed frequency table") from None
    return count_notes(parse_events(text))


def _align(t: FrequencyTable, labels: Sequence[str]) -> FrequencyTable:
    d = t.as_dict()
    return FrequencyTable(tuple(labels), tuple(d.get(x, 0) for x in labels))


def cmd_compare(args) -> int:
    with _Stage("load"):
        a, b = _read_table(args.a), _read_table(args.b)
    with _Stage("compare"):
        labels = scale_labels(list(a.labels) + list(b.labels))
        cmp = compare_tables(_align(a, labels), _align(b, labels))
    report = {
        "schema_version": SCHEMA_VERSION,
        "metadata": metadata("compare", {"a": str(args.a), "b": str(args.b)}, {}),
        "comparison": {
            "labels": list(cmp.labels),
            "counts_a": list(cmp.counts_a),
            "counts_b": list(cmp.counts_b),
            "rel_a": list(cmp.rel_a),
            "rel_b": list(cmp.rel_b),
            "deltas": list(cmp.deltas),
            "tvd": cmp.tvd,
        },
        "bars": [[lab, ca, cb] for lab, ca, cb in zip(cmp.labels, cmp.counts_a, cmp.counts_b)],
    }
    _emit(canonical_json(report), args.out)
    return EXIT_OK


# analyze

def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with _Stage("load"):
        cfg = json.loads(_read_text(path))
        if not isinstance(cfg, dict):
            raise ValueError("config must be a JSON object")
        return cfg


def _pick(args, cfg: dict, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


def cmd_analyze(args) -> int:
    """Run every stage; a failing stage after detection is reported and the rest still run."""
    cfg = _load_config(args.config)
    k = float(_pick(args, cfg, "k", DEFAULT_K))
    min_dwell = float(_pick(args, cfg, "min_dwell", DEFAULT_MIN_DWELL))
    min_long = float(_pick(args, cfg, "min_long", DEFAULT_MIN_LONG))
    with _Stage("load"):
        track = parse_track(_read_text(args.track))
    with _Stage("detect"):
        db, db_name = _load_db(args.notedb or cfg.get("notedb"), k)
        det = detect(track, db, min_dwell)
    with _Stage("contour"):
        cparams = _contour_params(args, cfg.get("contour"))
    with _Stage("stats"):
        seg_text = _pick(args, cfg, "segments", None)
        pool = args.pool if args.pool else cfg.get("pool")
        if isinstance(pool, str):
            pool = [pool]
        params = StatsParams(
            segments=parse_segments(seg_text) if seg_text else default_segments(track.duration or 1.0),
            pools=_pools(pool),
            window=float(_pick(args, cfg, "window", 10.0)),
            eligibility_floor=_pick(args, cfg, "eligibility_floor", None),
            tie_policy=_pick(args, cfg, "tie_policy", "AssignL"),
        )

    errors: list[CLIError] = []

    def run(stage, fn):
        try:
            with _Stage(stage):
                return fn()
        except CLIError as exc:
            errors.append(exc)
            return None

    def stats():
        for s in params.segments:
            if s.start >= track.duration:
                raise ValueError(f"segment {s} lies outside the track (ends at {track.duration:g} s)")
        return stats_section(det.events, params)

    contour = run("contour", lambda: contour_section(track, db, min_dwell, cparams))
    stats_out = run("stats", stats) if det.events else None
    metrics = run("metrics", lambda: metrics_section(track, det.events, min_long, cparams.cv_threshold))
    report = {
        "schema_version": SCHEMA_VERSION,
        "metadata": metadata(
            "analyze",
            {"track": str(args.track), "notedb": db_name, "config": None if not args.config else str(args.config)},
            {
                "k": k,
                "min_dwell": min_dwell,
                "min_long": min_long,
                "stats": params.to_dict(),
                "contour": cparams.to_dict(),
            },
        ),
        "detection": detection_section(det),
        "stats": stats_out,
        "contour": contour,
        "metrics": metrics,
        "errors": [{"stage": e.stage, "message": str(e), "exit_code": e.code} for e in errors],
    }
    _emit(canonical_json(report), args.out)
    for e in errors:
        print(f"ragalab: error [{e.stage}]: {e}", file=sys.stderr)
    return max((e.code for e in errors), default=EXIT_OK)


# plotdata

def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _section(report: dict, *path):
    node = report
    for key in path:
        if not isinstance(node, dict) or node.get(key) is None:
            raise CLIError(f"report has no {'.'.join(path)} section", EXIT_INPUT, "plotdata")
        node = node[key]
    return node


def plot_rows(report: dict, which: str, note: Optional[str] = None) -> tuple[list[str], list[list]]:
    if which == "onsets":
        events = _section(report, "detection", "events")
        return ["index", "onset_sec"], [[i, e["onset_sec"]] for i, e in enumerate(events, start=1)]
    if which == "ioi":
        intervals = _section(report, "metrics", "ioi", "intervals")
        return ["index", "ioi_sec"], [[i, v] for i, v in enumerate(intervals, start=1)]
    if which == "pitch_profile":
        series = _section(report, "metrics", "pitch_profile", "series")
        return ["time_sec", "midi"], [list(p) for p in series]
    if which in ("note_frequencies", "cumulative"):
        windowed = _section(report, "stats", "windowed")
        labels = [note] if note else list(windowed)
        if not labels:
            raise CLIError("report has no windowed counts", EXIT_INPUT, "plotdata")
        for lab in labels:
            if lab not in windowed:
                raise CLIError(f"no windowed counts for {lab!r}", EXIT_INPUT, "plotdata")
        key = "counts" if which == "note_frequencies" else "cumulative"
        edges = windowed[labels[0]]["edges"]
        rows = [[edge] + [windowed[lab][key][i] for lab in labels] for i, edge in enumerate(edges)]
        return ["window_end"] + labels, rows
    if which == "compare_bars":
        bars = _section(report, "bars")
        return ["note", "count_a", "count_b"], [list(b) for b in bars]
    raise CLIError(f"unknown plot {which!r}", EXIT_INPUT, "plotdata")


def cmd_plotdata(args) -> int:
    with _Stage("load"):
        report = json.loads(_read_text(args.report))
    header, rows = plot_rows(report, args.which, args.note)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    _emit(out.getvalue(), args.out)
    return EXIT_OK


def _add_db_flags(p):
    p.add_argument("--notedb", help=f"note database CSV (default: ${NOTEDB_ENV} or the bundled table)")
    p.add_argument("--k", type=float, default=DEFAULT_K, help="band half-width in standard deviations")
    p.add_argument("--min-dwell", dest="min_dwell", type=float, default=DEFAULT_MIN_DWELL, help="seconds")


def _add_contour_flags(p):
    for name in ContourParams.__dataclass_fields__:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)


def _add_stats_flags(p, defaults=True):
    p.add_argument("--segments", help="start:end[,start:end...] in seconds")
    p.add_argument(
        "--pool", action="append",
        help="'auto' or a 1-based block list like '1;2;3;4-7'; repeat once per segment or give once for all",
    )
    p.add_argument("--window", type=float, default=10.0 if defaults else None)
    p.add_argument("--eligibility-floor", dest="eligibility_floor", type=float)
    p.add_argument("--tie-policy", dest="tie_policy", choices=["AssignL", "AssignM", "Drop"],
                   default="AssignL" if defaults else None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ragalab", description="Raga pitch-track analysis")
    ap.add_argument("--version", action="version", version=f"ragalab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="pitch track -> note events CSV")
    p.add_argument("--track", required=True)
    _add_db_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("stats", help="note events -> statistics JSON")
    p.add_argument("--events", required=True)
    _add_stats_flags(p)
    p.add_argument("--labels", help="comma-separated note names in scale order")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("contour", help="pitch track -> contour summary JSON and segments CSV")
    p.add_argument("--track", required=True)
    _add_db_flags(p)
    _add_contour_flags(p)
    p.add_argument("--out")
    p.add_argument("--csv", help="write the segment list here")
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("synth", help="seeded synthetic performance -> pitch track CSV + truth JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=115, help="number of notes")
    p.add_argument("--labels", help="comma-separated note names (default: the Pilu note set)")
    p.add_argument("--probs", help="comma-separated probabilities matching --labels")
    p.add_argument("--drift", help="per-trial additive probability drift, comma-separated")
    p.add_argument("--stay", type=float, default=0.4)
    p.add_argument("--stay-jitter", dest="stay_jitter", type=float, default=0.1)
    p.add_argument("--glide", type=float, default=0.05)
    p.add_argument("--jitter-scale", dest="jitter_scale", type=float, default=1.0)
    p.add_argument("--period", type=float, default=0.01)
    p.add_argument("--notedb")
    p.add_argument("--k", type=float, default=DEFAULT_K)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="sidecar JSON path (default: <out>.truth.json)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("compare", help="compare two note distributions")
    p.add_argument("--a", required=True, help="events CSV or 'note,count' table")
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("analyze", help="full pipeline: pitch track -> report JSON")
    p.add_argument("--track", required=True)
    p.add_argument("--notedb")
    p.add_argument("--config", help="JSON file with analysis parameters")
    p.add_argument("--k", type=float)
    p.add_argument("--min-dwell", dest="min_dwell", type=float)
    p.add_argument("--min-long", dest="min_long", type=float)
    _add_stats_flags(p, defaults=False)
    _add_contour_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plotdata", help="report JSON -> CSV series behind a figure")
    p.add_argument("--report", required=True)
    p.add_argument("--which", required=True, choices=PLOT_KINDS)
    p.add_argument("--note", help="restrict windowed series to one note")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plotdata)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        stage = f" [{exc.stage}]" if exc.stage else ""
        print(f"ragalab: error{stage}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
