"""Build src/ragalab/data/pilu_events.csv, an event list for the one-minute Pilu recording.

Only aggregate counts of that recording were published, so the event list is
reconstructed to agree with all of them at once:

* whole-minute counts, and the three segments 0-30, 20-50, 30-60 s (ends included)
* Komal Ga / Sudh Ni counts in 10 s windows
* the 15 long-stay onsets and their notes
* 57 runs about the median of the codes Sa=1 ... Sudh Ni=7

The windowed Komal Ga counts (2 + 0 + 10 over 20-50 s) and the middle-segment
count (13) only agree if one Komal Ga onset sits exactly at 50.0 s, inside the
closed segment [20, 50] and in the window [50, 60).

Run:  python scripts/build_pilu_fixture.py [--out PATH]
"""

import argparse
from collections import Counter
from pathlib import Path

import numpy as np

from ragalab.datasets import PILU_LABELS, PILU_LONG_STAY_NOTES, PILU_LONG_STAY_ONSETS, PILU_RUNS
from ragalab.notedetect import NoteEvent, format_events
from ragalab.rastats import count_runs, run_test

# per-note counts in windows [0,10) ... [50,60)
WINDOW_COUNTS = {
    "Sa": (4, 4, 8, 5, 4, 5),
    "Sudh Re": (5, 5, 5, 2, 1, 4),
    "Komal Ga": (4, 4, 2, 0, 10, 1),
    "Sudh Ma": (1, 0, 0, 3, 3, 1),
    "Pa": (0, 0, 3, 4, 3, 1),
    "Komal Dha": (0, 0, 1, 3, 2, 0),
    "Sudh Ni": (2, 2, 5, 4, 3, 1),
}
WINDOW = 10.0
N_WINDOWS = 6
BOUNDARY_GA = 50.0
MAX_LONG = 1.5
MAX_SHORT = 0.3
GAP = 0.05
MARGIN = 0.02
MIN_FREE = 0.3
PERIOD = 0.01


def fixed_events():
    fixed = [(t, name) for t, name in zip(PILU_LONG_STAY_ONSETS, PILU_LONG_STAY_NOTES)]
    fixed.append((BOUNDARY_GA, "Komal Ga"))
    fixed.sort()
    out = []
    for i, (t, name) in enumerate(fixed):
        nxt = fixed[i + 1][0] if i + 1 < len(fixed) else 60.0
        dur = 0.25 if t == BOUNDARY_GA else min(MAX_LONG, nxt - t - 0.05)
        out.append((t, name, round(dur, 2)))
    return out


def free_intervals(fixed, lo, hi):
    busy = sorted((t - GAP, t + d + GAP) for t, _, d in fixed)
    out, cur = [], lo
    for a, b in busy:
        if a > cur:
            out.append((cur, min(a, hi)))
        cur = max(cur, b)
        if cur >= hi:
            break
    if cur < hi:
        out.append((cur, hi))
    return [(a, b) for a, b in out if b - a >= MIN_FREE]


def short_slots(fixed, w, n):
    """n evenly spaced (onset, duration) slots in the free time of window w."""
    if n == 0:
        return []
    lo, hi = w * WINDOW + MARGIN, (w + 1) * WINDOW - MARGIN
    intervals = free_intervals(fixed, lo, hi)
    lengths = np.array([b - a for a, b in intervals])
    share = lengths / lengths.sum() * n
    alloc = np.floor(share).astype(int)
    for i in np.argsort(-(share - alloc), kind="stable")[: n - alloc.sum()]:
        alloc[i] += 1
    slots = []
    for (a, b), m in zip(intervals, alloc):
        if m == 0:
            continue
        spacing = (b - a) / m
        dur = round(min(MAX_SHORT, 0.7 * spacing), 2)
        slots += [(round(a + j * spacing, 2), dur) for j in range(m)]
    return slots


def build(max_tries=100_000):
    fixed = fixed_events()
    windows = []
    for w in range(N_WINDOWS):
        in_w = [f for f in fixed if w * WINDOW <= f[0] < (w + 1) * WINDOW]
        need = Counter({name: c[w] for name, c in WINDOW_COUNTS.items()})
        need.subtract(Counter(name for _, name, _ in in_w))
        if any(v < 0 for v in need.values()):
            raise RuntimeError(f"window {w}: fixed events exceed the window counts")
        pool = [name for name in PILU_LABELS for _ in range(need[name])]
        windows.append((in_w, short_slots(fixed, w, len(pool)), pool))

    code = {name: i + 1 for i, name in enumerate(PILU_LABELS)}
    rng = np.random.default_rng(20091)
    for _ in range(max_tries):
        events = []
        for in_w, slots, pool in windows:
            names = list(pool)
            rng.shuffle(names)
            events += [(t, name, d) for t, name, d in in_w]
            events += [(t, name, d) for (t, d), name in zip(slots, names)]
        events.sort()
        codes = [code[name] for _, name, _ in events]
        if run_test(codes).U == PILU_RUNS:
            return [
                NoteEvent(name, 0, t, round(t + d, 2), int(round(d / PERIOD)) + 1) for t, name, d in events
            ]
    raise RuntimeError("no arrangement with the required run count found")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "ragalab" / "data" / "pilu_events.csv"
    ap.add_argument("--out", type=Path, default=default)
    args = ap.parse_args()
    events = build()
    for a, b in zip(events, events[1:]):
        assert a.offset < b.onset, (a, b)
    assert count_runs([e.name in PILU_LABELS[:3] for e in events]) == PILU_RUNS
    args.out.write_text(format_events(events), encoding="utf-8", newline="\n")
    print(f"wrote {len(events)} events to {args.out}")


if __name__ == "__main__":
    main()
