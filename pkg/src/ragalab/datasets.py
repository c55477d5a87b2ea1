"""Published note-occurrence data for three one-minute raga recordings.

Pilu (harmonium) and Kirwani (harmonium) are given as counts. Yaman (vocal) was
published as relative frequencies only; counts here are rebuilt as ``rel * n``
for the stated segment sizes.
"""

from __future__ import annotations

from importlib import resources

from .notedetect import parse_events
from .rastats.tables import FrequencyTable, SegmentSpec

PILU_LABELS = ("Sa", "Sudh Re", "Komal Ga", "Sudh Ma", "Pa", "Komal Dha", "Sudh Ni")
YAMAN_LABELS = ("Sa", "Sudh Re", "Sudh Ga", "Tibra Ma", "Pa", "Sudh Dha", "Sudh Ni")

PILU_SEGMENTS = (SegmentSpec(0, 30), SegmentSpec(20, 50), SegmentSpec(30, 60))

PILU_OVERALL = FrequencyTable(PILU_LABELS, (30, 22, 21, 8, 11, 6, 17))
PILU_FIRST = FrequencyTable(PILU_LABELS, (16, 15, 10, 1, 3, 1, 9))
PILU_MIDDLE = FrequencyTable(PILU_LABELS, (17, 8, 13, 6, 10, 6, 12))
PILU_LAST = FrequencyTable(PILU_LABELS, (14, 7, 11, 7, 8, 5, 8))

# 1-based block lists used for the three Pilu segments
PILU_POOLINGS = ("1;2;3;4-7", "1;2;3;4;5;6;7", "1;2;3;4-5;6-7")

# 10 s windows over the first minute: Komal Ga (vadi) and Sudh Ni (samvadi)
PILU_VADI_WINDOWS = (4, 4, 2, 0, 10, 1)
PILU_SAMVADI_WINDOWS = (2, 2, 5, 4, 3, 1)

# onsets of the 15 prominent long stays and their notes
PILU_LONG_STAY_ONSETS = (
    2.5, 8.62, 11.55, 12.93, 17.22, 19.74, 22.72, 25.17, 29.10, 32.95, 36.24, 42.11, 43.89, 49.44, 53.93,
)
PILU_LONG_STAY_NOTES = (
    "Sa", "Komal Ga", "Komal Ga", "Sa", "Sa", "Sudh Ni", "Pa", "Sa", "Sa", "Sa", "Sa", "Sudh Ni", "Komal Ga",
    "Sa", "Sa",
)
PILU_RUNS = 57

KIRWANI_OVERALL = FrequencyTable(PILU_LABELS, (9, 11, 9, 8, 21, 16, 8))
KIRWANI_FIRST = FrequencyTable(PILU_LABELS, (3, 6, 5, 5, 14, 13, 3))
KIRWANI_MIDDLE = FrequencyTable(PILU_LABELS, (8, 9, 7, 7, 15, 12, 7))
KIRWANI_LAST = FrequencyTable(PILU_LABELS, (6, 5, 4, 3, 7, 3, 5))

YAMAN_SIZES = (181, 55, 116, 125)  # whole minute, first, middle, last
YAMAN_RELATIVE = {
    "whole": (0.220994, 0.149171, 0.127072, 0.066298, 0.044198, 0.088397, 0.303867),
    "first": (0.181818, 0.163636, 0.181818, 0.109090, 0.072727, 0.072727, 0.218181),
    "middle": (0.241379, 0.146551, 0.129310, 0.060344, 0.034482, 0.077586, 0.310344),
    "last": (0.240000, 0.144000, 0.104000, 0.048000, 0.032000, 0.096000, 0.336000),
}


def counts_from_relative(rel, n: int) -> tuple[int, ...]:
    """Integer counts behind published relative frequencies; fails if they do not add up to n."""
    counts = tuple(int(round(r * n)) for r in rel)
    if sum(counts) != n:
        raise ValueError(f"rounded counts sum to {sum(counts)}, not {n}")
    return counts


def yaman_tables() -> dict[str, FrequencyTable]:
    return {
        part: FrequencyTable(YAMAN_LABELS, counts_from_relative(rel, n))
        for (part, rel), n in zip(YAMAN_RELATIVE.items(), YAMAN_SIZES)
    }


def pilu_events():
    """Event list consistent with every published Pilu count (see scripts/build_pilu_fixture.py)."""
    text = resources.files("ragalab").joinpath("data/pilu_events.csv").read_text(encoding="utf-8")
    return parse_events(text)
