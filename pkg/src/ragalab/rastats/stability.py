"""Vadi/samvadi candidates from how quickly each note's relative frequency settles.

A note is a strong candidate when its relative frequency is reasonably high
and changes little from segment to segment. The instability score of a note
is its worst relative deviation across segments,
``max_seg |rel_seg - rel_overall| / rel_overall``. Sa, the base note, is never a
candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .tables import FrequencyTable, relative

BASE_NOTE = "Sa"


@dataclass(frozen=True)
class NoteStability:
    label: str
    overall_rel: float
    score: float
    eligible: bool


@dataclass(frozen=True)
class StabilityReport:
    notes: tuple[NoteStability, ...]
    ranking: tuple[str, ...]
    eligibility_floor: float
    vadi_candidate: Optional[str] = None
    samvadi_candidate: Optional[str] = None

    def __getitem__(self, label: str) -> NoteStability:
        for n in self.notes:
            if n.label == label:
                return n
        raise KeyError(label)


def stability_report(
    overall: FrequencyTable,
    segments: Sequence[FrequencyTable],
    eligibility_floor: Optional[float] = None,
    base_note: str = BASE_NOTE,
) -> StabilityReport:
    """Rank non-base notes by instability; default floor is 1/(2k) of relative frequency."""
    if len(segments) < 2:
        raise ValueError("need at least two segment tables")
    for seg in segments:
        if seg.labels != overall.labels:
            raise ValueError(f"segment labels {seg.labels} do not match {overall.labels}")
    if eligibility_floor is None:
        eligibility_floor = 1.0 / (2 * len(overall.labels))

    rel_all = relative(overall)
    rel_segs = [relative(s) for s in segments]
    notes = []
    for i, label in enumerate(overall.labels):
        r = float(rel_all[i])
        if r == 0:
            score = math.inf
        else:
            score = max(abs(float(rs[i]) - r) for rs in rel_segs) / r
        eligible = label != base_note and r >= eligibility_floor and math.isfinite(score)
        notes.append(NoteStability(label, r, score, eligible))

    ranking = tuple(n.label for n in sorted((n for n in notes if n.eligible), key=lambda n: n.score))
    vadi = samvadi = None
    # fewer than two eligible notes: scores only, no candidates
    if len(ranking) >= 2:
        vadi, samvadi = ranking[0], ranking[1]
    return StabilityReport(tuple(notes), ranking, float(eligibility_floor), vadi, samvadi)
