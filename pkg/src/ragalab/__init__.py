"""Statistical analysis of monophonic raga pitch tracks."""

__version__ = "0.1.0"

from .contour import ContourParams, ContourSegment, ioi_report, segment_contour, summarize
from .notedetect import (
    NoteDatabase,
    NoteEvent,
    NoteSpec,
    band,
    classify_sample,
    default_notedb,
    detect,
    detect_events,
    expand_octaves,
    long_stays,
)
from .pitchdata import PitchSample, PitchTrack, parse_track, pitch_profile, to_midi
from .synth import GeneratorConfig, generate_sequence, render, render_track

__all__ = [
    "ContourParams",
    "ContourSegment",
    "GeneratorConfig",
    "NoteDatabase",
    "NoteEvent",
    "NoteSpec",
    "PitchSample",
    "PitchTrack",
    "band",
    "classify_sample",
    "default_notedb",
    "detect",
    "detect_events",
    "expand_octaves",
    "generate_sequence",
    "ioi_report",
    "long_stays",
    "parse_track",
    "pitch_profile",
    "render",
    "render_track",
    "segment_contour",
    "summarize",
    "to_midi",
]
