"""Services for vowelprint."""

from vowelprint.services.pipeline import AnalysisService, FrameAnalysis, TrackRow
from vowelprint.services.synth import FormantPeak, SynthSpec, render, render_vowel, write_wav

__all__ = [
    "AnalysisService",
    "FrameAnalysis",
    "TrackRow",
    "FormantPeak",
    "SynthSpec",
    "render",
    "render_vowel",
    "write_wav",
]
