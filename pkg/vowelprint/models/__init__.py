"""Pydantic records and numeric carriers for vowelprint."""

from vowelprint.models.schemas import (
    AnalysisConfig,
    AnalysisReport,
    BandConfig,
    BandTrack,
    ClassificationResult,
    CorrespondenceRow,
    FrameHarmonics,
    FrequencyRange,
    PitchEstimate,
    PitchTrack,
    Segment,
    SpectralPeak,
    VowelTemplate,
)
from vowelprint.models.signals import AudioBuffer, Frame, FrameSpectrum

__all__ = [
    "AnalysisConfig",
    "AnalysisReport",
    "AudioBuffer",
    "BandConfig",
    "BandTrack",
    "ClassificationResult",
    "CorrespondenceRow",
    "Frame",
    "FrameHarmonics",
    "FrameSpectrum",
    "FrequencyRange",
    "PitchEstimate",
    "PitchTrack",
    "Segment",
    "SpectralPeak",
    "VowelTemplate",
]
