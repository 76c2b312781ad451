"""Pydantic models for vowelprint records, configuration and reports."""

from __future__ import annotations

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

REPORT_SCHEMA_VERSION = "1.0"


# ============================================================================
# Enums
# ============================================================================


class WindowKind(str, Enum):
    """Analysis window applied to every frame."""

    RECTANGULAR = "rectangular"
    HANN = "hann"
    HAMMING = "hamming"


class Trend(str, Enum):
    """Shape of the up1 frequency over a voiced stretch."""

    RISING = "rising"
    FALLING = "falling"
    FLAT = "flat"
    CONVEX_UP = "convex_up"


class Dominance(str, Enum):
    """Which of the two lower-band harmonics sits over the other."""

    FIRST_OVER_SECOND = "first_over_second"
    SECOND_OVER_FIRST = "second_over_first"


class UpShape(str, Enum):
    """Per-row structure of the upper-band rule."""

    TWO_BANDS = "two_bands"
    SINGLE_BAND = "single_band"
    CONVEX_UP = "convex_up"
    SECOND_OVER_FIRST = "second_over_first"


class Context(str, Enum):
    """Hard/soft consonant context around a stressed vowel."""

    HARD_HARD = "hard_hard"
    HARD_SOFT = "hard_soft"
    SOFT_HARD = "soft_hard"
    SOFT_SOFT = "soft_soft"


class ExpectedTrend(str, Enum):
    """Upper-band behaviour expected in a consonant context."""

    REDUCED = "reduced"
    RISING = "rising"
    FALLING = "falling"
    ELEVATED = "elevated"


class Verdict(str, Enum):
    """Similarity verdict of an English sound against its Russian counterpart."""

    CLEAR = "clear"
    UNCLEAR = "unclear"
    NONE = "none"


# ============================================================================
# Shared value types
# ============================================================================


class FrequencyRange(BaseModel):
    """Closed frequency interval in Hz."""

    model_config = ConfigDict(frozen=True)

    lo: float = Field(..., ge=0.0, description="Lower edge in Hz")
    hi: float = Field(..., gt=0.0, description="Upper edge in Hz")

    @model_validator(mode="after")
    def _ordered(self) -> FrequencyRange:
        if not self.lo < self.hi:
            raise ValueError(f"range lo must be below hi, got ({self.lo}, {self.hi})")
        return self

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0

    def contains(self, frequency: float, tolerance: float = 0.0) -> bool:
        return self.lo - tolerance <= frequency <= self.hi + tolerance

    def within(self, outer: FrequencyRange) -> bool:
        return outer.lo <= self.lo and self.hi <= outer.hi


class SpectralPeak(BaseModel):
    """A spectral component dominating its immediate neighbourhood."""

    model_config = ConfigDict(frozen=True)

    frequency: float = Field(..., description="Interpolated frequency in Hz")
    intensity: float = Field(..., gt=0.0, description="Interpolated linear magnitude")
    bin: int = Field(..., ge=0, description="Index of the maximal bin")


# ============================================================================
# Configuration models
# ============================================================================


class FrameConfig(BaseModel):
    """Framing of the input buffer."""

    frame_length: int = Field(default=4096, gt=1, description="Samples per frame")
    hop_length: int = Field(default=1024, gt=0, description="Samples between frame starts")
    window: WindowKind = Field(default=WindowKind.HANN)

    @model_validator(mode="after")
    def _hop_fits(self) -> FrameConfig:
        if self.hop_length > self.frame_length:
            raise ValueError("hop_length must not exceed frame_length")
        return self


class PitchConfig(BaseModel):
    """Fundamental-tone search range and voicing decision."""

    f0_min: float = Field(default=70.0, gt=0.0, description="Lowest F0 candidate in Hz")
    f0_max: float = Field(default=350.0, gt=0.0, description="Highest F0 candidate in Hz")
    voicing_threshold: float = Field(
        default=0.5, gt=0.0, lt=1.0, description="Harmonic/total energy ratio for voicing"
    )
    harmonic_terms: int = Field(default=4, ge=2, le=8, description="Product terms in HPS")
    subharmonic_ratio: float = Field(
        default=1e-3, gt=0.0, lt=1.0, description="Score tolerance of the octave-down check"
    )
    voicing_band: FrequencyRange = Field(default=FrequencyRange(lo=60.0, hi=2500.0))

    @model_validator(mode="after")
    def _range_ordered(self) -> PitchConfig:
        if not self.f0_min < self.f0_max:
            raise ValueError("f0_min must be below f0_max")
        return self


class BandConfig(BaseModel):
    """Lower (FI) and upper (FII) harmonic bands."""

    lower: FrequencyRange = Field(default=FrequencyRange(lo=60.0, hi=750.0))
    upper: FrequencyRange = Field(default=FrequencyRange(lo=750.0, hi=2500.0))
    peak_floor: float = Field(
        default=1e-3,
        ge=0.0,
        lt=1.0,
        description="Minimum peak intensity relative to the strongest magnitude in both bands",
    )

    @model_validator(mode="after")
    def _bands_ordered(self) -> BandConfig:
        if self.lower.hi > self.upper.lo:
            raise ValueError("lower band must end at or below the start of the upper band")
        return self

    @classmethod
    def from_edges(cls, lo1: float, hi1: float, lo2: float, hi2: float) -> BandConfig:
        return cls(lower=FrequencyRange(lo=lo1, hi=hi1), upper=FrequencyRange(lo=lo2, hi=hi2))


class TrendConfig(BaseModel):
    slope_threshold: float = Field(default=100.0, ge=0.0, description="Hz/s")
    curvature_threshold: float = Field(default=1000.0, ge=0.0, description="Hz/s^2")
    min_improvement: float = Field(
        default=0.2, ge=0.0, le=1.0, description="Residual reduction required for convex_up"
    )


class SegmentationConfig(BaseModel):
    jump_threshold: float = Field(default=200.0, gt=0.0, description="Hz")
    jump_f0_factor: float = Field(
        default=1.5, ge=0.0, description="Jumps must also exceed this many F0 steps"
    )
    min_segment_frames: int = Field(default=3, ge=1)


class ClassifierConfig(BaseModel):
    accept_threshold: float = Field(default=0.75, ge=0.0, le=1.0)
    range_tolerance_hz: float = Field(
        default=0.0, ge=0.0, description="Hz by which template ranges are widened on both sides"
    )


class AnalysisConfig(BaseModel):
    """Everything the pipeline needs; echoed verbatim into reports."""

    frame: FrameConfig = Field(default_factory=FrameConfig)
    pitch: PitchConfig = Field(default_factory=PitchConfig)
    bands: BandConfig = Field(default_factory=BandConfig)
    trend: TrendConfig = Field(default_factory=TrendConfig)
    segmentation: SegmentationConfig = Field(default_factory=SegmentationConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)


# ============================================================================
# Pitch
# ============================================================================


class PitchEstimate(BaseModel):
    """F0, its intensity and the voicing flag of one frame."""

    f0: Optional[float] = Field(default=None, description="Fundamental frequency in Hz")
    intensity: float = Field(default=0.0, ge=0.0, description="Magnitude of the F0 peak")
    voiced: bool = False
    voicing_ratio: float = Field(
        default=0.0, ge=0.0, le=1.0, description="Harmonic share of band energy"
    )

    @model_validator(mode="after")
    def _voicing_matches_f0(self) -> PitchEstimate:
        if self.voiced != (self.f0 is not None):
            raise ValueError("voiced must be true exactly when f0 is present")
        return self


class PitchStats(BaseModel):
    """Track-level dynamics over voiced frames; absent below two voiced frames."""

    voiced_frames: int = Field(default=0, ge=0)
    f0_mean: Optional[float] = None
    f0_deviation: Optional[float] = Field(default=None, description="Population std, Hz")
    f0_slope: Optional[float] = Field(default=None, description="Hz/s")
    intensity_slope: Optional[float] = Field(default=None, description="Magnitude per second")


class PitchTrack(PitchStats):
    estimates: list[PitchEstimate] = Field(default_factory=list)

    def stats(self) -> PitchStats:
        return PitchStats.model_validate(self.model_dump(exclude={"estimates"}))


# ============================================================================
# Harmonics
# ============================================================================


class FrameHarmonics(BaseModel):
    """Voicing flag plus the two dominant harmonics of each band."""

    voiced: bool = False
    low1: Optional[SpectralPeak] = None
    low2: Optional[SpectralPeak] = None
    up1: Optional[SpectralPeak] = None
    up2: Optional[SpectralPeak] = None

    @model_validator(mode="after")
    def _consistent(self) -> FrameHarmonics:
        peaks = (self.low1, self.low2, self.up1, self.up2)
        if not self.voiced and any(p is not None for p in peaks):
            raise ValueError("unvoiced frames carry no peaks")
        for first, second in ((self.low1, self.low2), (self.up1, self.up2)):
            if second is not None and first is None:
                raise ValueError("a second peak requires a first peak")
            if first is not None and second is not None and first.intensity < second.intensity:
                raise ValueError("first peak must be at least as intense as the second")
        return self


class BandTrack(BaseModel):
    """Frame sequence of one stretch with its up1 trend."""

    frames: list[FrameHarmonics] = Field(default_factory=list)
    hop_seconds: float = Field(..., gt=0.0)
    trend_up1: Optional[Trend] = None
    trend_strength: Optional[float] = Field(
        default=None, description="Slope in Hz/s, or curvature in Hz/s^2 for convex_up"
    )
    f0s: list[Optional[float]] = Field(
        default_factory=list, description="Per-frame F0 in Hz; empty when unknown"
    )

    @model_validator(mode="after")
    def _f0s_aligned(self) -> BandTrack:
        if self.f0s and len(self.f0s) != len(self.frames):
            raise ValueError("f0s must be empty or hold one entry per frame")
        return self

    @property
    def voiced_frames(self) -> list[FrameHarmonics]:
        return [fh for fh in self.frames if fh.voiced]

    @property
    def voiced_f0s(self) -> list[Optional[float]]:
        """F0 of each voiced frame, None where unknown."""
        f0s = self.f0s or [None] * len(self.frames)
        return [f0 for fh, f0 in zip(self.frames, f0s) if fh.voiced]


class Segment(BaseModel):
    """Half-open frame span [start_frame, end_frame)."""

    model_config = ConfigDict(frozen=True)

    start_frame: int = Field(..., ge=0)
    end_frame: int = Field(..., ge=1)
    voiced: bool

    @model_validator(mode="after")
    def _non_empty(self) -> Segment:
        if self.end_frame <= self.start_frame:
            raise ValueError("segment must span at least one frame")
        return self

    def __len__(self) -> int:
        return self.end_frame - self.start_frame


# ============================================================================
# Classification
# ============================================================================


class VowelTemplate(BaseModel):
    """One rule row for a Russian stressed vowel."""

    model_config = ConfigDict(frozen=True)

    label: str
    low_range: FrequencyRange
    low_dominance: Dominance
    up1_range: Optional[FrequencyRange] = None
    up2_range: Optional[FrequencyRange] = None
    up_shape: UpShape

    @model_validator(mode="after")
    def _shape_matches_ranges(self) -> VowelTemplate:
        if self.up1_range is None:
            raise ValueError(f"{self.label}: every template needs an upper range")
        if (self.up_shape == UpShape.TWO_BANDS) != (self.up2_range is not None):
            raise ValueError(f"{self.label}: up2_range is used by two_bands templates only")
        return self


class CriterionResult(BaseModel):
    name: str
    passed: bool
    note: Optional[str] = None


class ClassificationResult(BaseModel):
    """Scored label; `candidate` keeps the best template even when rejected."""

    label: str
    score: float = Field(..., ge=0.0, le=1.0)
    candidate: str
    passed: int = Field(..., ge=0)
    total: int = Field(..., ge=0)
    per_criterion: list[CriterionResult] = Field(default_factory=list)
    scores: dict[str, float] = Field(default_factory=dict)


class PositionPattern(BaseModel):
    model_config = ConfigDict(frozen=True)

    context: Context
    expected_trend: ExpectedTrend


class CorrespondenceRow(BaseModel):
    """English sound with its expected Russian counterpart(s).

    `expected_russian` is a composition: one entry per part of the sound
    (two for diphthongs), each listing acceptable alternatives.
    """

    model_config = ConfigDict(frozen=True)

    english: str
    expected_russian: list[list[str]]
    verdict: Verdict
    note: str

    @property
    def is_diphthong(self) -> bool:
        return len(self.expected_russian) > 1


class ComparisonReport(BaseModel):
    english: str
    row: CorrespondenceRow
    achieved: list[str]
    results: list[ClassificationResult]
    match: bool
    verdict: Verdict


# ============================================================================
# Reports
# ============================================================================


class FrameRecord(BaseModel):
    index: int
    time: float = Field(..., description="Frame start time in seconds")
    pitch: PitchEstimate
    harmonics: FrameHarmonics
    harmonic_ratios: list[float] = Field(
        default_factory=list, description="Intensity of harmonics k=2.. over the F0 intensity"
    )


class SegmentReport(BaseModel):
    start_frame: int
    end_frame: int
    start_time: float
    end_time: float
    voiced: bool
    pitch: PitchStats
    trend_up1: Optional[Trend] = None
    trend_strength: Optional[float] = None
    classification: Optional[ClassificationResult] = None
    position: Optional[PositionPattern] = None
    frames: list[FrameRecord] = Field(default_factory=list)


class AnalysisReport(BaseModel):
    """Full pipeline output for one buffer."""

    schema_version: str = REPORT_SCHEMA_VERSION
    sample_rate: int
    duration: float
    frame_count: int
    config: AnalysisConfig
    pitch: PitchStats
    segments: list[SegmentReport] = Field(default_factory=list)
