"""End-to-end analysis of one buffer."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import structlog

from vowelprint.exceptions import ConfigError, NoVoicedFrames
from vowelprint.models.schemas import (
    AnalysisConfig,
    AnalysisReport,
    BandConfig,
    BandTrack,
    ClassificationResult,
    ComparisonReport,
    CorrespondenceRow,
    FrameHarmonics,
    FrameRecord,
    PitchEstimate,
    PitchTrack,
    Segment,
    SegmentReport,
    VowelTemplate,
)
from vowelprint.models.signals import AudioBuffer, FrameSpectrum
from vowelprint.services import classifier, harmonics, pitch, signal_io, spectral

logger = structlog.get_logger()

RATIO_HARMONICS = (2, 3, 4)


def _check_template_bands(templates: Sequence[VowelTemplate], bands: BandConfig) -> None:
    """Raise ConfigError when a template range leaves its harmonic band."""
    for template in templates:
        placed = [("low", template.low_range, bands.lower)]
        placed += [
            (name, rng, bands.upper)
            for name, rng in (("up1", template.up1_range), ("up2", template.up2_range))
            if rng is not None
        ]
        for name, rng, band in placed:
            if not rng.within(band):
                raise ConfigError(
                    f"template {template.label} {name} range {rng.lo:g}-{rng.hi:g} Hz "
                    f"lies outside the {band.lo:g}-{band.hi:g} Hz band"
                )


@dataclass(frozen=True)
class FrameAnalysis:
    """Per-frame intermediates shared by every report built from one buffer."""

    buffer: AudioBuffer
    spectra: list[FrameSpectrum]
    estimates: list[PitchEstimate]
    harmonics: list[FrameHarmonics]
    pitch_track: PitchTrack
    segments: list[Segment]
    hop_seconds: float


@dataclass(frozen=True)
class TrackRow:
    """One plottable frame: centre time, pitch and band peaks."""

    time: float
    pitch: PitchEstimate
    harmonics: FrameHarmonics


class AnalysisService:
    """Runs the vowel analysis chain with one fixed configuration."""

    def __init__(
        self,
        config: Optional[AnalysisConfig] = None,
        templates: Optional[Sequence[VowelTemplate]] = None,
        correspondence: Optional[Sequence[CorrespondenceRow]] = None,
    ) -> None:
        self.config = config or AnalysisConfig()
        if templates is None:
            templates = classifier.builtin_templates()
        self.templates = list(templates)
        if correspondence is None:
            correspondence = classifier.correspondence_table()
        self.correspondence = list(correspondence)
        _check_template_bands(self.templates, self.config.bands)

    # ------------------------------------------------------------------
    # Frame level
    # ------------------------------------------------------------------

    def run_frames(self, buffer: AudioBuffer) -> FrameAnalysis:
        cfg = self.config
        windowed = signal_io.frames(buffer, cfg.frame)
        spectra = [spectral.spectrum(frame) for frame in windowed]
        estimates = [pitch.estimate_pitch(spec, cfg.pitch) for spec in spectra]
        frame_harmonics = [
            harmonics.extract_frame_harmonics(spec, est, cfg.bands)
            for spec, est in zip(spectra, estimates)
        ]

        hop_seconds = cfg.frame.hop_length / buffer.sample_rate
        pitch_track = pitch.track(estimates, hop_seconds)
        segments = harmonics.segment(pitch_track, frame_harmonics, cfg.segmentation)

        logger.info(
            "Analyzed frames",
            frames=len(spectra),
            voiced=pitch_track.voiced_frames,
            segments=len(segments),
        )
        return FrameAnalysis(
            buffer=buffer,
            spectra=spectra,
            estimates=estimates,
            harmonics=frame_harmonics,
            pitch_track=pitch_track,
            segments=segments,
            hop_seconds=hop_seconds,
        )

    @staticmethod
    def harmonic_ratios(spec: FrameSpectrum, est: PitchEstimate) -> list[float]:
        """Ratios for k = 2..4, stopping at the first harmonic past nyquist."""
        if not est.voiced or est.f0 is None:
            return []
        ratios = []
        for k in RATIO_HARMONICS:
            if k * est.f0 > spec.nyquist:
                break
            ratios.append(pitch.harmonic_ratio(spec, est, k))
        return ratios

    def tracks(self, buffer: AudioBuffer) -> list[TrackRow]:
        analysis = self.run_frames(buffer)
        centers = signal_io.frame_centers(
            len(analysis.spectra), self.config.frame, buffer.sample_rate
        )
        return [
            TrackRow(time=float(t), pitch=est, harmonics=fh)
            for t, est, fh in zip(centers, analysis.estimates, analysis.harmonics)
        ]

    # ------------------------------------------------------------------
    # Segment level
    # ------------------------------------------------------------------

    def _segment_report(self, analysis: FrameAnalysis, seg: Segment) -> SegmentReport:
        cfg = self.config
        rate = analysis.buffer.sample_rate
        start, end = seg.start_frame, seg.end_frame
        times = signal_io.frame_times(len(analysis.spectra), cfg.frame, rate)

        records = [
            FrameRecord(
                index=i,
                time=float(times[i]),
                pitch=analysis.estimates[i],
                harmonics=analysis.harmonics[i],
                harmonic_ratios=self.harmonic_ratios(analysis.spectra[i], analysis.estimates[i]),
            )
            for i in range(start, end)
        ]
        stats = pitch.track(analysis.estimates[start:end], analysis.hop_seconds).stats()

        report = SegmentReport(
            start_frame=start,
            end_frame=end,
            start_time=float(times[start]),
            end_time=float(times[end - 1]) + cfg.frame.frame_length / rate,
            voiced=seg.voiced,
            pitch=stats,
            frames=records,
        )
        if not seg.voiced:
            return report

        f0s = [est.f0 for est in analysis.estimates[start:end]]
        band = harmonics.band_track(
            analysis.harmonics[start:end], analysis.hop_seconds, cfg.trend, f0s
        )
        report.trend_up1 = band.trend_up1
        report.trend_strength = band.trend_strength
        if band.voiced_frames:
            report.classification = classifier.classify_segment(
                band, self.templates, cfg.classifier
            )
        if band.trend_up1 is not None:
            report.position = classifier.position_pattern(band, self.templates, cfg.classifier)
        return report

    def analyze(self, buffer: AudioBuffer) -> AnalysisReport:
        """Full report: config echo, overall pitch statistics and every segment."""
        analysis = self.run_frames(buffer)
        return AnalysisReport(
            sample_rate=buffer.sample_rate,
            duration=buffer.duration,
            frame_count=len(analysis.spectra),
            config=self.config,
            pitch=analysis.pitch_track.stats(),
            segments=[self._segment_report(analysis, seg) for seg in analysis.segments],
        )

    def voiced_region(self, analysis: FrameAnalysis) -> BandTrack:
        """Band track from the first voiced segment start to the last voiced segment end.

        Raises:
            NoVoicedFrames: no segment is voiced.
        """
        voiced = [seg for seg in analysis.segments if seg.voiced]
        if not voiced:
            raise NoVoicedFrames()
        start, end = voiced[0].start_frame, voiced[-1].end_frame
        f0s = [est.f0 for est in analysis.estimates[start:end]]
        return harmonics.band_track(
            analysis.harmonics[start:end], analysis.hop_seconds, self.config.trend, f0s
        )

    def classify(self, buffer: AudioBuffer) -> ClassificationResult:
        region = self.voiced_region(self.run_frames(buffer))
        return classifier.classify_segment(region, self.templates, self.config.classifier)

    def compare(self, buffer: AudioBuffer, english_label: str) -> ComparisonReport:
        region = self.voiced_region(self.run_frames(buffer))
        return classifier.compare_analysis(
            region,
            english_label,
            self.templates,
            self.config.classifier,
            self.config.segmentation,
            self.config.trend,
            self.correspondence,
        )
