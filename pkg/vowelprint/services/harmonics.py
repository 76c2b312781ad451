"""Dual-band harmonic descriptors, band trends and segmentation."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from vowelprint.exceptions import BandNotCovered, LengthMismatch
from vowelprint.models.schemas import (
    BandConfig,
    BandTrack,
    FrameHarmonics,
    FrequencyRange,
    PitchEstimate,
    PitchTrack,
    Segment,
    SegmentationConfig,
    SpectralPeak,
    Trend,
    TrendConfig,
)
from vowelprint.models.signals import FrameSpectrum
from vowelprint.services.spectral import find_peaks

logger = structlog.get_logger()

MIN_TREND_FRAMES = 3


# ============================================================================
# Per-frame descriptor
# ============================================================================


def _band_peaks(
    spec: FrameSpectrum, band: FrequencyRange, f0: float, floor: float
) -> list[SpectralPeak]:
    found = find_peaks(spec, band.lo, band.hi)
    chosen: list[SpectralPeak] = []
    for frequency, intensity, bin_index in zip(found.frequencies, found.intensities, found.bins):
        k = round(frequency / f0)
        if k < 1 or abs(frequency - k * f0) > f0 / 2.0 or intensity < floor:
            continue
        chosen.append(
            SpectralPeak(frequency=float(frequency), intensity=float(intensity), bin=int(bin_index))
        )
        if len(chosen) == 2:
            break
    return chosen


def extract_frame_harmonics(
    spec: FrameSpectrum, pitch: PitchEstimate, bands: BandConfig
) -> FrameHarmonics:
    """The two most intense harmonic peaks of each band.

    Raises:
        BandNotCovered: the spectrum stops below the upper band edge.
    """
    if spec.nyquist < bands.upper.hi:
        raise BandNotCovered(bands.upper.hi, spec.nyquist)
    if not pitch.voiced or pitch.f0 is None:
        return FrameHarmonics(voiced=False)

    freqs = spec.frequencies
    span = (freqs >= bands.lower.lo) & (freqs <= bands.upper.hi)
    reference = float(np.max(spec.magnitudes[span])) if np.any(span) else 0.0
    floor = bands.peak_floor * reference

    low = _band_peaks(spec, bands.lower, pitch.f0, floor)
    up = _band_peaks(spec, bands.upper, pitch.f0, floor)

    return FrameHarmonics(
        voiced=True,
        low1=low[0] if len(low) > 0 else None,
        low2=low[1] if len(low) > 1 else None,
        up1=up[0] if len(up) > 0 else None,
        up2=up[1] if len(up) > 1 else None,
    )


# ============================================================================
# Band trend
# ============================================================================


@dataclass(frozen=True)
class TrendFit:
    slope: float
    curvature: float
    improvement: float


def fit_trend(times: Sequence[float], values: Sequence[float]) -> TrendFit:
    """Linear slope and quadratic coefficient over centred time."""
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    t = t - t.mean()

    linear = np.polyfit(t, y, 1)
    quadratic = np.polyfit(t, y, 2)
    linear_residual = float(np.sum((y - np.polyval(linear, t)) ** 2))
    quadratic_residual = float(np.sum((y - np.polyval(quadratic, t)) ** 2))

    improvement = 0.0
    if linear_residual > 0.0:
        improvement = (linear_residual - quadratic_residual) / linear_residual
    return TrendFit(
        slope=float(linear[0]), curvature=float(quadratic[0]), improvement=improvement
    )


def classify_trend(fit: TrendFit, cfg: TrendConfig) -> tuple[Trend, float]:
    if fit.curvature < -cfg.curvature_threshold and fit.improvement >= cfg.min_improvement:
        return Trend.CONVEX_UP, fit.curvature
    if fit.slope > cfg.slope_threshold:
        return Trend.RISING, fit.slope
    if fit.slope < -cfg.slope_threshold:
        return Trend.FALLING, fit.slope
    return Trend.FLAT, fit.slope


def band_track(
    frames: Sequence[FrameHarmonics],
    hop_seconds: float,
    cfg: Optional[TrendConfig] = None,
    f0s: Optional[Sequence[Optional[float]]] = None,
) -> BandTrack:
    """Attach the up1 trend of the voiced frames; absent below three usable frames.

    f0s, when given, holds one F0 per frame and travels with the track.
    """
    if not frames:
        raise ValueError("band_track needs at least one frame")
    cfg = cfg or TrendConfig()

    points = [
        (i * hop_seconds, fh.up1.frequency)
        for i, fh in enumerate(frames)
        if fh.voiced and fh.up1 is not None
    ]
    if len(points) < MIN_TREND_FRAMES:
        return BandTrack(frames=list(frames), hop_seconds=hop_seconds, f0s=list(f0s or []))

    times, values = zip(*points)
    trend, strength = classify_trend(fit_trend(times, values), cfg)
    return BandTrack(
        frames=list(frames),
        hop_seconds=hop_seconds,
        trend_up1=trend,
        trend_strength=strength,
        f0s=list(f0s or []),
    )


# ============================================================================
# Segmentation
# ============================================================================


def _runs(flags: Sequence[bool]) -> list[list[int]]:
    """[start, end, voiced] spans of maximal equal-flag runs."""
    runs: list[list[int]] = []
    for i, flag in enumerate(flags):
        if runs and bool(runs[-1][2]) == flag:
            runs[-1][1] = i + 1
        else:
            runs.append([i, i + 1, int(flag)])
    return runs


def _absorb_short(spans: list[list[int]], min_frames: int) -> list[list[int]]:
    """Fold spans shorter than min_frames into their predecessor (the first into its successor)."""
    merged: list[list[int]] = []
    for span in spans:
        if merged and span[1] - span[0] < min_frames:
            merged[-1][1] = span[1]
        else:
            merged.append(list(span))
    if len(merged) > 1 and merged[0][1] - merged[0][0] < min_frames:
        merged[1][0] = merged[0][0]
        merged.pop(0)
    return merged


def _coalesce(spans: list[list[int]]) -> list[list[int]]:
    out: list[list[int]] = []
    for span in spans:
        if out and out[-1][2] == span[2]:
            out[-1][1] = span[1]
        else:
            out.append(list(span))
    return out


def dynamics_boundaries(
    frames: Sequence[FrameHarmonics],
    f0s: Sequence[Optional[float]],
    cfg: SegmentationConfig,
) -> list[int]:
    """Indices where low1 or up1 jumps and stays away for the next frame too.

    The jump threshold is max(jump_threshold, jump_f0_factor * f0) so a
    single-harmonic step of a steady vowel never counts as a boundary.
    """
    boundaries: list[int] = []
    for i in range(1, len(frames) - 1):
        f0 = f0s[i - 1] or f0s[i] or 0.0
        threshold = max(cfg.jump_threshold, cfg.jump_f0_factor * f0)
        for attr in ("low1", "up1"):
            before, here, after = (getattr(frames[j], attr) for j in (i - 1, i, i + 1))
            if before is None or here is None or after is None:
                continue
            if (
                abs(here.frequency - before.frequency) > threshold
                and abs(after.frequency - before.frequency) > threshold
            ):
                boundaries.append(i)
                break
    return boundaries


def segment(
    pitch_track: PitchTrack,
    harmonics: Sequence[FrameHarmonics],
    params: Optional[SegmentationConfig] = None,
) -> list[Segment]:
    """Partition frames by voicing, then split voiced runs at formant jumps.

    Raises:
        LengthMismatch: pitch_track and harmonics differ in length.
    """
    if len(pitch_track.estimates) != len(harmonics):
        raise LengthMismatch(len(pitch_track.estimates), len(harmonics))
    if not harmonics:
        return []
    params = params or SegmentationConfig()

    flags = [est.voiced for est in pitch_track.estimates]
    runs = _coalesce(_absorb_short(_runs(flags), params.min_segment_frames))

    segments: list[Segment] = []
    for start, end, voiced in runs:
        if not voiced:
            segments.append(Segment(start_frame=start, end_frame=end, voiced=False))
            continue

        f0s = [est.f0 for est in pitch_track.estimates[start:end]]
        cuts = [start + b for b in dynamics_boundaries(harmonics[start:end], f0s, params)]
        edges = [start, *cuts, end]
        pieces = [[a, b, 1] for a, b in zip(edges[:-1], edges[1:])]
        for a, b, _ in _absorb_short(pieces, params.min_segment_frames):
            segments.append(Segment(start_frame=a, end_frame=b, voiced=True))

    logger.debug(
        "Segmented frames",
        frames=len(harmonics),
        segments=len(segments),
        voiced=sum(1 for s in segments if s.voiced),
    )
    return segments
