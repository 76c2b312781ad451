"""Fundamental-tone estimation, voicing and track statistics.

F0 comes from a harmonic product spectrum evaluated in the log domain:

    S(f) = sum_{h=1..H} log max |X| over bins round(h f / bin_hz) +- ceil(h / 2)

The coarse maximum over bin-centre candidates in [f0_min, f0_max] is checked
against its sub-multiples (the smallest one scoring within
``subharmonic_ratio`` of the maximum wins) and then refined by a
magnitude-weighted least-squares fit of the interpolated harmonic peaks.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
import structlog
from scipy.ndimage import maximum_filter1d
from scipy.stats import linregress

from vowelprint.exceptions import BandNotCovered, HarmonicAboveNyquist, Unvoiced
from vowelprint.models.schemas import PitchConfig, PitchEstimate, PitchTrack
from vowelprint.models.signals import FloatArray, FrameSpectrum
from vowelprint.services.spectral import TINY, find_peaks

logger = structlog.get_logger()

SUBHARMONIC_DIVISORS = (4, 3, 2)

# Peaks weaker than this share of the frame maximum are numeric residue.
RATIO_PEAK_FLOOR = 1e-3


# ============================================================================
# Harmonic product spectrum
# ============================================================================


class _HpsScorer:
    """Log-HPS score for arbitrary candidate frequencies of one spectrum."""

    def __init__(self, spec: FrameSpectrum, terms: int) -> None:
        self.bin_hz = spec.bin_hz
        self.last_bin = spec.magnitudes.size - 1
        self.layers: list[FloatArray] = []
        for h in range(1, terms + 1):
            width = 2 * math.ceil(h / 2) + 1
            widened = maximum_filter1d(spec.magnitudes, size=width, mode="nearest")
            self.layers.append(np.log(widened + TINY))

    def __call__(self, frequencies: FloatArray) -> FloatArray:
        score = np.zeros_like(frequencies, dtype=np.float64)
        for h, layer in enumerate(self.layers, start=1):
            idx = np.clip(np.rint(h * frequencies / self.bin_hz).astype(np.int64), 0, self.last_bin)
            score += layer[idx]
        return score


def _coarse_f0(spec: FrameSpectrum, cfg: PitchConfig) -> float:
    scorer = _HpsScorer(spec, cfg.harmonic_terms)

    first = math.ceil(cfg.f0_min / spec.bin_hz)
    last = math.floor(cfg.f0_max / spec.bin_hz)
    candidates = np.arange(first, last + 1, dtype=np.float64) * spec.bin_hz
    if candidates.size == 0:
        candidates = np.array([cfg.f0_min])

    scores = scorer(candidates)
    best = float(candidates[int(np.argmax(scores))])
    best_score = float(np.max(scores))

    tolerance = math.log(cfg.subharmonic_ratio)
    for divisor in SUBHARMONIC_DIVISORS:
        sub = best / divisor
        if sub < cfg.f0_min:
            continue
        if float(scorer(np.array([sub]))[0]) >= best_score + tolerance:
            logger.debug("Octave check moved F0 down", coarse=best, divisor=divisor)
            return sub
    return best


def _refine_f0(spec: FrameSpectrum, coarse: float, cfg: PitchConfig) -> tuple[float, float]:
    """Weighted fit f_h ~ h * f0 over the harmonic peaks; returns (f0, F0 intensity)."""
    numerator = 0.0
    denominator = 0.0
    fundamental_intensity = 0.0
    for h in range(1, cfg.harmonic_terms + 1):
        lo = h * coarse - coarse / 4.0
        hi = min(h * coarse + coarse / 4.0, spec.nyquist)
        if lo >= hi:
            break
        found = find_peaks(spec, lo, hi)
        if len(found) == 0:
            continue
        frequency = float(found.frequencies[0])
        intensity = float(found.intensities[0])
        numerator += intensity * h * frequency
        denominator += intensity * h * h
        if h == 1:
            fundamental_intensity = intensity

    f0 = numerator / denominator if denominator > 0.0 else coarse
    f0 = min(max(f0, cfg.f0_min), cfg.f0_max)
    if fundamental_intensity == 0.0:
        fundamental_intensity = float(spec.magnitudes[int(round(f0 / spec.bin_hz))])
    return f0, fundamental_intensity


def voicing_ratio(spec: FrameSpectrum, f0: float, cfg: PitchConfig) -> float:
    """Share of band energy carried by the bins at multiples of f0."""
    lo = cfg.voicing_band.lo
    hi = min(cfg.voicing_band.hi, spec.nyquist)
    freqs = spec.frequencies
    in_band = (freqs >= lo) & (freqs <= hi)
    energy = spec.magnitudes**2
    total = float(np.sum(energy[in_band]))
    if total <= 0.0:
        return 0.0

    harmonic = np.zeros(spec.magnitudes.size, dtype=bool)
    half_window = f0 / 4.0
    k = max(1, math.ceil(lo / f0))
    while k * f0 <= hi:
        window = np.flatnonzero(
            (freqs >= k * f0 - half_window) & (freqs <= k * f0 + half_window) & in_band
        )
        if window.size:
            centre = int(window[np.argmax(spec.magnitudes[window])])
            harmonic[max(centre - 1, 0) : centre + 2] = True
        k += 1

    return min(1.0, float(np.sum(energy[harmonic & in_band])) / total)


def estimate_pitch(spec: FrameSpectrum, cfg: PitchConfig) -> PitchEstimate:
    """F0, F0 intensity and voicing for one frame.

    Raises:
        BandNotCovered: the spectrum stops below 2 * f0_max.
    """
    if spec.nyquist < 2.0 * cfg.f0_max:
        raise BandNotCovered(2.0 * cfg.f0_max, spec.nyquist)
    if not np.any(spec.magnitudes > 0.0):
        return PitchEstimate()

    coarse = _coarse_f0(spec, cfg)
    f0, intensity = _refine_f0(spec, coarse, cfg)
    ratio = voicing_ratio(spec, f0, cfg)

    if ratio <= cfg.voicing_threshold or intensity <= 0.0:
        return PitchEstimate(voicing_ratio=ratio)
    return PitchEstimate(f0=f0, intensity=intensity, voiced=True, voicing_ratio=ratio)


# ============================================================================
# Track statistics
# ============================================================================


def track(estimates: Sequence[PitchEstimate], hop_seconds: float) -> PitchTrack:
    """Mean, population deviation and least-squares slopes over voiced frames."""
    if not estimates:
        raise ValueError("track needs at least one estimate")

    voiced = [(i, e) for i, e in enumerate(estimates) if e.voiced and e.f0 is not None]
    if len(voiced) < 2:
        return PitchTrack(estimates=list(estimates), voiced_frames=len(voiced))

    times = np.array([i * hop_seconds for i, _ in voiced])
    f0s = np.array([e.f0 for _, e in voiced], dtype=np.float64)
    intensities = np.array([e.intensity for _, e in voiced], dtype=np.float64)

    return PitchTrack(
        estimates=list(estimates),
        voiced_frames=len(voiced),
        f0_mean=float(np.mean(f0s)),
        f0_deviation=float(np.std(f0s)),
        f0_slope=float(linregress(times, f0s).slope),
        intensity_slope=float(linregress(times, intensities).slope),
    )


def harmonic_ratio(spec: FrameSpectrum, est: PitchEstimate, k: int) -> float:
    """Intensity of harmonic k relative to the F0 intensity (0 when the harmonic is missing).

    Raises:
        Unvoiced: the estimate carries no f0.
        HarmonicAboveNyquist: k * f0 lies beyond the spectrum.
    """
    if not est.voiced or est.f0 is None:
        raise Unvoiced()
    if k < 2:
        raise ValueError("harmonic index must be at least 2")
    target = k * est.f0
    if target > spec.nyquist:
        raise HarmonicAboveNyquist(k, target, spec.nyquist)
    if est.intensity <= 0.0:
        return 0.0

    found = find_peaks(spec, target - est.f0 / 2.0, min(target + est.f0 / 2.0, spec.nyquist))
    floor = RATIO_PEAK_FLOOR * float(np.max(spec.magnitudes))
    keep = found.intensities >= floor
    if not np.any(keep):
        return 0.0

    frequencies = found.frequencies[keep]
    intensities = found.intensities[keep]
    nearest = int(np.argmin(np.abs(frequencies - target)))
    return float(intensities[nearest]) / est.intensity
