"""Magnitude spectra and local-maximum peak picking.

A peak is a bin strictly greater than both neighbours; its frequency and
intensity are refined with a parabola through the log-magnitudes of the three
bins around it. No prominence threshold is applied here.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np
from scipy.fft import rfft

from vowelprint.exceptions import EmptyBand
from vowelprint.models.schemas import SpectralPeak
from vowelprint.models.signals import FloatArray, Frame, FrameSpectrum

# Keeps log() finite on exact zeros without moving any real magnitude.
TINY = float(np.finfo(np.float64).tiny)

DB_FLOOR = -200.0


class PeakArrays(NamedTuple):
    """Peaks as parallel arrays, ordered by intensity then frequency."""

    frequencies: FloatArray
    intensities: FloatArray
    bins: np.ndarray

    def __len__(self) -> int:
        return int(self.frequencies.size)


def spectrum(frame: Frame) -> FrameSpectrum:
    """|DFT| of the windowed frame over the non-negative frequencies."""
    if len(frame) == 0:
        raise ValueError("cannot take the spectrum of an empty frame")
    magnitudes = np.abs(rfft(frame.samples))
    return FrameSpectrum(
        magnitudes=magnitudes,
        bin_hz=frame.sample_rate / len(frame),
        frame_index=frame.index,
        frame_length=len(frame),
    )


def spectrum_db(spec: FrameSpectrum) -> FloatArray:
    """Magnitudes in dB, floored so silent bins stay finite."""
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(spec.magnitudes)
    return np.maximum(db, DB_FLOOR)


def parabolic_vertex(
    left: FloatArray, centre: FloatArray, right: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Offset (in bins) and height of the parabola through three samples."""
    denom = left - 2.0 * centre + right
    safe = np.where(denom == 0.0, 1.0, denom)
    offset = np.where(denom == 0.0, 0.0, 0.5 * (left - right) / safe)
    height = centre - 0.25 * (left - right) * offset
    return offset, height


def find_peaks(spec: FrameSpectrum, band_lo: float, band_hi: float) -> PeakArrays:
    """All strict local maxima whose refined frequency lies in [band_lo, band_hi]."""
    if not 0.0 <= band_lo < band_hi:
        raise ValueError(f"invalid band [{band_lo}, {band_hi}]")
    if band_hi > spec.nyquist + 1e-9:
        raise ValueError(f"band edge {band_hi} Hz is above nyquist {spec.nyquist} Hz")

    m = spec.magnitudes
    first = max(1, int(np.floor(band_lo / spec.bin_hz)))
    last = min(m.size - 2, int(np.ceil(band_hi / spec.bin_hz)))
    if last < first:
        return PeakArrays(np.empty(0), np.empty(0), np.empty(0, dtype=np.int64))

    idx = np.arange(first, last + 1)
    is_peak = (m[idx] > m[idx - 1]) & (m[idx] > m[idx + 1])
    bins = idx[is_peak]

    log_left = np.log(m[bins - 1] + TINY)
    log_centre = np.log(m[bins] + TINY)
    log_right = np.log(m[bins + 1] + TINY)
    offset, height = parabolic_vertex(log_left, log_centre, log_right)

    frequencies = (bins + offset) * spec.bin_hz
    intensities = np.exp(height)

    inside = (frequencies >= band_lo) & (frequencies <= band_hi)
    frequencies, intensities, bins = frequencies[inside], intensities[inside], bins[inside]

    order = np.lexsort((frequencies, -intensities))
    return PeakArrays(frequencies[order], intensities[order], bins[order])


def pick_peaks(
    spec: FrameSpectrum, band_lo: float, band_hi: float, max_peaks: Optional[int] = None
) -> list[SpectralPeak]:
    """Most intense local maxima in the band, strongest first.

    Raises:
        EmptyBand: the band holds no local maximum.
    """
    found = find_peaks(spec, band_lo, band_hi)
    if len(found) == 0:
        raise EmptyBand(band_lo, band_hi)

    count = len(found) if max_peaks is None else min(max_peaks, len(found))
    return [
        SpectralPeak(
            frequency=float(found.frequencies[i]),
            intensity=float(found.intensities[i]),
            bin=int(found.bins[i]),
        )
        for i in range(count)
    ]
