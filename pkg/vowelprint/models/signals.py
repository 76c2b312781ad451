"""Numeric carriers passed between the signal-processing stages.

These stay plain frozen dataclasses around read-only numpy arrays: they are
never serialized, and the arrays would only get in pydantic's way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]

# Lowest rate that leaves a margin above the 2500 Hz upper band edge.
MIN_SAMPLE_RATE = 8000


def _frozen(values: npt.ArrayLike) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class AudioBuffer:
    """Mono samples in [-1, 1] with their integer sample rate."""

    samples: FloatArray
    sample_rate: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _frozen(self.samples))
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer samples must be one-dimensional")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate < MIN_SAMPLE_RATE:
            raise ValueError(
                f"sample_rate must be an integer >= {MIN_SAMPLE_RATE}, got {self.sample_rate}"
            )
        if self.samples.size and float(np.max(np.abs(self.samples))) > 1.0:
            raise ValueError("AudioBuffer samples must lie in [-1, 1]")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def scaled(self, factor: float) -> AudioBuffer:
        """Uniformly rescale the amplitude (|factor| <= 1 keeps the range valid)."""
        return AudioBuffer(self.samples * factor, self.sample_rate)


@dataclass(frozen=True)
class Frame:
    """One windowed analysis frame."""

    index: int
    start_time: float
    samples: FloatArray
    sample_rate: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _frozen(self.samples))

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class FrameSpectrum:
    """Magnitude spectrum of a real frame (non-negative frequencies only)."""

    magnitudes: FloatArray
    bin_hz: float
    frame_index: int
    frame_length: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "magnitudes", _frozen(self.magnitudes))
        if self.magnitudes.size != self.frame_length // 2 + 1:
            raise ValueError(
                f"expected {self.frame_length // 2 + 1} bins for frame_length "
                f"{self.frame_length}, got {self.magnitudes.size}"
            )
        if self.magnitudes.size and float(np.min(self.magnitudes)) < 0.0:
            raise ValueError("magnitudes must be non-negative")

    @property
    def nyquist(self) -> float:
        return self.bin_hz * self.frame_length / 2.0

    @property
    def frequencies(self) -> FloatArray:
        return np.arange(self.magnitudes.size, dtype=np.float64) * self.bin_hz

    def scaled(self, factor: float) -> FrameSpectrum:
        return FrameSpectrum(
            self.magnitudes * abs(factor), self.bin_hz, self.frame_index, self.frame_length
        )
