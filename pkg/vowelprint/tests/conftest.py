"""Pytest configuration and fixtures for vowelprint tests."""

import os
import struct
from functools import lru_cache
from typing import Optional

import numpy as np
import pytest
import structlog

from vowelprint.models.schemas import AnalysisConfig, FrameHarmonics, SpectralPeak
from vowelprint.models.signals import AudioBuffer
from vowelprint.services.pipeline import AnalysisService
from vowelprint.services.synth import render_vowel, write_wav

# Keep the developer's shell config out of the tests
for _name in [k for k in os.environ if k.startswith("VOWELPRINT_")]:
    del os.environ[_name]

VOWELS = ("[a]", "[o]", "[и]", "[ы]", "[y]", "[э]")
ROUND_TRIP_F0S = (120.0, 150.0, 200.0, 280.0)
SAMPLE_RATE = 16000


@pytest.fixture(autouse=True)
def _isolate_structlog():
    """Undo per-test logging setup so no test logs into another's closed capture stream."""
    saved = structlog.get_config()
    yield
    structlog.configure(**saved)


@lru_cache(maxsize=None)
def cached_vowel(label: str, f0: float, duration: float = 1.0) -> AudioBuffer:
    """Rendered vowels are pure functions of their arguments; render each once."""
    return render_vowel(label, f0, duration, SAMPLE_RATE)


def wav_bytes(
    payload: bytes,
    *,
    format_tag: int = 1,
    channels: int = 1,
    sample_rate: int = SAMPLE_RATE,
    bits: int = 16,
    extra_chunks: bytes = b"",
    fmt_extension: Optional[bytes] = None,
) -> bytes:
    """Hand-assembled RIFF/WAVE image for decoder tests."""
    block_align = channels * bits // 8
    fmt_body = struct.pack(
        "<HHIIHH", format_tag, channels, sample_rate, sample_rate * block_align, block_align, bits
    )
    if fmt_extension is not None:
        fmt_body += fmt_extension
    fmt_chunk = b"fmt " + struct.pack("<I", len(fmt_body)) + fmt_body
    data_chunk = b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) % 2:
        data_chunk += b"\x00"
    body = b"WAVE" + fmt_chunk + extra_chunks + data_chunk
    return b"RIFF" + struct.pack("<I", len(body)) + body


def voiced_frame(
    up1: Optional[float] = None,
    low1: Optional[float] = None,
    low2: Optional[float] = None,
    up2: Optional[float] = None,
) -> FrameHarmonics:
    """Voiced FrameHarmonics with decreasing intensities in each band."""

    def peak(freq: Optional[float], intensity: float) -> Optional[SpectralPeak]:
        if freq is None:
            return None
        return SpectralPeak(frequency=freq, intensity=intensity, bin=int(freq // 3.90625))

    return FrameHarmonics(
        voiced=True,
        low1=peak(low1, 1.0),
        low2=peak(low2, 0.5),
        up1=peak(up1, 0.8),
        up2=peak(up2, 0.4),
    )


@pytest.fixture
def config() -> AnalysisConfig:
    """Default analysis configuration."""
    return AnalysisConfig()


@pytest.fixture
def service() -> AnalysisService:
    """Analysis service with built-in templates."""
    return AnalysisService()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so property tests are reproducible."""
    return np.random.default_rng(20240601)


@pytest.fixture
def sine_buffer() -> AudioBuffer:
    """One second of a 312.5 Hz sine (exactly bin 80 at 4096 / 16 kHz)."""
    t = np.arange(SAMPLE_RATE) / SAMPLE_RATE
    return AudioBuffer(0.5 * np.sin(2 * np.pi * 312.5 * t), SAMPLE_RATE)


@pytest.fixture
def vowel_wav(tmp_path):
    """Write a rendered [a] at 150 Hz and return its path."""
    path = tmp_path / "a.wav"
    write_wav(cached_vowel("[a]", 150.0), path)
    return path
