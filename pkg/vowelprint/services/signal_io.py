"""WAV decoding and frame slicing.

The reader walks the RIFF chunk list itself (struct + numpy) so every failure
maps onto a precise error: MalformedWav for structural damage,
UnsupportedEncoding for valid files we choose not to decode, EmptyAudio when
there is nothing to analyze.
"""

from __future__ import annotations

import io
import struct
from functools import lru_cache
from pathlib import Path
from typing import Union

import numpy as np
import structlog
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window

from vowelprint.exceptions import (
    BufferTooShort,
    ConfigError,
    EmptyAudio,
    IoFailure,
    MalformedWav,
    UnsupportedEncoding,
)
from vowelprint.models.schemas import FrameConfig, WindowKind
from vowelprint.models.signals import MIN_SAMPLE_RATE, AudioBuffer, Frame, FloatArray

logger = structlog.get_logger()

PCM = 0x0001
IEEE_FLOAT = 0x0003
EXTENSIBLE = 0xFFFE

# {XXXXXXXX-0000-0010-8000-00AA00389B71}, little-endian byte order
_SUBFORMAT_TAIL = b"\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"

# Coarsest spectral resolution that still separates the narrowest vowel ranges.
MAX_BIN_HZ = 50.0

PathLike = Union[str, Path]


# ============================================================================
# RIFF parsing
# ============================================================================


def _read_exact(fid: io.BytesIO, size: int, what: str) -> bytes:
    data = fid.read(size)
    if len(data) != size:
        raise MalformedWav(f"truncated {what}")
    return data


def _read_riff_header(fid: io.BytesIO) -> None:
    magic = fid.read(4)
    if magic == b"RIFX":
        raise UnsupportedEncoding("big-endian RIFX files are not supported")
    if magic != b"RIFF":
        raise MalformedWav(f"bad magic {magic!r}, expected b'RIFF'")
    _read_exact(fid, 4, "RIFF header")
    form = fid.read(4)
    if form != b"WAVE":
        raise MalformedWav(f"RIFF form type is {form!r}, expected b'WAVE'")


def _read_fmt_chunk(fid: io.BytesIO, size: int) -> tuple[int, int, int, int, int]:
    if size < 16:
        raise MalformedWav(f"fmt chunk of {size} bytes is shorter than 16")
    body = _read_exact(fid, size, "fmt chunk")
    format_tag, channels, sample_rate, _byte_rate, block_align, bit_depth = struct.unpack(
        "<HHIIHH", body[:16]
    )

    if format_tag == EXTENSIBLE:
        if size < 40:
            raise MalformedWav("extensible fmt chunk is shorter than 40 bytes")
        guid = body[24:40]
        if not guid.endswith(_SUBFORMAT_TAIL):
            raise UnsupportedEncoding("unknown extensible sub-format")
        format_tag = struct.unpack("<I", guid[:4])[0]

    if format_tag not in (PCM, IEEE_FLOAT):
        raise UnsupportedEncoding(f"format tag {format_tag:#06x} (only PCM and IEEE float)")
    if channels == 0 or block_align == 0:
        raise MalformedWav("fmt chunk declares zero channels or zero block size")
    if channels > 2:
        raise UnsupportedEncoding(f"{channels} channels (mono or stereo only)")
    return format_tag, channels, sample_rate, block_align, bit_depth


def _decode_samples(
    raw: bytes, format_tag: int, channels: int, block_align: int, bit_depth: int
) -> FloatArray:
    bytes_per_sample = block_align // channels
    if bytes_per_sample * channels != block_align:
        raise MalformedWav(f"block align {block_align} does not split into {channels} channels")

    usable = len(raw) - len(raw) % block_align
    if usable != len(raw):
        logger.warning("Dropping partial trailing sample frame", extra_bytes=len(raw) - usable)
    raw = raw[:usable]

    if format_tag == IEEE_FLOAT:
        if bytes_per_sample == 4:
            data = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        elif bytes_per_sample == 8:
            data = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        else:
            raise UnsupportedEncoding(f"{bit_depth}-bit float samples")
        if not np.all(np.isfinite(data)):
            raise MalformedWav("float samples contain NaN or infinity")
        peak = float(np.max(np.abs(data))) if data.size else 0.0
        if peak > 1.0:
            logger.warning("Clipping float samples outside [-1, 1]", peak=peak)
            data = np.clip(data, -1.0, 1.0)
    elif bytes_per_sample == 1:
        data = (np.frombuffer(raw, dtype="u1").astype(np.float64) - 128.0) / 128.0
    elif bytes_per_sample == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif bytes_per_sample == 3:
        triplets = np.frombuffer(raw, dtype="u1").reshape(-1, 3).astype(np.int32)
        values = triplets[:, 0] | (triplets[:, 1] << 8) | (triplets[:, 2] << 16)
        values = np.where(values >= 1 << 23, values - (1 << 24), values)
        data = values.astype(np.float64) / float(1 << 23)
    elif bytes_per_sample == 4:
        data = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
    else:
        raise UnsupportedEncoding(f"{bit_depth}-bit integer samples")

    if channels > 1:
        data = data.reshape(-1, channels).mean(axis=1)
    return data


def parse_wav(blob: bytes) -> AudioBuffer:
    """Decode an in-memory RIFF/WAVE image."""
    fid = io.BytesIO(blob)
    _read_riff_header(fid)

    fmt: tuple[int, int, int, int, int] | None = None
    samples: FloatArray | None = None

    while True:
        header = fid.read(8)
        if not header:
            break
        if len(header) < 8:
            raise MalformedWav("truncated chunk header")
        chunk_id, size = struct.unpack("<4sI", header)

        if chunk_id == b"fmt ":
            fmt = _read_fmt_chunk(fid, size)
        elif chunk_id == b"data":
            if fmt is None:
                raise MalformedWav("data chunk precedes fmt chunk")
            raw = _read_exact(fid, size, "data chunk")
            format_tag, channels, _rate, block_align, bit_depth = fmt
            samples = _decode_samples(raw, format_tag, channels, block_align, bit_depth)
        else:
            skipped = fid.read(size)
            if len(skipped) != size:
                raise MalformedWav(f"truncated {chunk_id!r} chunk")
        if size % 2:
            fid.read(1)

    if fmt is None:
        raise MalformedWav("missing fmt chunk")
    if samples is None:
        raise MalformedWav("missing data chunk")
    if samples.size == 0:
        raise EmptyAudio("data chunk holds zero samples")

    sample_rate = fmt[2]
    if sample_rate < MIN_SAMPLE_RATE:
        raise UnsupportedEncoding(
            f"sample rate {sample_rate} Hz is below {MIN_SAMPLE_RATE} Hz (resampling unsupported)"
        )
    return AudioBuffer(samples, sample_rate)


def load_wav(path: PathLike) -> AudioBuffer:
    """Read a PCM or IEEE-float WAV file into a normalized mono buffer."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(path), exc.strerror or str(exc)) from exc

    buffer = parse_wav(blob)
    logger.info(
        "Loaded wav",
        path=str(path),
        sample_rate=buffer.sample_rate,
        samples=len(buffer),
    )
    return buffer


# ============================================================================
# Framing
# ============================================================================


@lru_cache(maxsize=32)
def window_coefficients(kind: WindowKind, length: int) -> FloatArray:
    """Periodic window of the given kind (the DFT-even variant)."""
    if kind == WindowKind.RECTANGULAR:
        coefficients = np.ones(length, dtype=np.float64)
    else:
        coefficients = np.asarray(get_window(kind.value, length, fftbins=True), dtype=np.float64)
    coefficients.setflags(write=False)
    return coefficients


def frame_count(length: int, cfg: FrameConfig) -> int:
    if length < cfg.frame_length:
        return 0
    return (length - cfg.frame_length) // cfg.hop_length + 1


def frame_times(count: int, cfg: FrameConfig, sample_rate: int) -> FloatArray:
    """Start time of each frame in seconds."""
    return np.arange(count, dtype=np.float64) * cfg.hop_length / sample_rate


def frame_centers(count: int, cfg: FrameConfig, sample_rate: int) -> FloatArray:
    return frame_times(count, cfg, sample_rate) + cfg.frame_length / (2.0 * sample_rate)


def frames(buffer: AudioBuffer, cfg: FrameConfig) -> list[Frame]:
    """Slice the buffer into overlapping windowed frames."""
    bin_hz = buffer.sample_rate / cfg.frame_length
    if bin_hz > MAX_BIN_HZ:
        raise ConfigError(
            f"frame_length {cfg.frame_length} gives {bin_hz:.1f} Hz bins at "
            f"{buffer.sample_rate} Hz; need at most {MAX_BIN_HZ:g} Hz"
        )
    count = frame_count(len(buffer), cfg)
    if count == 0:
        raise BufferTooShort(len(buffer), cfg.frame_length)

    window = window_coefficients(cfg.window, cfg.frame_length)
    views = sliding_window_view(buffer.samples, cfg.frame_length)[:: cfg.hop_length][:count]
    starts = frame_times(count, cfg, buffer.sample_rate)

    return [
        Frame(
            index=i,
            start_time=float(starts[i]),
            samples=views[i] * window,
            sample_rate=buffer.sample_rate,
        )
        for i in range(count)
    ]
