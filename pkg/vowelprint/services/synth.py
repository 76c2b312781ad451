"""Synthetic test signals and WAV output.

Signals are additive harmonic series. Each harmonic k gets the amplitude

    a_k(t) = sum_j gain_j * exp(-(k f0(t) - centre_j(t))^2 / (2 bandwidth_j^2))

so harmonic amplitudes are known in closed form. Formant centres may sweep
linearly or along a sine arc (centre -> target -> centre) over the duration.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np
import structlog

from vowelprint.exceptions import EmptyAudio, InvalidSpec, IoFailure, UnknownVowel
from vowelprint.models.schemas import Dominance, FrequencyRange, UpShape, VowelTemplate
from vowelprint.models.signals import MIN_SAMPLE_RATE, AudioBuffer, FloatArray
from vowelprint.services.classifier import builtin_templates, normalize_vowel

logger = structlog.get_logger()

PEAK_LEVEL = 0.9

# Broad bump that keeps every harmonic audible so F0 stays observable.
SOURCE_BANDWIDTH = 2500.0
SOURCE_GAIN = 0.1

PRIMARY_GAIN = 1.0
SECONDARY_GAIN = 0.5
PLACEMENT_TOLERANCE_HZ = 25.0

# Placed harmonics keep this far inside their template range.
EDGE_MARGIN_HZ = 1.0
# F0 may be nudged in steps of 0.25% up to 5% to find such a layout.
F0_NUDGE = 0.0025
F0_NUDGE_STEPS = 20

# Harmonics placed by render_vowel keep clear of the 750 Hz band edge.
LOWER_INTERIOR = FrequencyRange(lo=60.0, hi=740.0)
UPPER_INTERIOR = FrequencyRange(lo=760.0, hi=2490.0)

PathLike = Union[str, Path]


class Sweep(str, Enum):
    LINEAR = "linear"
    ARC = "arc"


@dataclass(frozen=True)
class FormantPeak:
    """Gaussian amplitude bump, optionally moving towards `target`."""

    center: float
    bandwidth: float
    gain: float
    target: Optional[float] = None
    sweep: Sweep = Sweep.LINEAR

    def centers(self, t: FloatArray, duration: float) -> FloatArray:
        if self.target is None:
            return np.full_like(t, self.center)
        if self.sweep == Sweep.ARC:
            return self.center + (self.target - self.center) * np.sin(np.pi * t / duration)
        return self.center + (self.target - self.center) * t / duration


@dataclass(frozen=True)
class SynthSpec:
    f0_start: float
    f0_end: float
    duration: float
    sample_rate: int = 16000
    formant_peaks: tuple[FormantPeak, ...] = ()
    noise_level: float = 0.0
    seed: int = 0


def _validate(spec: SynthSpec) -> None:
    if int(spec.sample_rate) != spec.sample_rate or spec.sample_rate < MIN_SAMPLE_RATE:
        raise InvalidSpec(f"sample_rate must be an integer >= {MIN_SAMPLE_RATE}")
    nyquist = spec.sample_rate / 2.0
    if not spec.duration > 0.0:
        raise InvalidSpec(f"duration must be positive, got {spec.duration}")
    for name, f0 in (("f0_start", spec.f0_start), ("f0_end", spec.f0_end)):
        if not 0.0 < f0 <= nyquist / 4.0:
            raise InvalidSpec(f"{name} must lie in (0, {nyquist / 4.0:g}] Hz, got {f0}")
    for peak in spec.formant_peaks:
        for edge in (peak.center, peak.target if peak.target is not None else peak.center):
            if not edge < nyquist:
                raise InvalidSpec(f"formant centre {edge} Hz is not below nyquist {nyquist:g} Hz")
        if not peak.bandwidth > 0.0:
            raise InvalidSpec(f"formant bandwidth must be positive, got {peak.bandwidth}")
        if peak.gain < 0.0:
            raise InvalidSpec(f"formant gain must be non-negative, got {peak.gain}")
    if spec.noise_level < 0.0:
        raise InvalidSpec(f"noise_level must be non-negative, got {spec.noise_level}")
    if round(spec.duration * spec.sample_rate) < 1:
        raise InvalidSpec("duration is shorter than one sample")


def render(spec: SynthSpec) -> AudioBuffer:
    """Additive synthesis of a SynthSpec, peak-normalized to 0.9.

    Raises:
        InvalidSpec: the request breaks one of its invariants.
    """
    _validate(spec)
    n = int(round(spec.duration * spec.sample_rate))
    nyquist = spec.sample_rate / 2.0
    t = np.arange(n, dtype=np.float64) / spec.sample_rate

    glide = (spec.f0_end - spec.f0_start) / spec.duration
    f0 = spec.f0_start + glide * t
    phase = spec.f0_start * t + 0.5 * glide * t**2

    centers = [peak.centers(t, spec.duration) for peak in spec.formant_peaks]
    samples = np.zeros(n, dtype=np.float64)
    if spec.formant_peaks:
        for k in range(1, int(nyquist // min(spec.f0_start, spec.f0_end)) + 1):
            fk = k * f0
            amplitude = np.zeros(n, dtype=np.float64)
            for peak, center in zip(spec.formant_peaks, centers):
                amplitude += peak.gain * np.exp(-((fk - center) ** 2) / (2.0 * peak.bandwidth**2))
            samples += np.where(fk < nyquist, amplitude, 0.0) * np.sin(2.0 * np.pi * k * phase)

    if spec.noise_level > 0.0:
        rng = np.random.default_rng(spec.seed)
        samples += spec.noise_level * rng.uniform(-1.0, 1.0, n)

    peak_value = float(np.max(np.abs(samples)))
    if peak_value > 0.0:
        samples *= PEAK_LEVEL / peak_value
    return AudioBuffer(samples, spec.sample_rate)


# ============================================================================
# Vowel oracle
# ============================================================================


def _inside(rng: FrequencyRange, frequency: float, margin: float) -> bool:
    return rng.lo + margin <= frequency <= rng.hi - margin


def _place(
    f0: float,
    target: FrequencyRange,
    interior: FrequencyRange,
    step: Optional[int] = None,
    require_secondary: bool = False,
    strict: bool = True,
) -> Optional[tuple[int, Optional[int]]]:
    """Harmonic index nearest the range midpoint, plus its secondary neighbour.

    Strict candidates sit at least EDGE_MARGIN_HZ inside the range; None when
    there is none (or, with require_secondary, none whose neighbour k+step
    sits in the interior). Loose placement widens the range by
    PLACEMENT_TOLERANCE_HZ and falls back to the interior harmonic nearest
    the midpoint. Ties go to the lower harmonic.
    """
    top = int(interior.hi // f0)
    interior_ks = [k for k in range(1, top + 1) if interior.contains(k * f0)]

    def secondary(k: int) -> Optional[int]:
        if step is None:
            return None
        other = k + step
        return other if other >= 1 and interior.contains(other * f0) else None

    if strict:
        in_range = [k for k in interior_ks if _inside(target, k * f0, EDGE_MARGIN_HZ)]
    else:
        in_range = [k for k in interior_ks if target.contains(k * f0, PLACEMENT_TOLERANCE_HZ)]
    with_secondary = [k for k in in_range if secondary(k) is not None]

    if require_secondary and step is not None:
        pool = with_secondary
    else:
        pool = with_secondary or in_range
    if not pool and not strict:
        pool = interior_ks or [max(1, round(target.midpoint / f0))]
    if not pool:
        return None
    chosen = min(pool, key=lambda k: (abs(k * f0 - target.midpoint), k))
    return chosen, secondary(chosen)


def _harmonic_bump(k: int, f0: float, gain: float) -> FormantPeak:
    return FormantPeak(center=k * f0, bandwidth=f0 / 4.0, gain=gain)


def _template(label: str) -> VowelTemplate:
    wanted = normalize_vowel(label)
    for template in builtin_templates():
        if template.label == wanted:
            return template
    raise UnknownVowel(wanted)


def _f0_candidates(f0: float) -> list[float]:
    """f0 first, then alternately nudged down and up in F0_NUDGE steps."""
    candidates = [f0]
    for j in range(1, F0_NUDGE_STEPS + 1):
        candidates += [f0 * (1.0 - j * F0_NUDGE), f0 * (1.0 + j * F0_NUDGE)]
    return candidates


def _layout(
    template: VowelTemplate, f0: float, require_secondary: bool, strict: bool
) -> Optional[list[FormantPeak]]:
    """Harmonic bumps realizing the template at f0, or None when a range has no harmonic."""
    up1_range = template.up1_range
    if up1_range is None:
        raise UnknownVowel(template.label)

    def place(
        target: FrequencyRange, interior: FrequencyRange, step: Optional[int] = None
    ) -> Optional[tuple[int, Optional[int]]]:
        return _place(f0, target, interior, step, require_secondary, strict)

    peaks = [FormantPeak(center=0.0, bandwidth=SOURCE_BANDWIDTH, gain=SOURCE_GAIN)]

    step = 1 if template.low_dominance == Dominance.FIRST_OVER_SECOND else -1
    low = place(template.low_range, LOWER_INTERIOR, step)
    if low is None:
        return None
    peaks.append(_harmonic_bump(low[0], f0, PRIMARY_GAIN))
    if low[1] is not None:
        peaks.append(_harmonic_bump(low[1], f0, SECONDARY_GAIN))

    if template.up_shape == UpShape.CONVEX_UP:
        peaks.append(
            FormantPeak(
                center=up1_range.lo,
                bandwidth=f0 / 2.0,
                gain=PRIMARY_GAIN,
                target=up1_range.hi,
                sweep=Sweep.ARC,
            )
        )
    elif template.up_shape == UpShape.SECOND_OVER_FIRST:
        up = place(up1_range, UPPER_INTERIOR, -1)
        if up is None:
            return None
        peaks.append(_harmonic_bump(up[0], f0, PRIMARY_GAIN))
        if up[1] is not None:
            peaks.append(_harmonic_bump(up[1], f0, SECONDARY_GAIN))
    else:
        up1 = place(up1_range, UPPER_INTERIOR)
        if up1 is None:
            return None
        peaks.append(_harmonic_bump(up1[0], f0, PRIMARY_GAIN))
        if template.up2_range is not None:
            up2 = place(template.up2_range, UPPER_INTERIOR)
            if up2 is None:
                return None
            if up2[0] != up1[0]:
                peaks.append(_harmonic_bump(up2[0], f0, SECONDARY_GAIN))
    return peaks


def vowel_spec(label: str, f0: float, duration: float, sample_rate: int = 16000) -> SynthSpec:
    """SynthSpec realizing a template near its range midpoints.

    Every placed harmonic sits strictly inside its template range. When no
    harmonic of f0 does, F0 is nudged by up to F0_NUDGE * F0_NUDGE_STEPS of
    its value; layouts with a secondary harmonic for every dominance relation
    are preferred. Only when no nudge helps are ranges widened at the
    requested f0.

    Raises:
        UnknownVowel: label is not one of the six template vowels.
        InvalidSpec: f0 is not positive.
    """
    template = _template(label)
    if not f0 > 0.0:
        raise InvalidSpec(f"f0 must be positive, got {f0}")

    chosen_f0 = f0
    peaks: Optional[list[FormantPeak]] = None
    for require_secondary in (True, False):
        for candidate in _f0_candidates(f0):
            peaks = _layout(template, candidate, require_secondary, strict=True)
            if peaks is not None:
                chosen_f0 = candidate
                break
        if peaks is not None:
            break
    if peaks is None:
        peaks = _layout(template, f0, require_secondary=False, strict=False)
        logger.debug("Placed vowel loosely", label=template.label, f0=f0)
    if peaks is None:
        raise InvalidSpec(f"no harmonic layout for {template.label} at {f0:g} Hz")

    return SynthSpec(
        f0_start=chosen_f0,
        f0_end=chosen_f0,
        duration=duration,
        sample_rate=sample_rate,
        formant_peaks=tuple(peaks),
    )


def render_vowel(label: str, f0: float, duration: float, sample_rate: int = 16000) -> AudioBuffer:
    """Render a steady (or, for [ы], arc-swept) vowel matching its template."""
    buffer = render(vowel_spec(label, f0, duration, sample_rate))
    logger.debug("Rendered vowel", label=label, f0=f0, duration=duration)
    return buffer


def with_noise(spec: SynthSpec, noise_level: float, seed: int) -> SynthSpec:
    return replace(spec, noise_level=noise_level, seed=seed)


# ============================================================================
# WAV output
# ============================================================================


def encode_wav(buffer: AudioBuffer) -> bytes:
    """16-bit PCM mono RIFF/WAVE image of the buffer."""
    if len(buffer) == 0:
        raise EmptyAudio("refusing to write a zero-length buffer")
    pcm = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767).astype("<i2")
    data = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(data),
        b"WAVE",
        b"fmt ",
        16,
        1,
        1,
        buffer.sample_rate,
        buffer.sample_rate * 2,
        2,
        16,
        b"data",
        len(data),
    )
    return header + data


def write_wav(buffer: AudioBuffer, path: PathLike) -> Path:
    """Write the buffer as 16-bit PCM mono.

    Raises:
        EmptyAudio: the buffer has no samples.
        IoFailure: the file cannot be written.
    """
    blob = encode_wav(buffer)
    target = Path(path)
    try:
        target.write_bytes(blob)
    except OSError as exc:
        raise IoFailure(str(target), exc.strerror or str(exc)) from exc
    logger.info("Wrote wav", path=str(target), samples=len(buffer), bytes=len(blob))
    return target


def harmonic_amplitudes(spec: SynthSpec, t: float = 0.0) -> FloatArray:
    """a_k at time t for k = 1.. up to nyquist (index 0 is k = 1)."""
    f0 = spec.f0_start + (spec.f0_end - spec.f0_start) * t / spec.duration
    count = int(math.floor((spec.sample_rate / 2.0) / f0))
    ks = np.arange(1, count + 1, dtype=np.float64)
    moment = np.array([t])
    amplitudes = np.zeros(count, dtype=np.float64)
    for peak in spec.formant_peaks:
        center = float(peak.centers(moment, spec.duration)[0])
        amplitudes += peak.gain * np.exp(-((ks * f0 - center) ** 2) / (2.0 * peak.bandwidth**2))
    return amplitudes
