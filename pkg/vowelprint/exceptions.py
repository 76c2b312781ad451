"""Error hierarchy for vowelprint.

Every failure the library signals derives from ``VowelprintError`` so the CLI
can map the whole family onto exit status 2 with a one-line diagnostic.
Messages start with a short lowercase phrase that stays stable across releases.
"""


class VowelprintError(Exception):
    """Base class for all vowelprint errors."""


# ============================================================================
# Audio input / output
# ============================================================================


class MalformedWav(VowelprintError):
    """RIFF/WAVE structure is broken (bad magic, truncated or missing chunks)."""

    def __init__(self, detail: str) -> None:
        super().__init__(f"malformed wav: {detail}")


class UnsupportedEncoding(VowelprintError):
    """The WAV is well-formed but uses an encoding we do not decode."""

    def __init__(self, detail: str) -> None:
        super().__init__(f"unsupported encoding: {detail}")


class EmptyAudio(VowelprintError):
    """Zero samples to read or write."""

    def __init__(self, detail: str = "no samples") -> None:
        super().__init__(f"empty audio: {detail}")


class IoFailure(VowelprintError):
    """The filesystem refused a read or write."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"io failure: {path}: {reason}")
        self.path = path


class BufferTooShort(VowelprintError):
    def __init__(self, length: int, frame_length: int) -> None:
        super().__init__(
            f"buffer too short: {length} samples, need at least {frame_length}"
        )


# ============================================================================
# Spectral / pitch / harmonics
# ============================================================================


class EmptyBand(VowelprintError):
    """No local maximum inside the requested band.

    This is a regular outcome for silent or sparse spectra; callers usually
    catch it and record the band as empty.
    """

    def __init__(self, band_lo: float, band_hi: float) -> None:
        super().__init__(f"empty band: no peak in [{band_lo:g}, {band_hi:g}] Hz")
        self.band_lo = band_lo
        self.band_hi = band_hi


class BandNotCovered(VowelprintError):
    def __init__(self, needed_hz: float, nyquist_hz: float) -> None:
        super().__init__(
            f"band not covered: need {needed_hz:g} Hz, nyquist is {nyquist_hz:g} Hz"
        )


class Unvoiced(VowelprintError):
    def __init__(self) -> None:
        super().__init__("unvoiced: pitch estimate has no f0")


class HarmonicAboveNyquist(VowelprintError):
    def __init__(self, k: int, frequency_hz: float, nyquist_hz: float) -> None:
        super().__init__(
            f"harmonic above nyquist: k={k} at {frequency_hz:g} Hz > {nyquist_hz:g} Hz"
        )


class LengthMismatch(VowelprintError):
    def __init__(self, left: int, right: int) -> None:
        super().__init__(f"length mismatch: {left} pitch frames vs {right} harmonic frames")


# ============================================================================
# Classification
# ============================================================================


class UnvoicedFrame(VowelprintError):
    def __init__(self) -> None:
        super().__init__("unvoiced frame: cannot classify a frame without voicing")


class NoVoicedFrames(VowelprintError):
    def __init__(self) -> None:
        super().__init__("no voiced frames: nothing to classify")


class TrendUnavailable(VowelprintError):
    def __init__(self) -> None:
        super().__init__("trend unavailable: fewer than 3 voiced frames with an upper peak")


class UnknownSound(VowelprintError):
    def __init__(self, label: str) -> None:
        super().__init__(f"unknown sound: {label!r} is not in the correspondence table")
        self.label = label


class UnknownVowel(VowelprintError):
    def __init__(self, label: str) -> None:
        super().__init__(f"unknown vowel: {label!r} has no template")
        self.label = label


class TemplateFileError(VowelprintError):
    def __init__(self, path: str, line: int, reason: str) -> None:
        super().__init__(f"template file error: {path}:{line}: {reason}")


# ============================================================================
# Synthesis / configuration
# ============================================================================


class InvalidSpec(VowelprintError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"invalid spec: {detail}")


class ConfigError(VowelprintError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"config error: {detail}")
