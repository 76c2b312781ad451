"""Tests for F0 estimation, voicing, track statistics and harmonic ratios."""

import numpy as np
import pytest

from vowelprint.exceptions import BandNotCovered, HarmonicAboveNyquist, Unvoiced
from vowelprint.models.schemas import FrameConfig, PitchConfig, PitchEstimate, PitchTrack
from vowelprint.models.signals import AudioBuffer, FrameSpectrum
from vowelprint.services.pitch import estimate_pitch, harmonic_ratio, track, voicing_ratio
from vowelprint.services.signal_io import frames
from vowelprint.services.spectral import spectrum
from vowelprint.services.synth import FormantPeak, SynthSpec, harmonic_amplitudes, render
from vowelprint.tests.conftest import SAMPLE_RATE

ONE_FRAME = 4096 / SAMPLE_RATE
BROAD_SOURCE = FormantPeak(center=0.0, bandwidth=2500.0, gain=1.0)
LOW_SOURCE = FormantPeak(center=0.0, bandwidth=600.0, gain=1.0)
GLIDE_FRAMES = FrameConfig(frame_length=2048, hop_length=256)


def _first_spectrum(buffer: AudioBuffer) -> FrameSpectrum:
    return spectrum(frames(buffer, FrameConfig())[0])


def _harmonic_signal(f0: float, *peaks: FormantPeak) -> AudioBuffer:
    spec = SynthSpec(
        f0_start=f0,
        f0_end=f0,
        duration=ONE_FRAME,
        sample_rate=SAMPLE_RATE,
        formant_peaks=peaks or (BROAD_SOURCE,),
    )
    return render(spec)


def _series(f0: float, amplitudes: dict[int, float]) -> AudioBuffer:
    """One frame of sum(a_k sin(2 pi k f0 t)) peak-normalized to 0.9."""
    t = np.arange(4096) / SAMPLE_RATE
    samples = sum(a * np.sin(2 * np.pi * k * f0 * t) for k, a in amplitudes.items())
    return AudioBuffer(0.9 * samples / np.max(np.abs(samples)), SAMPLE_RATE)


def _glide_track(scale: float = 1.0) -> PitchTrack:
    """Track of a 120 -> 180 Hz glide over one second, framed short enough to follow it."""
    spec = SynthSpec(120.0, 180.0, 1.0, SAMPLE_RATE, (LOW_SOURCE,))
    buffer = render(spec).scaled(scale)
    cfg = PitchConfig()
    estimates = [estimate_pitch(spectrum(frame), cfg) for frame in frames(buffer, GLIDE_FRAMES)]
    return track(estimates, GLIDE_FRAMES.hop_length / SAMPLE_RATE)


class TestEstimatePitch:
    """F0 from the log harmonic product spectrum."""

    def test_accuracy_over_random_signals(self, rng):
        cfg = PitchConfig()
        bin_hz = SAMPLE_RATE / 4096
        within_bin = 0
        octave_errors = 0
        trials = 200
        for f0 in rng.uniform(80.0, 320.0, trials):
            est = estimate_pitch(_first_spectrum(_harmonic_signal(float(f0))), cfg)
            assert est.voiced
            error = abs(est.f0 - f0)
            within_bin += error <= bin_hz
            octave_errors += abs(est.f0 / f0 - 1.0) > 0.25

        assert octave_errors == 0
        assert within_bin >= 0.99 * trials

    def test_weak_fundamental_survives_octave_check(self):
        # Weak fundamental: the HPS maximum can land on 2 * f0 until the octave check.
        peaks = (
            FormantPeak(center=600.0, bandwidth=250.0, gain=1.0),
            FormantPeak(center=1500.0, bandwidth=400.0, gain=0.6),
        )
        est = estimate_pitch(_first_spectrum(_harmonic_signal(150.0, *peaks)), PitchConfig())

        assert est.voiced
        assert est.f0 == pytest.approx(150.0, abs=SAMPLE_RATE / 4096)

    def test_silence_is_unvoiced(self):
        silence = AudioBuffer(np.zeros(4096), SAMPLE_RATE)
        est = estimate_pitch(_first_spectrum(silence), PitchConfig())

        assert est == PitchEstimate()

    def test_white_noise_is_unvoiced(self):
        buffer = render(SynthSpec(f0_start=150.0, f0_end=150.0, duration=1.0, noise_level=0.5))
        cfg = PitchConfig()

        for frame in frames(buffer, FrameConfig()):
            est = estimate_pitch(spectrum(frame), cfg)
            assert not est.voiced
            assert est.f0 is None
            assert est.voicing_ratio < cfg.voicing_threshold

    def test_voicing_ratio_of_clean_harmonics_is_high(self):
        spec = _first_spectrum(_harmonic_signal(125.0))

        assert voicing_ratio(spec, 125.0, PitchConfig()) > 0.9

    def test_voicing_is_monotone_in_noise(self):
        clean = _harmonic_signal(125.0).samples
        noise = np.random.default_rng(3).uniform(-1.0, 1.0, clean.size)
        cfg = PitchConfig()

        ratios, voiced = [], []
        for level in (0.0, 0.05, 0.2, 0.8, 3.2):
            mixed = clean + level * noise
            spec = _first_spectrum(AudioBuffer(0.9 * mixed / np.max(np.abs(mixed)), SAMPLE_RATE))
            ratios.append(voicing_ratio(spec, 125.0, cfg))
            voiced.append(estimate_pitch(spec, cfg).voiced)

        assert ratios == sorted(ratios, reverse=True)
        assert len(set(ratios)) == len(ratios)
        assert voiced[0]
        assert voiced == sorted(voiced, reverse=True)

    def test_scaling_keeps_estimate(self):
        spec = _first_spectrum(_harmonic_signal(173.0))
        loud = estimate_pitch(spec, PitchConfig())
        quiet = estimate_pitch(spec.scaled(0.05), PitchConfig())

        assert quiet.f0 == pytest.approx(loud.f0)
        assert quiet.intensity == pytest.approx(0.05 * loud.intensity)
        assert quiet.voicing_ratio == pytest.approx(loud.voicing_ratio)

    def test_band_not_covered(self):
        spec = FrameSpectrum(np.ones(65), bin_hz=5.0, frame_index=0, frame_length=128)

        with pytest.raises(BandNotCovered):
            estimate_pitch(spec, PitchConfig())

    def test_voiced_requires_f0(self):
        with pytest.raises(ValueError):
            PitchEstimate(voiced=True)


class TestTrack:
    """Track statistics over voiced frames only."""

    def test_statistics(self):
        estimates = [
            PitchEstimate(f0=100.0, intensity=1.0, voiced=True, voicing_ratio=0.9),
            PitchEstimate(),
            PitchEstimate(f0=120.0, intensity=2.0, voiced=True, voicing_ratio=0.9),
            PitchEstimate(f0=130.0, intensity=2.5, voiced=True, voicing_ratio=0.9),
        ]
        result = track(estimates, hop_seconds=0.1)

        assert result.voiced_frames == 3
        assert result.f0_mean == pytest.approx(350.0 / 3)
        assert result.f0_deviation == pytest.approx(np.std([100.0, 120.0, 130.0]))
        assert result.f0_slope == pytest.approx(100.0)
        assert result.intensity_slope == pytest.approx(5.0)
        assert len(result.estimates) == 4

    def test_too_few_voiced_frames(self):
        estimates = [PitchEstimate(), PitchEstimate(f0=100.0, intensity=1.0, voiced=True)]
        result = track(estimates, hop_seconds=0.1)

        assert result.voiced_frames == 1
        assert result.f0_mean is None
        assert result.f0_slope is None
        assert result.stats().voiced_frames == 1

    def test_empty_track(self):
        with pytest.raises(ValueError):
            track([], hop_seconds=0.1)

    def test_glide_slope(self):
        result = _glide_track()

        assert result.voiced_frames > len(result.estimates) // 2
        assert result.f0_slope == pytest.approx(60.0, rel=0.05)

    def test_scaling_touches_only_intensity_slope(self):
        loud = _glide_track()
        quiet = _glide_track(0.2)

        assert quiet.voiced_frames == loud.voiced_frames
        assert quiet.f0_mean == pytest.approx(loud.f0_mean)
        assert quiet.f0_deviation == pytest.approx(loud.f0_deviation)
        assert quiet.f0_slope == pytest.approx(loud.f0_slope)
        assert quiet.intensity_slope == pytest.approx(0.2 * loud.intensity_slope)


class TestHarmonicRatio:
    """Ratios against the closed-form synth amplitudes."""

    def test_ratios_follow_synth_amplitudes(self):
        # 125 Hz sits exactly on bin 32, so every harmonic is bin-centred.
        peaks = (
            FormantPeak(center=0.0, bandwidth=2500.0, gain=0.1),
            FormantPeak(center=450.0, bandwidth=100.0, gain=1.0),
        )
        spec_in = SynthSpec(125.0, 125.0, ONE_FRAME, SAMPLE_RATE, peaks)
        spec = _first_spectrum(render(spec_in))
        est = estimate_pitch(spec, PitchConfig())
        amplitudes = harmonic_amplitudes(spec_in)

        assert est.f0 == pytest.approx(125.0, abs=0.1)
        for k in (2, 3, 4):
            expected = amplitudes[k - 1] / amplitudes[0]
            assert harmonic_ratio(spec, est, k) == pytest.approx(expected, rel=0.05)

    def test_unvoiced_estimate(self):
        spec = _first_spectrum(_harmonic_signal(125.0))

        with pytest.raises(Unvoiced):
            harmonic_ratio(spec, PitchEstimate(), 2)

    def test_inverse_k_profile(self):
        spec = _first_spectrum(_series(125.0, {k: 1.0 / k for k in range(1, 21)}))
        est = estimate_pitch(spec, PitchConfig())

        assert est.voiced
        assert harmonic_ratio(spec, est, 2) == pytest.approx(0.5, rel=0.05)

    def test_missing_harmonic_gives_zero(self):
        spec = _first_spectrum(_series(125.0, {k: 1.0 for k in range(1, 11) if k != 3}))
        est = PitchEstimate(
            f0=125.0, intensity=float(spec.magnitudes[32]), voiced=True, voicing_ratio=0.9
        )

        assert harmonic_ratio(spec, est, 3) == 0.0
        assert harmonic_ratio(spec, est, 4) == pytest.approx(1.0, rel=0.01)

    def test_above_nyquist(self):
        spec = _first_spectrum(_harmonic_signal(125.0))
        est = PitchEstimate(f0=125.0, intensity=1.0, voiced=True, voicing_ratio=0.9)

        with pytest.raises(HarmonicAboveNyquist):
            harmonic_ratio(spec, est, 100)

    def test_fundamental_index_is_rejected(self):
        spec = _first_spectrum(_harmonic_signal(125.0))
        est = PitchEstimate(f0=125.0, intensity=1.0, voiced=True, voicing_ratio=0.9)

        with pytest.raises(ValueError):
            harmonic_ratio(spec, est, 1)
