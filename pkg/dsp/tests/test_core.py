import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from dsp.core import (
    ComplexBlock,
    DualPolWaveform,
    QuadTributaryCapture,
    fractional_delay,
    frequency_shift,
    matched_filter,
    resample,
    rrc_shape,
    rrc_taps,
)
from dsp.errors import AliasingError, DspError, NyquistViolation, SampleRateMismatch

FS = 1e9


def _random_complex(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def _rrc_reference(t, beta):
    """Fórmula cerrada del RRC evaluada punto a punto."""
    if t == 0:
        return 1 + beta * (4 / np.pi - 1)
    if beta > 0 and abs(abs(t) - 1 / (4 * beta)) < 1e-12:
        return beta / np.sqrt(2) * (
            (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
            + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
        )
    num = np.sin(np.pi * t * (1 - beta)) + 4 * beta * t * np.cos(np.pi * t * (1 + beta))
    return num / (np.pi * t * (1 - (4 * beta * t) ** 2))


class ValueTypesTests(SimpleTestCase):

    def test_block_rejects_non_finite_values(self):
        with self.assertRaises(DspError):
            ComplexBlock(np.array([1.0, np.nan]), FS)

    def test_block_rejects_bad_rate(self):
        with self.assertRaises(DspError):
            ComplexBlock(np.ones(4), 0)

    def test_block_is_read_only(self):
        block = ComplexBlock(np.ones(4), FS)
        with self.assertRaises(ValueError):
            block.samples[0] = 2

    def test_dual_pol_requires_common_rate(self):
        with self.assertRaises(SampleRateMismatch):
            DualPolWaveform(ComplexBlock(np.ones(4), FS), ComplexBlock(np.ones(4), 2 * FS))

    def test_dual_pol_requires_equal_length(self):
        with self.assertRaises(DspError):
            DualPolWaveform.from_arrays(np.ones(4), np.ones(5), FS)

    def test_quad_capture_requires_equal_length(self):
        with self.assertRaises(DspError):
            QuadTributaryCapture(np.ones(4), np.ones(4), np.ones(4), np.ones(3), FS)


class FrequencyShiftTests(SimpleTestCase):

    def test_zero_shift_returns_same_block(self):
        block = ComplexBlock(_random_complex(64), FS)
        self.assertIs(frequency_shift(block, 0), block)

    def test_tone_peak_moves(self):
        n = 1024
        block = ComplexBlock(np.exp(2j * np.pi * 10 * np.arange(n) / n), FS)
        shifted = frequency_shift(block, 5 * FS / n)
        self.assertEqual(int(np.argmax(np.abs(np.fft.fft(shifted.samples)))), 15)

    def test_shift_and_back(self):
        block = ComplexBlock(_random_complex(512), FS)
        back = frequency_shift(frequency_shift(block, 0.123 * FS), -0.123 * FS)
        self.assertLess(np.max(np.abs(back.samples - block.samples)), 1e-12)

    def test_power_preserved(self):
        block = ComplexBlock(_random_complex(512), FS)
        self.assertAlmostEqual(frequency_shift(block, 0.3 * FS).power, block.power, places=12)

    def test_beyond_nyquist_rejected(self):
        with self.assertRaises(NyquistViolation):
            frequency_shift(ComplexBlock(np.ones(8), FS), FS / 2)


class FractionalDelayTests(SimpleTestCase):

    def test_zero_delay_is_identity(self):
        x = _random_complex(128)
        np.testing.assert_array_equal(fractional_delay(x, 0.0, FS), x)

    def test_integer_delay_is_circular_shift(self):
        x = _random_complex(512)
        np.testing.assert_allclose(fractional_delay(x, 3 / FS, FS), np.roll(x, 3), atol=1e-10)

    def test_integer_delay_on_real_stream(self):
        x = np.random.default_rng(4).normal(size=512)
        out = fractional_delay(x, 7 / FS, FS)
        self.assertTrue(np.isrealobj(out))
        np.testing.assert_allclose(out, np.roll(x, 7), atol=1e-10)

    def test_cosine_phase_shift(self):
        fs, f1, n, tau = 100e9, 2e9, 1000, 3.7e-12
        t = np.arange(n) / fs
        out = fractional_delay(np.cos(2 * np.pi * f1 * t), tau, fs)
        np.testing.assert_allclose(out, np.cos(2 * np.pi * f1 * (t - tau)), atol=1e-10)

        k = int(f1 * n / fs)
        shift = np.angle(np.fft.fft(out)[k]) - np.angle(np.fft.fft(np.cos(2 * np.pi * f1 * t))[k])
        self.assertAlmostEqual(shift, -2 * np.pi * f1 * tau, places=9)

    def test_block_input_keeps_rate(self):
        block = ComplexBlock(_random_complex(64), FS)
        out = fractional_delay(block, 0.25 / FS)
        self.assertIsInstance(out, ComplexBlock)
        self.assertEqual(out.sample_rate, FS)

    def test_array_without_rate_rejected(self):
        with self.assertRaises(DspError):
            fractional_delay(np.ones(8), 1e-12)

    @settings(deadline=None, max_examples=30)
    @given(
        tau=st.floats(-50e-12, 50e-12),
        a=st.floats(-3, 3),
        b=st.floats(-3, 3),
    )
    def test_linearity(self, tau, a, b):
        u, v = _random_complex(256, 1), _random_complex(256, 2)
        fs = 100e9
        lhs = fractional_delay(a * u + b * v, tau, fs)
        rhs = a * fractional_delay(u, tau, fs) + b * fractional_delay(v, tau, fs)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    @settings(deadline=None, max_examples=30)
    @given(tau1=st.floats(-50e-12, 50e-12), tau2=st.floats(-50e-12, 50e-12))
    def test_composition(self, tau1, tau2):
        x = _random_complex(256, 3)
        fs = 100e9
        twice = fractional_delay(fractional_delay(x, tau1, fs), tau2, fs)
        np.testing.assert_allclose(twice, fractional_delay(x, tau1 + tau2, fs), atol=1e-10)


class RrcTests(SimpleTestCase):

    def test_impulse_matches_closed_form(self):
        sps, beta = 8, 0.1
        symbols = np.zeros(64)
        symbols[32] = 1
        out = rrc_shape(symbols, beta, sps, 1e9).samples
        reference = np.array([_rrc_reference(i / sps, beta) for i in range(-128, 129)])
        reference /= np.sqrt(np.sum(reference ** 2))
        np.testing.assert_allclose(out[256 - 128:256 + 129].real, reference, atol=1e-9)

    def test_tap_count_and_energy(self):
        taps = rrc_taps(0.1, 8)
        self.assertEqual(taps.size, 32 * 8 + 1)
        self.assertAlmostEqual(np.sum(taps ** 2), 1.0, places=12)

    def test_cascade_has_no_intersymbol_interference(self):
        sps = 8
        taps = rrc_taps(0.1, sps)
        cascade = np.convolve(taps, taps[::-1])
        center = cascade.size // 2
        for k in range(1, 9):
            self.assertLess(abs(cascade[center + k * sps]), 1e-3 * cascade[center])
            self.assertLess(abs(cascade[center - k * sps]), 1e-3 * cascade[center])

    def test_rolloff_widens_occupied_band(self):
        def edge(beta):
            spectrum = np.abs(np.fft.fft(rrc_taps(beta, 8), 2 ** 16)) ** 2
            spectrum /= spectrum[0]
            below = np.nonzero(spectrum[:2 ** 15] < 0.01)[0]
            return below[0]

        ratio = edge(0.1) / edge(0.0)
        self.assertGreater(ratio, 1.03)
        self.assertLess(ratio, 1.15)

    def test_output_energy_matches_symbol(self):
        symbols = np.zeros(64, dtype=complex)
        symbols[32] = 1 + 1j
        out = rrc_shape(symbols, 0.1, 4, 1e9)
        self.assertAlmostEqual(np.sum(np.abs(out.samples) ** 2), 2.0, places=9)

    def test_matched_filter_recovers_symbols(self):
        rng = np.random.default_rng(7)
        symbols = rng.choice([-1, 1], 256) + 1j * rng.choice([-1, 1], 256)
        shaped = rrc_shape(symbols, 0.1, 4, 1e9)
        recovered = matched_filter(shaped, 0.1, 4).samples[::4]
        np.testing.assert_allclose(recovered[20:-20], symbols[20:-20], atol=5e-2)

    def test_rolloff_out_of_range(self):
        with self.assertRaises(DspError):
            rrc_taps(1.5, 4)


class ResampleTests(SimpleTestCase):

    def test_same_rate_is_identity(self):
        block = ComplexBlock(_random_complex(100), FS)
        self.assertIs(resample(block, FS), block)

    def test_tone_frequency_preserved(self):
        fs, n, f0 = 10e9, 1000, 1e9
        block = ComplexBlock(np.exp(2j * np.pi * f0 * np.arange(n) / fs), fs)
        up = resample(block, 15e9)
        self.assertEqual(len(up), 1500)
        freqs = np.fft.fftfreq(len(up), d=1 / up.sample_rate)
        peak = freqs[np.argmax(np.abs(np.fft.fft(up.samples)))]
        self.assertLessEqual(abs(peak - f0), up.sample_rate / len(up))

    def test_round_trip(self):
        fs, n = 10e9, 1000
        spectrum = np.fft.fft(_random_complex(n, 5))
        spectrum[np.abs(np.fft.fftfreq(n, d=1 / fs)) > 3e9] = 0
        block = ComplexBlock(np.fft.ifft(spectrum), fs)
        back = resample(resample(block, 20e9), fs)
        self.assertLess(np.max(np.abs(back.samples[50:-50] - block.samples[50:-50])), 1e-6)

    def test_aliasing_rejected(self):
        block = ComplexBlock(_random_complex(1000), 10e9)
        with self.assertRaises(AliasingError):
            resample(block, 5e9)

    def test_non_integer_length_rejected(self):
        with self.assertRaises(DspError):
            resample(ComplexBlock(np.ones(7), 10e9), 15e9)
