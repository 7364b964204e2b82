import numpy as np
from django.test import SimpleTestCase

from dsp.channel import LinkParams, apply_cd
from dsp.core import matched_filter, rrc_shape
from dsp.errors import DspError, EqualizerDivergedError, SyncFailedError
from dsp.rx import (
    EqualizerConfig,
    bps_carrier_recovery,
    compensate_cd_subcarrier,
    demux_subcarriers,
    equalize_mimo_cmma,
    equalize_siso_cmma,
    measure_ber,
    normalize_power,
    q_factor_db,
    retime,
    synchronize,
)
from dsp.tx import (
    DscmConfig,
    FramePayload,
    build_dscm,
    decide_16qam,
    demap_16qam,
    generate_prbs,
    make_payload,
    map_16qam,
)


def _qam_symbols(n, seed=1):
    return map_16qam(generate_prbs(23, seed, 4 * n))


def _two_sps_stream(symbols):
    """Flujo a 2 muestras/símbolo ya pasado por el filtro adaptado."""
    shaped = rrc_shape(symbols, 0.1, 2, 12.5e9)
    return matched_filter(shaped, 0.1, 2).samples


def _align(out, ref):
    """Ganancia compleja de mínimos cuadrados que lleva ``out`` sobre ``ref``."""
    return out * (np.vdot(out, ref) / np.vdot(out, out))


def _evm_db(out, ref):
    aligned = _align(out, ref)
    return 10 * np.log10(np.mean(np.abs(aligned - ref) ** 2) / np.mean(np.abs(ref) ** 2))


class SubcarrierDemuxTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = DscmConfig(total_baud=50e9)
        cls.payload = make_payload(2048, 4, seed=21)
        cls.waveform = build_dscm(cls.payload, cls.cfg)
        cls.streams = demux_subcarriers(cls.waveform, cls.cfg)

    def test_shape(self):
        self.assertEqual(self.streams.shape, (2, 4, 4096))

    def test_loopback_has_no_symbol_errors(self):
        for p in range(2):
            for s in range(4):
                ref = self.payload.symbols[p, s][32:-32]
                out = _align(self.streams[p, s, ::2][32:-32], ref)
                np.testing.assert_array_equal(decide_16qam(out), ref)

    def test_single_subcarrier_is_matched_filter(self):
        cfg = DscmConfig(total_baud=12.5e9, num_subcarriers=1)
        w = build_dscm(make_payload(512, 1, seed=2), cfg)
        streams = demux_subcarriers(w, cfg)
        np.testing.assert_allclose(
            streams[0, 0], matched_filter(w.x, cfg.rolloff, 2).samples, atol=1e-9,
        )

    def test_odd_samples_per_symbol_rejected(self):
        odd = DscmConfig(total_baud=37.5e9, num_subcarriers=3, sps=3)
        self.assertEqual(odd.subcarrier_sps, 9)
        with self.assertRaises(DspError):
            demux_subcarriers(self.waveform, odd)

    def test_neighbour_crosstalk_is_small(self):
        symbols = self.payload.symbols.copy()
        symbols[:, 1] = 0
        silenced = FramePayload(self.payload.bits, symbols, self.payload.seed)
        streams = demux_subcarriers(build_dscm(silenced, self.cfg), self.cfg)
        ref = self.streams[0, 2, 64:-64]
        out = _align(streams[0, 2, 64:-64], ref)
        ratio = np.mean(np.abs(out - ref) ** 2) / np.mean(np.abs(ref) ** 2)
        self.assertLess(ratio, 1e-3)

    def test_per_subcarrier_dispersion_compensation(self):
        link = LinkParams(fiber_km=80)
        dispersed = demux_subcarriers(apply_cd(self.waveform, link), self.cfg)
        rate = 2 * self.cfg.subcarrier_baud
        for s, center in enumerate(self.cfg.centers):
            restored = compensate_cd_subcarrier(dispersed[0, s], rate, link, center)
            ref = self.streams[0, s, 200:-200]
            error = np.mean(np.abs(restored[200:-200] - ref) ** 2) / np.mean(np.abs(ref) ** 2)
            self.assertLess(error, 1e-3)

    def test_dispersion_free_link_skips_compensation(self):
        stream = self.streams[0, 0]
        out = compensate_cd_subcarrier(stream, 25e9, LinkParams(fiber_km=0), 6.875e9)
        np.testing.assert_array_equal(out, stream)


class StreamPreparationTests(SimpleTestCase):

    def test_retime_picks_strong_phase(self):
        stream = np.tile([0.1, 1.0], 50).astype(complex)
        stream = np.concatenate([stream, [0.1]])
        aligned, phase = retime(stream)
        self.assertEqual(phase, 1)
        self.assertEqual(aligned.size % 2, 0)
        np.testing.assert_array_equal(aligned[::2], np.ones(aligned.size // 2))

    def test_normalize_power(self):
        stream = 3 * _two_sps_stream(_qam_symbols(2048))
        out = normalize_power(stream)
        self.assertAlmostEqual(np.mean(np.abs(out[::2]) ** 2), 1.0, places=12)

    def test_silent_stream_rejected(self):
        with self.assertRaises(DspError):
            normalize_power(np.zeros(16, dtype=complex))


class SynchronizeTests(SimpleTestCase):

    def test_zero_lag(self):
        ref = _qam_symbols(4096)
        result = synchronize(ref, ref)
        self.assertEqual(result.lag, 0)
        self.assertGreater(result.peak_ratio, 5)

    def test_known_lag(self):
        ref = _qam_symbols(4096)
        result = synchronize(np.roll(ref, 137), ref)
        self.assertEqual(result.lag, 137)
        np.testing.assert_array_equal(result.rx, result.ref)

    def test_negative_lag(self):
        ref = _qam_symbols(4096)
        result = synchronize(np.roll(ref, -40), ref)
        self.assertEqual(result.lag, -40)
        np.testing.assert_array_equal(result.rx, result.ref)

    def test_uncorrelated_streams_fail(self):
        with self.assertRaises(SyncFailedError):
            synchronize(_qam_symbols(4096, seed=1), _qam_symbols(4096, seed=987654))


class EqualizerConfigTests(SimpleTestCase):

    def test_cma_radius(self):
        self.assertAlmostEqual(EqualizerConfig().cma_radius_sq, 1.32, places=12)

    def test_default_radii(self):
        np.testing.assert_allclose(EqualizerConfig().radii, np.sqrt([0.2, 1.0, 1.8]))

    def test_invalid_configurations(self):
        with self.assertRaises(DspError):
            EqualizerConfig(taps=14)
        with self.assertRaises(DspError):
            EqualizerConfig(radii=(1.0, 0.5, 1.5))
        with self.assertRaises(DspError):
            EqualizerConfig(radii=(0.5, 1.0))


class SisoEqualizerTests(SimpleTestCase):

    def test_converges_on_clean_input(self):
        symbols = _qam_symbols(20_000)
        stream = normalize_power(_two_sps_stream(symbols))
        out = equalize_siso_cmma(stream, EqualizerConfig(cma_pretrain_symbols=5000))
        self.assertEqual(out.size, symbols.size)
        self.assertLess(_evm_db(out[12_000:-100], symbols[12_000:-100]), -25)

    def test_divergence_is_reported(self):
        stream = normalize_power(_two_sps_stream(_qam_symbols(2048)))
        with self.assertRaises(EqualizerDivergedError):
            equalize_siso_cmma(stream, EqualizerConfig(mu_cma=10.0))


class MimoEqualizerTests(SimpleTestCase):

    def test_y_branch_divergence_is_reported(self):
        cfg = EqualizerConfig(cma_pretrain_symbols=2000)
        rng = np.random.default_rng(0)
        # X de módulo constante en el radio CMA: la rama X no se mueve
        x = np.sqrt(cfg.cma_radius_sq) * np.exp(2j * np.pi * rng.random(4000))
        y = np.full(4000, 100.0 + 0j)
        with self.assertRaisesMessage(EqualizerDivergedError, 'rama Y'):
            equalize_mimo_cmma(x, y, cfg)

    def test_undoes_static_rotation(self):
        n = 40_000
        sx, sy = _qam_symbols(n, seed=3), _qam_symbols(n, seed=4)
        x, y = _two_sps_stream(sx), _two_sps_stream(sy)
        c = s = np.sqrt(0.5)
        mixed_x, mixed_y = c * x - s * y, s * x + c * y
        result = equalize_mimo_cmma(mixed_x, mixed_y, EqualizerConfig(cma_pretrain_symbols=20_000))
        self.assertFalse(result.singular)

        window = slice(30_000, n - 100)
        best = None
        for out_x, out_y in ((result.x, result.y), (result.y, result.x)):
            errors = 0
            for out, ref in ((out_x, sx), (out_y, sy)):
                bps = bps_carrier_recovery(out[window] / np.sqrt(np.mean(np.abs(out[window]) ** 2)),
                                           reference=ref[window])
                errors += np.count_nonzero(np.abs(bps.symbols - ref[window]) > 0.3)
            best = errors if best is None else min(best, errors)
        self.assertLess(best / (2 * (window.stop - window.start)), 1e-3)


class CarrierRecoveryTests(SimpleTestCase):

    def test_no_phase_noise_is_identity(self):
        symbols = _qam_symbols(4096)
        result = bps_carrier_recovery(symbols)
        np.testing.assert_allclose(result.symbols, symbols, atol=1e-12)

    def test_static_offset(self):
        symbols = _qam_symbols(4096)
        result = bps_carrier_recovery(symbols * np.exp(1j * np.pi / 16), reference=symbols)
        np.testing.assert_allclose(result.phases, -np.pi / 16, atol=np.pi / 64)
        np.testing.assert_array_equal(decide_16qam(result.symbols), symbols)

    def test_quarter_turn_resolved_with_reference(self):
        symbols = _qam_symbols(4096)
        result = bps_carrier_recovery(symbols * 1j, reference=symbols)
        np.testing.assert_allclose(result.symbols, symbols, atol=1e-12)
        self.assertEqual(result.quadrant, 3)

    def test_opposite_residual_phases(self):
        sx, sy = _qam_symbols(4096, seed=5), _qam_symbols(4096, seed=6)
        phi = 0.1
        rx = bps_carrier_recovery(sx * np.exp(-1j * phi), reference=sx)
        ry = bps_carrier_recovery(sy * np.exp(1j * phi), reference=sy)
        np.testing.assert_array_equal(demap_16qam(rx.symbols), demap_16qam(sx))
        np.testing.assert_array_equal(demap_16qam(ry.symbols), demap_16qam(sy))


class BerTests(SimpleTestCase):

    def test_identical_bits(self):
        bits = generate_prbs(15, 3, 200_000)
        report = measure_ber(bits, bits)
        self.assertEqual(report.ber, 0)
        self.assertEqual(report.q_db, float('inf'))
        self.assertFalse(report.low_confidence)

    def test_inverted_bits(self):
        bits = generate_prbs(15, 3, 4000)
        report = measure_ber(1 - bits, bits)
        self.assertEqual(report.ber, 1.0)
        self.assertTrue(np.isnan(report.q_db))
        self.assertTrue(report.low_confidence)

    def test_random_bits(self):
        rng = np.random.default_rng(8)
        n = 200_000
        report = measure_ber(rng.integers(0, 2, n), rng.integers(0, 2, n))
        self.assertAlmostEqual(report.ber, 0.5, delta=3 * np.sqrt(0.25 / n))

    def test_cells_by_polarization_and_subcarrier(self):
        a = np.zeros(100, dtype=np.uint8)
        b = a.copy()
        b[:10] = 1
        report = measure_ber({('X', 0): a, ('Y', 1): b}, {('X', 0): a, ('Y', 1): a})
        self.assertEqual(report.errors, 10)
        self.assertEqual(report.bits, 200)
        self.assertAlmostEqual(report.cells[('Y', 1)].ber, 0.1)
        data = report.to_dict()
        self.assertEqual([c['pol'] for c in data['cells']], ['X', 'Y'])

    def test_mismatched_cells_rejected(self):
        with self.assertRaises(DspError):
            measure_ber({('X', 0): [0]}, {('Y', 0): [0]})
        with self.assertRaises(DspError):
            measure_ber([0, 1], [0, 1, 1])

    def test_q_factor(self):
        self.assertAlmostEqual(q_factor_db(1e-3), 9.80, places=2)
        self.assertEqual(q_factor_db(0), float('inf'))
        self.assertTrue(np.isnan(q_factor_db(0.5)))
