import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from dsp.errors import DspError, SpectralOverlapError
from dsp.tx import DscmConfig
from experiments.scenario import (
    ScenarioConfig,
    SweepAxis,
    apply_overrides,
    apply_point,
    expand_points,
    has_path,
    load_config_file,
    merge_config,
    parse_override,
    sweepable,
    with_value,
)


def _config(**extra):
    return ScenarioConfig(name='prueba', dscm=DscmConfig(total_baud=50e9), **extra)


class PathTests(SimpleTestCase):

    def test_existing_leaf(self):
        cfg = _config()
        self.assertTrue(has_path(cfg, 'impairments.link.osnr_db'))
        self.assertTrue(has_path(cfg, 'dscm.guard_band'))
        self.assertTrue(sweepable(cfg, 'scheme'))

    def test_blocks_and_unknown_fields(self):
        cfg = _config()
        self.assertFalse(has_path(cfg, 'impairments.link'))
        self.assertFalse(has_path(cfg, 'impairments.link.snr'))
        self.assertFalse(sweepable(cfg, 'seeds'))
        self.assertFalse(sweepable(cfg, 'name'))

    def test_with_value_keeps_the_rest(self):
        cfg = _config()
        out = with_value(cfg, 'impairments.rsop.omega', 1e6)
        self.assertEqual(out.impairments.rsop.omega, 1e6)
        self.assertEqual(out.impairments.link, cfg.impairments.link)
        self.assertEqual(cfg.impairments.rsop.omega, 0.0)

    def test_with_value_revalidates(self):
        with self.assertRaises(SpectralOverlapError):
            with_value(_config(), 'dscm.guard_band', -1e9)
        with self.assertRaises(DspError):
            with_value(_config(), 'impairments.rsop.omega', -1.0)

    def test_integer_fields_stay_integer(self):
        out = with_value(_config(), 'equalizer.taps', 21.0)
        self.assertIsInstance(out.equalizer.taps, int)


class SweepPointTests(SimpleTestCase):

    def test_main_axis_outer_extra_axes_inner(self):
        cfg = _config(
            sweep=SweepAxis('impairments.link.osnr_db', (18, 20)),
            extra_axes=(
                SweepAxis('impairments.rsop.omega', (0.0, 1e6)),
                SweepAxis('scheme', ('SPT', 'DPT')),
            ),
        )
        points = expand_points(cfg)
        self.assertEqual(len(points), 8)
        self.assertEqual([p.index for p in points], list(range(8)))
        self.assertEqual([p.value for p in points], [18] * 4 + [20] * 4)
        self.assertEqual(points[1].extras[1][1], 'DPT')
        self.assertEqual(points[2].extras[0][1], 1e6)

    def test_no_sweep_is_a_single_point(self):
        cfg = _config()
        points = expand_points(cfg)
        self.assertEqual(len(points), 1)
        self.assertIsNone(points[0].value)
        self.assertIs(apply_point(cfg, points[0]), cfg)

    def test_empty_values(self):
        self.assertEqual(expand_points(_config(sweep=SweepAxis('impairments.link.osnr_db', ()))), [])

    def test_linked_paths_share_the_value(self):
        cfg = _config(sweep=SweepAxis(
            'impairments.frontend.tau_ryi', (3e-12,), linked=('impairments.frontend.tau_ryq',),
        ))
        out = apply_point(cfg, expand_points(cfg)[0])
        self.assertEqual(out.impairments.frontend.tau_ryi, 3e-12)
        self.assertEqual(out.impairments.frontend.tau_ryq, 3e-12)
        self.assertAlmostEqual(out.impairments.frontend.rx_xy_skew, 3e-12)

    def test_link_setup_follows_scheme(self):
        cfg = _config(scheme='MIMO_CMMA', symbols_per_point=4096)
        setup = cfg.link_setup()
        self.assertEqual(setup.pilots.frequencies, ())
        self.assertEqual(setup.symbols_per_subcarrier, 1024)


class OverrideTests(SimpleTestCase):

    def test_values_are_json_scalars(self):
        self.assertEqual(parse_override('impairments.link.osnr_db=26'), ('impairments.link.osnr_db', 26))
        self.assertEqual(parse_override('scheme=DPT'), ('scheme', 'DPT'))
        self.assertEqual(parse_override('calibration.enabled=true'), ('calibration.enabled', True))
        self.assertEqual(parse_override('seeds=[1, 2]'), ('seeds', [1, 2]))

    def test_malformed_override(self):
        with self.assertRaises(ValueError):
            parse_override('impairments.link.osnr_db')

    def test_apply_creates_blocks(self):
        raw = apply_overrides({'name': 'a'}, ['impairments.rsop.omega=1e6'])
        self.assertEqual(raw['impairments'], {'rsop': {'omega': 1e6}})

    def test_apply_through_a_scalar_fails(self):
        with self.assertRaises(ValueError):
            apply_overrides({'name': 'a'}, ['name.x=1'])

    def test_merge(self):
        base = {'dscm': {'total_baud': 50e9, 'rolloff': 0.1}, 'seeds': [1]}
        merged = merge_config(base, {'dscm': {'rolloff': 0.2}, 'seeds': [3, 4]})
        self.assertEqual(merged, {'dscm': {'total_baud': 50e9, 'rolloff': 0.2}, 'seeds': [3, 4]})
        self.assertEqual(base['dscm']['rolloff'], 0.1)


class ConfigFileTests(SimpleTestCase):

    def test_json_and_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            as_json = Path(tmp) / 'a.json'
            as_json.write_text(json.dumps({'name': 'a', 'dscm': {'total_baud': 5e10}}))
            as_yaml = Path(tmp) / 'a.yaml'
            as_yaml.write_text("name: a\ndscm:\n  total_baud: 50.0e+9\n")
            self.assertEqual(load_config_file(as_json), load_config_file(as_yaml))

    def test_not_an_object(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'a.json'
            path.write_text('[1, 2]')
            with self.assertRaises(ValueError):
                load_config_file(path)
