import math

from django.conf import settings
from django.test import SimpleTestCase
from rest_framework import serializers

from dsp.tx import PilotScheme
from experiments.presets import PRESETS, build_preset
from experiments.scenario import scenario_to_dict
from experiments.serializers import parse_scenario


def _raw(**extra):
    raw = {'name': 'prueba', 'dscm': {'total_baud': 50e9}}
    raw.update(extra)
    return raw


class ScenarioConfigSerializerTests(SimpleTestCase):

    def test_minimal_config_takes_defaults(self):
        cfg = parse_scenario(_raw())
        self.assertEqual(cfg.mode, 'link')
        self.assertEqual(cfg.scheme, 'SPT')
        self.assertEqual(cfg.seeds, (1,))
        self.assertEqual(cfg.symbols_per_point, settings.DSCM_LAB['SYMBOLS_PER_POINT'])
        self.assertEqual(cfg.dscm.num_subcarriers, 4)
        self.assertEqual(cfg.impairments.link.fiber_km, 80.0)
        self.assertIsNone(cfg.sweep)

    def test_pilots_follow_scheme(self):
        self.assertEqual(parse_scenario(_raw()).pilots.scheme, PilotScheme.SPT)
        mimo = parse_scenario(_raw(scheme='MIMO_CMMA'))
        self.assertEqual(mimo.pilots.scheme, PilotScheme.NONE)
        dpt = parse_scenario(_raw(scheme='DPT', pilots={'f1': 0.0, 'f2': 13.75e9}))
        self.assertEqual(dpt.pilots.frequencies, (0.0, 13.75e9))

    def test_osnr_accepts_inf(self):
        cfg = parse_scenario(_raw(impairments={'link': {'osnr_db': 'inf'}}))
        self.assertTrue(math.isinf(cfg.impairments.link.osnr_db))

    def test_nested_blocks(self):
        cfg = parse_scenario(_raw(
            impairments={
                'rsop': {'omega': 1e7, 'pdl_db': 3},
                'frontend': {'tau_ryi': 2e-12},
            },
            equalizer={'taps': 21, 'radii': [0.4, 1.0, 1.3]},
            calibration={'enabled': True, 'rotation': {'alpha0': 0.5}},
        ))
        self.assertEqual(cfg.impairments.rsop.omega, 1e7)
        self.assertEqual(cfg.impairments.frontend.tau_ryi, 2e-12)
        self.assertEqual(cfg.equalizer.radii, (0.4, 1.0, 1.3))
        self.assertEqual(cfg.calibration.rotation.alpha0, 0.5)

    def test_sweep_and_extra_axes(self):
        cfg = parse_scenario(_raw(
            sweep={'axis': 'impairments.link.osnr_db', 'values': [18, 20]},
            extra_axes=[{'axis': 'scheme', 'values': ['SPT', 'DPT']}],
            pilots={'f2': 13.75e9},
        ))
        self.assertEqual(cfg.sweep.values, (18, 20))
        self.assertEqual(cfg.extra_axes[0].axis, 'scheme')

    def test_integer_fields_take_whole_numbers(self):
        cfg = parse_scenario(_raw(sweep={'axis': 'dscm.num_subcarriers', 'values': [4, 2.0]}))
        self.assertEqual(cfg.sweep.values, (4, 2.0))

    def test_rejections(self):
        invalid = [
            _raw(seeds=[]),
            _raw(scheme='QPSK'),
            _raw(mode='plot'),
            _raw(dscm={'total_baud': 50e9, 'rolloff': 1.5}),
            _raw(scheme='DPT'),
            _raw(extractor={'lpf_kind': 'kalman'}),
            _raw(sweep={'axis': 'impairments.link.snr', 'values': [1]}),
            _raw(sweep={'axis': 'seeds', 'values': [1]}),
            _raw(sweep={'axis': 'impairments.link', 'values': [1]}),
            _raw(sweep={'axis': 'impairments.link.osnr_db', 'values': ['alto']}),
            _raw(sweep={'axis': 'scheme', 'values': [1]}),
            _raw(sweep={'axis': 'dscm.num_subcarriers', 'values': [4, 2.5]}),
            _raw(sweep={'axis': 'equalizer.taps', 'values': [15, 21.5]}),
            _raw(sweep={'axis': 'impairments.link.osnr_db', 'values': [[1, 2]]}),
            _raw(sweep={
                'axis': 'impairments.frontend.tau_ryi',
                'linked': ['impairments.frontend.tau_ryz'],
                'values': [1e-12],
            }),
            {'dscm': {'total_baud': 50e9}},
        ]
        for raw in invalid:
            with self.subTest(raw=raw), self.assertRaises(serializers.ValidationError):
                parse_scenario(raw)

    def test_echoed_presets_validate_back(self):
        for name in PRESETS:
            with self.subTest(preset=name):
                cfg = build_preset(name)
                self.assertEqual(parse_scenario(scenario_to_dict(cfg)), cfg)
