import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from experiments.models import ScenarioRun
from experiments.results import CSV_HEADER, ResultRow, parse_results

ONE_POINT = ['sweep.values=[5e-12]', 'seeds=[1]']


def _call(*args, **options):
    out, err = StringIO(), StringIO()
    call_command(*args, stdout=out, stderr=err, **options)
    return out.getvalue(), err.getvalue()


class ListPresetsCommandTests(TestCase):

    def test_list(self):
        out, _ = _call('list_presets')
        lines = out.splitlines()
        self.assertEqual(len(lines), 10)
        self.assertTrue(any(line.startswith('fig12') and 'calibration' in line for line in lines))

    def test_show(self):
        out, _ = _call('list_presets', show='fig5')
        config = json.loads(out)
        self.assertEqual(config['name'], 'fig5')
        self.assertEqual(config['impairments']['link']['fiber_km'], 80)

    def test_show_unknown(self):
        with self.assertRaises(CommandError):
            _call('list_presets', show='fig99')


class RunCommandTests(TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_run_to_csv_and_save(self):
        path = self.tmp / 'sub' / 'fig12.csv'
        out, _ = _call('run', preset='fig12', overrides=ONE_POINT, out=str(path), save=True)
        self.assertIn('1 filas escritas', out)
        self.assertEqual(path.read_text().splitlines()[0], CSV_HEADER)
        [row] = parse_results(path)
        self.assertEqual(row.scheme, 'MGPD')
        self.assertAlmostEqual(row.skew_est_ps, 5, delta=0.15)
        self.assertEqual(ScenarioRun.objects.get().rows.count(), 1)

    def test_osnr_sweep_reports_required_osnr(self):
        rows = [
            ResultRow(
                scenario='fig5', seed=1, sweep_axis='impairments.link.osnr_db', sweep_value=osnr,
                osnr_db=osnr, rsop_rad_s=0.0, pdl_db=0.0, rx_xy_skew_ps=0.0, scheme='SPT', ber=ber,
            )
            for osnr, ber in ((16, 1e-2), (18, 1e-3))
        ]
        with mock.patch('experiments.management.commands.run.run_scenario', return_value=rows):
            out, _ = _call('run', preset='fig5', out=str(self.tmp / 'fig5.csv'))
        self.assertIn('OSNR requerida a BER 3.8e-03:', out)
        self.assertIn('  SPT: 16.84 dB', out)

    def test_json_output(self):
        path = self.tmp / 'fig12.json'
        _call('run', preset='fig12', overrides=ONE_POINT, out=str(path))
        self.assertEqual(len(parse_results(path)), 1)
        self.assertEqual(ScenarioRun.objects.count(), 0)

    def test_config_file_on_top_of_preset(self):
        config = self.tmp / 'cfg.yaml'
        config.write_text("seeds: [4]\nsweep:\n  values: [0.0]\n")
        path = self.tmp / 'r.csv'
        _call('run', '--preset', 'fig12', '--config', str(config), '--out', str(path))
        [row] = parse_results(path)
        self.assertEqual(row.seed, 4)
        self.assertEqual(row.rx_xy_skew_ps, 0.0)

    def test_errors(self):
        missing = self.tmp / 'no-existe.json'
        blocker = self.tmp / 'archivo'
        blocker.write_text('x')
        invalid = [
            {},
            {'config': str(missing)},
            {'preset': 'fig99'},
            {'preset': 'fig12', 'overrides': ['dscm.rolloff=2']},
            {'preset': 'fig12', 'overrides': ['sin-igual']},
            {'preset': 'fig12', 'overrides': ONE_POINT, 'jobs': 0},
            {'preset': 'fig12', 'overrides': ONE_POINT, 'out': str(blocker / 'r.csv')},
        ]
        for options in invalid:
            with self.subTest(options=options), self.assertRaises(CommandError):
                _call('run', **options)


class CalibrateCommandTests(TestCase):

    def test_report(self):
        out, _ = _call(
            'calibrate',
            preset='fig13',
            overrides=['impairments.frontend.tau_rxq=0', 'calibration.osnr_db="inf"'],
        )
        report = json.loads(out)
        self.assertAlmostEqual(report['true_skew_ps'], 5)
        self.assertAlmostEqual(report['tau_xy_ps'], 5, delta=0.3)

    def test_seed_option(self):
        a, _ = _call('calibrate', preset='fig14', seed=5)
        b, _ = _call('calibrate', preset='fig14', seed=5)
        self.assertEqual(a, b)

    def test_needs_a_source(self):
        with self.assertRaises(CommandError):
            _call('calibrate')
