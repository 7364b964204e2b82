from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from experiments.analysis import hd_fec_threshold, required_osnr_by_curve
from experiments.models import record_run
from experiments.results import FORMATS, CsvRowWriter, ResultsWriteError, emit_results, infer_format
from experiments.runner import run_scenario
from experiments.serializers import parse_scenario

from ._options import add_config_arguments, read_raw_config

OSNR_AXIS = 'impairments.link.osnr_db'


class Command(BaseCommand):
    help = "Ejecuta un escenario (barrido x semillas) y escribe la tabla de resultados."

    def add_arguments(self, parser):
        add_config_arguments(parser)
        parser.add_argument('--out', help='Archivo de salida (por defecto RESULTS_DIR/<nombre>.<formato>).')
        parser.add_argument('--format', choices=FORMATS, help='csv, json o xlsx.')
        parser.add_argument('--jobs', type=int, help='Procesos en paralelo.')
        parser.add_argument('--save', action='store_true', help='Guarda la ejecución en la base de datos.')

    def handle(self, *args, **options):
        raw = read_raw_config(options)
        try:
            cfg = parse_scenario(raw)
        except serializers.ValidationError as exc:
            raise CommandError(f"Configuración inválida: {exc.detail}") from exc

        lab = settings.DSCM_LAB
        jobs = options['jobs'] if options['jobs'] is not None else lab['DEFAULT_JOBS']
        if jobs < 1:
            raise CommandError("--jobs debe ser >= 1.")

        out = options['out'] or cfg.outputs
        fmt = options['format'] or (infer_format(out) if out else 'csv')
        out = Path(out) if out else Path(lab['RESULTS_DIR']) / f'{cfg.name}.{fmt}'

        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            if fmt == 'csv':
                with CsvRowWriter(out) as writer:
                    rows = run_scenario(cfg, jobs=jobs, on_row=writer.write)
            else:
                rows = run_scenario(cfg, jobs=jobs)
                emit_results(rows, fmt, out)
        except (ResultsWriteError, OSError) as exc:
            raise CommandError(f"No se pudo escribir {out}: {exc}") from exc

        failed = sum(row.failed for row in rows)
        if failed:
            self.stderr.write(f"{failed} de {len(rows)} filas con error (ver columna diagnostics).")
        if cfg.mode == 'link' and cfg.sweep is not None and cfg.sweep.axis == OSNR_AXIS:
            self._write_required_osnr(rows)
        if options['save']:
            run = record_run(cfg, rows)
            self.stdout.write(f"Ejecución guardada con id {run.pk}.")
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} filas escritas en {out}"))

    def _write_required_osnr(self, rows):
        self.stdout.write(f"OSNR requerida a BER {hd_fec_threshold():.1e}:")
        for curve, osnr in required_osnr_by_curve(rows).items():
            value = f"{osnr:.2f} dB" if osnr is not None else "sin cruce en el barrido"
            self.stdout.write(f"  {curve}: {value}")
