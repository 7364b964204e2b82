import json

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from dsp.errors import DspError
from experiments.runner import calibration_report
from experiments.serializers import CalibrationRequestSerializer

from ._options import add_config_arguments, read_raw_config


class Command(BaseCommand):
    help = (
        "Calibración PT-MGPD en back-to-back con el front-end y el bloque "
        "'calibration' de la configuración; imprime el informe de skew en JSON."
    )

    def add_arguments(self, parser):
        add_config_arguments(parser)
        parser.add_argument('--seed', type=int, help='Semilla del ruido (por defecto la primera de seeds).')

    def handle(self, *args, **options):
        raw = read_raw_config(options)
        seeds = raw.get('seeds') or [1]
        request = CalibrationRequestSerializer(data={
            'frontend': raw.get('impairments', {}).get('frontend', {}),
            'calibration': raw.get('calibration', {}),
            'seed': options['seed'] if options['seed'] is not None else seeds[0],
        })
        try:
            request.is_valid(raise_exception=True)
        except serializers.ValidationError as exc:
            raise CommandError(f"Configuración inválida: {exc.detail}") from exc

        data = request.validated_data
        try:
            report = calibration_report(
                data['frontend_config'], data['calibration_config'], seed=data['seed'],
            )
        except DspError as exc:
            raise CommandError(f"Calibración fallida ({exc.code}): {exc}") from exc
        self.stdout.write(json.dumps(report, indent=2))
