import json

from django.core.management.base import BaseCommand, CommandError

from experiments.presets import PRESETS, build_preset
from experiments.scenario import scenario_to_dict


class Command(BaseCommand):
    help = "Lista los presets disponibles o muestra la configuración completa de uno."

    def add_arguments(self, parser):
        parser.add_argument('--show', metavar='NOMBRE', help='Imprime la configuración del preset en JSON.')

    def handle(self, *args, **options):
        name = options['show']
        if name:
            if name not in PRESETS:
                raise CommandError(f"Preset '{name}' desconocido. Válidos: {', '.join(PRESETS)}.")
            self.stdout.write(json.dumps(scenario_to_dict(build_preset(name)), indent=2))
            return

        for name, entry in PRESETS.items():
            self.stdout.write(f"{name:<8} {entry['config']['mode']:<12} {entry['description']}")
