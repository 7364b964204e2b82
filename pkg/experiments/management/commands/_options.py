"""Opciones comunes de ``run`` y ``calibrate``: preset, archivo y overrides."""
import yaml
from django.core.management.base import CommandError
from rest_framework import serializers

from experiments.presets import preset_config
from experiments.scenario import apply_overrides, load_config_file, merge_config


def add_config_arguments(parser):
    parser.add_argument('--config', help='Archivo de configuración JSON (o YAML).')
    parser.add_argument('--preset', help='Preset base; --config se mezcla encima.')
    parser.add_argument(
        '--set',
        dest='overrides',
        action='append',
        default=[],
        metavar='ruta=valor',
        help='Cambia un campo, por ejemplo impairments.link.osnr_db=26 (repetible).',
    )


def read_raw_config(options):
    """Diccionario crudo de preset + archivo + overrides; errores como CommandError."""
    if not options['config'] and not options['preset']:
        raise CommandError("Indique --config, --preset o ambos.")
    try:
        raw = preset_config(options['preset']) if options['preset'] else {}
        if options['config']:
            raw = merge_config(raw, load_config_file(options['config']))
        return apply_overrides(raw, options['overrides'])
    except serializers.ValidationError as exc:
        raise CommandError(f"Configuración inválida: {exc.detail}") from exc
    except (OSError, ValueError, yaml.YAMLError) as exc:
        raise CommandError(f"No se pudo leer la configuración: {exc}") from exc
