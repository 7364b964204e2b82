"""
Tipos del escenario y utilidades sobre rutas punteadas
(``impairments.link.osnr_db``) para barrer cualquier campo de la configuración.
"""
import itertools
import json
import math
from dataclasses import dataclass, field, fields, is_dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np
import yaml

from dsp.channel import ImpairmentConfig
from dsp.link import CalibrationConfig, LinkSetup
from dsp.polaris import ExtractorConfig
from dsp.rx import EqualizerConfig
from dsp.tx import DscmConfig, PilotDescriptor, PilotScheme

MODES = ('link', 'calibration')

# Campos que describen el escenario y no se pueden barrer
NOT_SWEEPABLE = ('name', 'mode', 'sweep', 'extra_axes', 'seeds', 'outputs', 'preset')


@dataclass(frozen=True)
class SweepAxis:
    axis: str
    values: tuple = ()
    # rutas que reciben el mismo valor que el eje
    linked: tuple = ()

    @property
    def paths(self):
        return (self.axis, *self.linked)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    dscm: DscmConfig
    scheme: str = 'SPT'
    pilots: PilotDescriptor = field(default_factory=PilotDescriptor)
    impairments: ImpairmentConfig = field(default_factory=ImpairmentConfig)
    sweep: SweepAxis | None = None
    symbols_per_point: int = 2 ** 17
    seeds: tuple = (1,)
    outputs: str = ''
    mode: str = 'link'
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    extra_axes: tuple = ()
    guard_symbols: int = 64
    preset: str = ''

    @property
    def symbols_per_subcarrier(self):
        return max(self.symbols_per_point // self.dscm.num_subcarriers, 1)

    def link_setup(self):
        return LinkSetup(
            dscm=self.dscm,
            scheme=self.scheme,
            pilots=replace(self.pilots, scheme=pilot_scheme_for(self.scheme)),
            impairments=self.impairments,
            equalizer=self.equalizer,
            extractor=self.extractor,
            calibration=self.calibration,
            symbols_per_subcarrier=self.symbols_per_subcarrier,
            guard_symbols=self.guard_symbols,
        )


@dataclass(frozen=True)
class SweepPoint:
    index: int
    value: object = None
    # ((rutas, valor), ...) de los ejes adicionales
    extras: tuple = ()


def pilot_scheme_for(scheme):
    """Los pilotos siguen al esquema; MIMO_CMMA y NONE transmiten sin tono."""
    if scheme in ('SPT', 'DPT'):
        return PilotScheme(scheme)
    return PilotScheme.NONE


# =========================
# Rutas punteadas
# =========================

def has_path(obj, path):
    for part in path.split('.'):
        if not is_dataclass(obj) or part not in {f.name for f in fields(obj)}:
            return False
        obj = getattr(obj, part)
    return not is_dataclass(obj)


def sweepable(cfg, path):
    return path.split('.')[0] not in NOT_SWEEPABLE and has_path(cfg, path)


def field_value(cfg, path):
    for part in path.split('.'):
        cfg = getattr(cfg, part)
    return cfg


def compatible(current, value):
    """El valor de barrido tiene el tipo del campo (número, texto o booleano)."""
    if isinstance(current, bool):
        return isinstance(value, bool)
    if isinstance(current, (str, Enum)):
        return isinstance(value, str)
    if current is None or isinstance(current, (int, float)):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False
        # los campos enteros no aceptan fracciones
        return not isinstance(current, int) or float(value).is_integer()
    return False


def _coerce(current, value):
    if isinstance(current, bool) or isinstance(value, bool):
        return bool(value)
    if isinstance(current, Enum):
        return type(current)(value)
    if isinstance(current, int) and isinstance(value, (int, float)) and float(value).is_integer():
        return int(value)
    if isinstance(value, (int, float)):
        return float(value)
    return value


def with_value(obj, path, value):
    """Copia de ``obj`` con el campo de ``path`` reemplazado (revalida cada bloque)."""
    head, _, rest = path.partition('.')
    current = getattr(obj, head)
    if rest:
        return replace(obj, **{head: with_value(current, rest, value)})
    return replace(obj, **{head: _coerce(current, value)})


def expand_points(cfg):
    """Eje principal por fuera, ejes adicionales (producto cartesiano) por dentro."""
    main = cfg.sweep.values if cfg.sweep is not None else (None,)
    grids = [[(axis.paths, v) for v in axis.values] for axis in cfg.extra_axes]
    points = []
    for value in main:
        for combo in itertools.product(*grids):
            points.append(SweepPoint(len(points), value, tuple(combo)))
    return points


def apply_point(cfg, point):
    if cfg.sweep is not None:
        for path in cfg.sweep.paths:
            cfg = with_value(cfg, path, point.value)
    for paths, value in point.extras:
        for path in paths:
            cfg = with_value(cfg, path, value)
    return cfg


# =========================
# Lectura y eco de configuraciones
# =========================

def _plain(obj):
    if is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (tuple, list)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return 'inf' if obj > 0 else '-inf'
    return obj


def scenario_to_dict(cfg):
    """
    Configuración completa en forma de diccionario, con los valores por
    defecto explícitos. Se puede volver a validar con ``parse_scenario``.
    """
    data = _plain(cfg)
    # el esquema de pilotos se deriva de ``scheme``
    data['pilots'].pop('scheme', None)
    if cfg.sweep is None:
        data.pop('sweep')
    return data


def load_config_file(path):
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    if path.suffix.lower() in ('.yaml', '.yml'):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError(f"{path} no contiene un objeto de configuración.")
    return data


def parse_override(text):
    """``a.b.c=valor`` -> ('a.b.c', valor); el valor se lee como escalar JSON si se puede."""
    path, sep, raw = text.partition('=')
    if not sep or not path.strip():
        raise ValueError(f"Override '{text}' no tiene la forma ruta=valor.")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.strip(), value


def apply_overrides(raw, overrides):
    for text in overrides:
        path, value = parse_override(text)
        node = raw
        *parents, leaf = path.split('.')
        for part in parents:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"'{part}' en '{path}' no es un bloque de la configuración.")
        node[leaf] = value
    return raw


def merge_config(base, extra):
    """Mezcla recursiva: ``extra`` pisa a ``base`` campo por campo."""
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged
