"""
Escenarios predefinidos. Cada uno es un diccionario de configuración
(el mismo formato que acepta ``run --config``); ``build_preset`` lo valida.
"""
import copy
import math

from rest_framework import serializers

from .scenario import apply_overrides, merge_config
from .serializers import parse_scenario

PS = 1e-12

DSCM_50G = {'total_baud': 50e9, 'num_subcarriers': 4, 'rolloff': 0.1, 'guard_band': 0.0}
DSCM_35G = {'total_baud': 35e9, 'num_subcarriers': 4, 'rolloff': 0.1, 'guard_band': 0.0}

# Pilotos en los huecos entre subportadoras (centro y entre la 1.a y la 2.a)
PILOTS_50G = {'f1': 0.0, 'f2': 13.75e9, 'psr_db': -10.0}
# Tono fuera de la banda ocupada: lejos de DC el Rx-XY-skew sí desplaza su fase
PILOTS_50G_EDGE = {**PILOTS_50G, 'f1': 28e9}
PILOTS_35G = {'f1': 0.0, 'f2': 9.625e9, 'psr_db': -10.0}

LINK_80KM = {'fiber_km': 80, 'linewidth_hz': 100e3}
RSOP_SPEEDS = [0.0, 1e5, 1e6, 1e7]
SKEW_AXIS = 'impairments.frontend.tau_ryi'
SKEW_LINKED = ['impairments.frontend.tau_ryq']


def _link_preset(name, description, link=None, rsop=None, frontend=None, **extra):
    config = {
        'name': name,
        'preset': name,
        'mode': 'link',
        'scheme': 'SPT',
        'dscm': dict(DSCM_50G),
        'pilots': dict(PILOTS_50G),
        'impairments': {
            'link': {**LINK_80KM, **(link or {})},
            'rsop': rsop or {},
            'frontend': frontend or {},
        },
        'seeds': [1, 2],
    }
    config.update(extra)
    return {'description': description, 'config': config}


def _calibration_preset(name, description, frontend=None, calibration=None, **extra):
    config = {
        'name': name,
        'preset': name,
        'mode': 'calibration',
        'scheme': 'SPT',
        'dscm': dict(DSCM_50G),
        'pilots': {'f1': 2e9},
        'impairments': {'frontend': frontend or {}},
        'calibration': {'enabled': True, 'f1': 2e9, 'osnr_db': 26, **(calibration or {})},
        'seeds': [1, 2],
    }
    config.update(extra)
    return {'description': description, 'config': config}


PRESETS = {
    'fig5': _link_preset(
        'fig5',
        'SPT a 50 GBd 4SC-16QAM sobre 80 km: BER frente a OSNR para varias velocidades de RSOP.',
        sweep={'axis': 'impairments.link.osnr_db', 'values': [16, 18, 20, 22, 24, 26]},
        extra_axes=[{'axis': 'impairments.rsop.omega', 'values': RSOP_SPEEDS}],
    ),
    'fig8': _link_preset(
        'fig8',
        'SPT con distintas bandas de guarda entre subportadoras a OSNR fija.',
        link={'osnr_db': 20},
        rsop={'omega': 1e6},
        sweep={'axis': 'dscm.guard_band', 'values': [0.0, 100e6, 200e6, 400e6]},
    ),
    'fig9': _link_preset(
        'fig9',
        'BER frente a velocidad de RSOP para SPT, DPT y CMMA 2x2 convencional.',
        link={'osnr_db': 20},
        sweep={'axis': 'impairments.rsop.omega', 'values': [0.0, 1e4, 1e5, 1e6, 1e7]},
        extra_axes=[{'axis': 'scheme', 'values': ['SPT', 'DPT', 'MIMO_CMMA']}],
    ),
    'fig10': _link_preset(
        'fig10',
        'SPT frente a PDL para varias velocidades de RSOP.',
        link={'osnr_db': 20},
        sweep={'axis': 'impairments.rsop.pdl_db', 'values': [-3, -2, -1, 0, 1, 2, 3]},
        extra_axes=[{'axis': 'impairments.rsop.omega', 'values': [1e5, 1e6, 1e7]}],
    ),
    'fig11': _link_preset(
        'fig11',
        'SPT y DPT sin compensar el Rx-XY-skew: BER frente a OSNR.',
        pilots=dict(PILOTS_50G_EDGE),
        rsop={'alpha0': math.pi / 4, 'omega': 1e6},
        sweep={'axis': 'impairments.link.osnr_db', 'values': [16, 18, 20, 22, 24, 26, 28]},
        extra_axes=[
            {
                'axis': SKEW_AXIS,
                'linked': SKEW_LINKED,
                'values': [0.0, 1 * PS, 1.5 * PS, 2 * PS, 3 * PS],
            },
            {'axis': 'scheme', 'values': ['SPT', 'DPT']},
        ],
    ),
    'fig12': _calibration_preset(
        'fig12',
        'PT-MGPD en back-to-back: skew estimado frente al real, de -30 a 30 ps.',
        sweep={
            'axis': SKEW_AXIS,
            'linked': SKEW_LINKED,
            'values': [v * PS for v in range(-30, 31, 10)],
        },
    ),
    'fig13': _calibration_preset(
        'fig13',
        'PT-MGPD con skew IQ, desbalance de fase y de amplitud en el receptor (skew XY de 5 ps).',
        frontend={'tau_ryi': 5 * PS, 'tau_ryq': 5 * PS},
        sweep={'axis': 'impairments.frontend.tau_rxq', 'values': [v * PS for v in (-10, -5, 0, 5, 10)]},
        extra_axes=[
            {'axis': 'impairments.frontend.phase_imb_x_deg', 'values': [-15, 0, 15]},
            {'axis': 'impairments.frontend.amp_imb_x_db', 'values': [-10, 0, 10]},
        ],
    ),
    'fig14': _calibration_preset(
        'fig14',
        'PT-MGPD frente a OSNR, con y sin desbalance IQ en el receptor.',
        frontend={'tau_ryi': 5 * PS, 'tau_ryq': 5 * PS},
        sweep={'axis': 'calibration.osnr_db', 'values': [12, 14, 16, 18, 20, 22, 24, 26]},
        extra_axes=[{'axis': 'impairments.frontend.phase_imb_x_deg', 'values': [0, 15]}],
    ),
    'fig15': _link_preset(
        'fig15',
        'SPT a 10 Mrad/s con y sin calibración del Rx-XY-skew, de -3 a 3 ps.',
        pilots=dict(PILOTS_50G_EDGE),
        link={'osnr_db': 20},
        rsop={'omega': 1e7},
        sweep={'axis': SKEW_AXIS, 'linked': SKEW_LINKED, 'values': [v * PS for v in range(-3, 4)]},
        extra_axes=[{'axis': 'calibration.enabled', 'values': [False, True]}],
    ),
    'exp18c': _link_preset(
        'exp18c',
        'Análogo simulado del experimento a 35 GBd: BER frente a RSOP a OSNR 28 dB.',
        dscm=dict(DSCM_35G),
        pilots=dict(PILOTS_35G),
        link={'osnr_db': 28},
        sweep={'axis': 'impairments.rsop.omega', 'values': [0.0, 1e4, 1e5, 1e6, 1e7]},
        extra_axes=[{'axis': 'scheme', 'values': ['SPT', 'DPT', 'MIMO_CMMA']}],
    ),
}


def preset_names():
    return list(PRESETS)


def _unknown(name):
    return serializers.ValidationError(
        {'preset': f"Preset '{name}' desconocido. Válidos: {', '.join(PRESETS)}."}
    )


def preset_config(name):
    """Diccionario de configuración del preset (copia, se puede modificar)."""
    if name not in PRESETS:
        raise _unknown(name)
    return copy.deepcopy(PRESETS[name]['config'])


def preset_description(name):
    if name not in PRESETS:
        raise _unknown(name)
    return PRESETS[name]['description']


def build_preset(name):
    return parse_scenario(preset_config(name))


def compose_config(preset=None, config=None, overrides=()):
    """
    Preset (si hay) + configuración explícita encima + overrides ``a.b=valor``.
    Devuelve el ``ScenarioConfig`` validado.
    """
    raw = preset_config(preset) if preset else {}
    if config:
        raw = merge_config(raw, config)
    if not raw:
        raise serializers.ValidationError("Indique un preset o una configuración.")
    try:
        apply_overrides(raw, overrides)
    except ValueError as exc:
        raise serializers.ValidationError({'overrides': str(exc)}) from exc
    return parse_scenario(raw)
