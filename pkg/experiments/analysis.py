"""
Resumen de curvas BER frente a OSNR: OSNR requerida en el umbral HD-FEC y
penalización frente a una curva de referencia.
"""
import json
import math

import numpy as np
import pandas as pd
from django.conf import settings

# piso para interpolar en log10 cuando una semilla no tiene errores
BER_FLOOR = 1e-9


def hd_fec_threshold():
    return settings.DSCM_LAB['HD_FEC_THRESHOLD']


def _curve_frame(rows):
    data = [
        {'osnr_db': row.osnr_db, 'ber': row.ber}
        for row in rows
        if row.ber is not None and math.isfinite(row.osnr_db)
    ]
    if not data:
        return pd.DataFrame(columns=['osnr_db', 'ber'])
    # media de las semillas en cada OSNR
    return pd.DataFrame(data).groupby('osnr_db', as_index=False)['ber'].mean().sort_values('osnr_db')


def required_osnr(rows, threshold=None):
    """
    OSNR en la que la curva cruza el umbral (por defecto HD-FEC), interpolando
    log10(BER) linealmente entre los dos puntos que lo rodean. ``None`` si la
    curva no cruza el umbral dentro del barrido.
    """
    threshold = hd_fec_threshold() if threshold is None else threshold
    frame = _curve_frame(rows)
    osnr = frame['osnr_db'].to_numpy(dtype=float)
    log_ber = np.log10(np.maximum(frame['ber'].to_numpy(dtype=float), BER_FLOOR))
    target = math.log10(threshold)
    for k in range(len(osnr) - 1):
        if log_ber[k] >= target > log_ber[k + 1]:
            fraction = (log_ber[k] - target) / (log_ber[k] - log_ber[k + 1])
            return float(osnr[k] + fraction * (osnr[k + 1] - osnr[k]))
    return None


def osnr_penalty(rows, reference_rows, threshold=None):
    """Diferencia de OSNR requerida frente a la referencia; ``None`` si alguna no cruza."""
    required = required_osnr(rows, threshold)
    reference = required_osnr(reference_rows, threshold)
    if required is None or reference is None:
        return None
    return required - reference


def curve_key(row):
    """Esquema más los valores de los ejes adicionales: identifica una curva."""
    axes = {k: v for k, v in row.diagnostics.get('axes', {}).items() if k != 'scheme'}
    return f"{row.scheme} {json.dumps(axes, sort_keys=True)}" if axes else row.scheme


def required_osnr_by_curve(rows, threshold=None):
    """``{curva: OSNR requerida}`` en el orden en que aparece cada curva."""
    curves = {}
    for row in rows:
        curves.setdefault(curve_key(row), []).append(row)
    return {key: required_osnr(curve, threshold) for key, curve in curves.items()}
