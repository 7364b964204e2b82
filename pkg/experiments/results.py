"""
Filas de resultados y su escritura en CSV, JSON o xlsx.

Cada fila se guarda ya redondeada a la precisión con la que se imprime, así
que leer lo escrito devuelve exactamente las mismas filas.
"""
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

FIELDS = (
    'scenario',
    'seed',
    'sweep_axis',
    'sweep_value',
    'osnr_db',
    'rsop_rad_s',
    'pdl_db',
    'rx_xy_skew_ps',
    'scheme',
    'ber',
    'q_db',
    'skew_est_ps',
    'diagnostics',
)
CSV_HEADER = ','.join(FIELDS)
FORMATS = ('csv', 'json', 'xlsx')
MISSING = 'NA'


class ResultsWriteError(OSError):
    pass


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} no es serializable en los diagnósticos.")


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    seed: int
    sweep_axis: str
    sweep_value: object
    osnr_db: float
    rsop_rad_s: float
    pdl_db: float
    rx_xy_skew_ps: float
    scheme: str
    ber: float | None = None
    q_db: float | None = None
    skew_est_ps: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        def put(name, value):
            object.__setattr__(self, name, value)

        put('seed', int(self.seed))
        if isinstance(self.sweep_value, (int, float, np.number)) and not isinstance(self.sweep_value, bool):
            put('sweep_value', float(self.sweep_value))
        for name in ('osnr_db', 'rsop_rad_s', 'pdl_db'):
            put(name, float(getattr(self, name)))
        put('rx_xy_skew_ps', round(float(self.rx_xy_skew_ps), 3))

        ber = _finite_or_none(self.ber)
        put('ber', None if ber is None else float(f'{ber:.6e}'))
        q_db = _finite_or_none(self.q_db)
        put('q_db', None if q_db is None else round(q_db, 3))
        skew = _finite_or_none(self.skew_est_ps)
        put('skew_est_ps', None if skew is None else round(skew, 3))
        # claves de texto y tipos nativos, como quedan tras pasar por JSON;
        # los no finitos quedan como texto ('Infinity', 'NaN')
        put('diagnostics', json.loads(
            json.dumps(self.diagnostics, default=_json_default, sort_keys=True),
            parse_constant=str,
        ))

    @property
    def failed(self):
        return 'error' in self.diagnostics


# =========================
# Celdas de texto (CSV y xlsx)
# =========================

def _number_cell(value):
    return repr(float(value))


def _value_cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, str):
        return value
    return _number_cell(value)


def _parse_value(text):
    if text == '':
        return None
    if text in ('true', 'false'):
        return text == 'true'
    try:
        return float(text)
    except ValueError:
        return text


def _optional(text):
    return None if text in (MISSING, '') else float(text)


def row_cells(row):
    return [
        row.scenario,
        str(row.seed),
        row.sweep_axis,
        _value_cell(row.sweep_value),
        _number_cell(row.osnr_db),
        _number_cell(row.rsop_rad_s),
        _number_cell(row.pdl_db),
        f'{row.rx_xy_skew_ps:.3f}',
        row.scheme,
        MISSING if row.ber is None else f'{row.ber:.6e}',
        MISSING if row.q_db is None else f'{row.q_db:.3f}',
        '' if row.skew_est_ps is None else f'{row.skew_est_ps:.3f}',
        json.dumps(row.diagnostics, sort_keys=True, separators=(',', ':')),
    ]


def row_from_cells(cells):
    return ResultRow(
        scenario=cells['scenario'],
        seed=int(cells['seed']),
        sweep_axis=cells['sweep_axis'],
        sweep_value=_parse_value(cells['sweep_value']),
        osnr_db=float(cells['osnr_db']),
        rsop_rad_s=float(cells['rsop_rad_s']),
        pdl_db=float(cells['pdl_db']),
        rx_xy_skew_ps=float(cells['rx_xy_skew_ps']),
        scheme=cells['scheme'],
        ber=_optional(cells['ber']),
        q_db=_optional(cells['q_db']),
        skew_est_ps=_optional(cells['skew_est_ps']),
        diagnostics=json.loads(cells['diagnostics']) if cells['diagnostics'] else {},
    )


def _frame(rows):
    return pd.DataFrame([row_cells(row) for row in rows], columns=list(FIELDS), dtype=str)


# =========================
# JSON
# =========================

def _json_number(value):
    if value is None:
        return None
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def row_to_json(row):
    """Diccionario compatible con JSON estricto (los infinitos van como texto)."""
    data = {f.name: getattr(row, f.name) for f in fields(row)}
    for name in ('osnr_db', 'q_db', 'rsop_rad_s', 'pdl_db'):
        data[name] = _json_number(data[name])
    if isinstance(data['sweep_value'], float):
        data['sweep_value'] = _json_number(data['sweep_value'])
    return data


def row_from_json(data):
    data = dict(data)
    for name in ('osnr_db', 'rsop_rad_s', 'pdl_db'):
        data[name] = float(data[name])
    if data.get('q_db') is not None:
        data['q_db'] = float(data['q_db'])
    if data.get('sweep_value') in ('inf', '-inf'):
        data['sweep_value'] = float(data['sweep_value'])
    return ResultRow(**{name: data.get(name) for name in FIELDS if name in data})


# =========================
# Emisión y lectura
# =========================

def _check_format(fmt):
    if fmt not in FORMATS:
        raise ValueError(f"Formato '{fmt}' no soportado; use uno de {FORMATS}.")


def emit_results(rows, fmt, path):
    _check_format(fmt)
    path = Path(path)
    rows = list(rows)
    try:
        if fmt == 'csv':
            _frame(rows).to_csv(path, index=False, lineterminator='\n')
        elif fmt == 'xlsx':
            _frame(rows).to_excel(path, index=False, sheet_name='resultados', engine='openpyxl')
        else:
            payload = [row_to_json(row) for row in rows]
            path.write_text(
                json.dumps(payload, indent=2, allow_nan=False) + '\n', encoding='utf-8',
            )
    except OSError as exc:
        raise ResultsWriteError(f"No se pudo escribir {path}: {exc}") from exc
    return path


def infer_format(path):
    suffix = Path(path).suffix.lower().lstrip('.')
    return suffix if suffix in FORMATS else 'csv'


def parse_results(path, fmt=None):
    fmt = fmt or infer_format(path)
    _check_format(fmt)
    if fmt == 'json':
        return [row_from_json(item) for item in json.loads(Path(path).read_text(encoding='utf-8'))]
    if fmt == 'xlsx':
        df = pd.read_excel(path, dtype=str, keep_default_na=False, engine='openpyxl')
    else:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    return [row_from_cells(cells) for cells in df.to_dict(orient='records')]


class CsvRowWriter:
    """
    Escritura incremental de un CSV: la cabecera al abrir y cada fila en
    cuanto llega, con flush, para no perder lo calculado si el barrido se corta.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._file = None

    def __enter__(self):
        try:
            self._file = self.path.open('w', encoding='utf-8', newline='')
        except OSError as exc:
            raise ResultsWriteError(f"No se pudo escribir {self.path}: {exc}") from exc
        self._file.write(CSV_HEADER + '\n')
        self._file.flush()
        return self

    def write(self, row):
        _frame([row]).to_csv(self._file, index=False, header=False, lineterminator='\n')
        self._file.flush()

    def __exit__(self, *exc_info):
        self._file.close()
        return False
