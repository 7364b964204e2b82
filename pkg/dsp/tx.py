"""
Transmisor: PRBS, mapeo 16QAM, multiplexado en subportadoras (DSCM),
inserción de tonos piloto y señal de entrenamiento MGPD.
"""
import json
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import ComplexBlock, DualPolWaveform, frequency_shift, rrc_shape, tone
from .errors import (
    DspError,
    NyquistViolation,
    OffGridToneError,
    SpectralOverlapError,
    UnsupportedPrbsOrder,
)

logger = logging.getLogger(__name__)

GOLDEN_DIR = Path(__file__).resolve().parent / 'golden'

# orden -> (retardo corto, retardo largo) de la recurrencia s[n] = s[n-a] ^ s[n-b]
PRBS_TAPS = {
    7: (6, 7),
    15: (14, 15),
    23: (18, 23),
    31: (28, 31),
}

DEFAULT_PRBS_ORDER = 23
BITS_PER_SYMBOL = 4
# fracción del baudio de subportadora que cuenta como "sobre el centro"
PILOT_CENTER_TOLERANCE = 0.01


# =========================
# PRBS
# =========================

def generate_prbs(order, seed, n):
    """Secuencia m de ``n`` bits (uint8) para el polinomio estándar del orden."""
    if order not in PRBS_TAPS:
        raise UnsupportedPrbsOrder(
            f"Orden PRBS {order} no soportado; use uno de {sorted(PRBS_TAPS)}."
        )
    state = int(seed) & ((1 << order) - 1)
    if state == 0:
        raise DspError("La semilla PRBS no puede ser cero (en los bits del registro).")

    short, long_ = PRBS_TAPS[order]
    out = np.zeros(max(n, order), dtype=np.uint8)
    out[:order] = [(state >> k) & 1 for k in range(order)]

    # cada bloque de `short` bits solo depende de bits ya calculados
    pos = order
    while pos < out.size:
        stop = min(pos + short, out.size)
        out[pos:stop] = out[pos - short:stop - short] ^ out[pos - long_:stop - long_]
        pos = stop
    return out[:n]


# =========================
# 16QAM Gray
# =========================

@lru_cache(maxsize=1)
def gray_table():
    """Tabla Gray congelada en ``golden/gray_16qam.json``."""
    with open(GOLDEN_DIR / 'gray_16qam.json', encoding='utf-8') as fh:
        data = json.load(fh)
    levels = np.zeros(4)
    for bits, level in data['axis'].items():
        levels[int(bits, 2)] = level
    return levels


QAM16_SCALE = 1 / np.sqrt(10)
QAM16_RADII = np.sqrt(np.array([2.0, 10.0, 18.0]) / 10)


def qam16_constellation():
    """Los 16 puntos indexados por el nibble (bits I en la parte alta)."""
    levels = gray_table()
    nibbles = np.arange(16)
    return (levels[nibbles >> 2] + 1j * levels[nibbles & 3]) * QAM16_SCALE


def map_16qam(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % BITS_PER_SYMBOL:
        raise DspError(f"El número de bits ({bits.size}) no es múltiplo de 4.")
    groups = bits.reshape(-1, BITS_PER_SYMBOL)
    levels = gray_table()
    i_idx = groups[:, 0] * 2 + groups[:, 1]
    q_idx = groups[:, 2] * 2 + groups[:, 3]
    return (levels[i_idx] + 1j * levels[q_idx]) * QAM16_SCALE


def _slice_axis(values):
    # decisión por umbrales en {-2, 0, 2} sobre la rejilla sin escalar
    levels = gray_table()
    code_of_grid = np.empty(4, dtype=np.uint8)
    code_of_grid[((levels + 3) // 2).astype(int)] = np.arange(4)
    idx = np.clip(np.round((values + 3) / 2), 0, 3).astype(int)
    return code_of_grid[idx]


def demap_16qam(symbols):
    """Decisión dura por vecino más cercano; devuelve 4 bits por símbolo."""
    symbols = np.asarray(symbols, dtype=np.complex128) / QAM16_SCALE
    i_code = _slice_axis(symbols.real)
    q_code = _slice_axis(symbols.imag)
    bits = np.empty((symbols.size, BITS_PER_SYMBOL), dtype=np.uint8)
    bits[:, 0] = i_code >> 1
    bits[:, 1] = i_code & 1
    bits[:, 2] = q_code >> 1
    bits[:, 3] = q_code & 1
    return bits.reshape(-1)


def decide_16qam(symbols):
    """Punto de la constelación más cercano a cada símbolo."""
    scaled = np.asarray(symbols, dtype=np.complex128) / QAM16_SCALE
    i = np.clip(2 * np.round((scaled.real + 3) / 2) - 3, -3, 3)
    q = np.clip(2 * np.round((scaled.imag + 3) / 2) - 3, -3, 3)
    return (i + 1j * q) * QAM16_SCALE


# =========================
# DSCM
# =========================

@dataclass(frozen=True)
class DscmConfig:
    total_baud: float
    num_subcarriers: int = 4
    rolloff: float = 0.1
    guard_band: float = 0.0
    sps: int = 2

    def __post_init__(self):
        if self.num_subcarriers < 1:
            raise DspError("Se necesita al menos una subportadora.")
        if self.total_baud <= 0:
            raise DspError("total_baud debe ser positivo.")
        if not 0 <= self.rolloff <= 1:
            raise DspError(f"Roll-off {self.rolloff} fuera de [0, 1].")
        if self.guard_band < 0:
            raise SpectralOverlapError(
                f"guard_band = {self.guard_band} Hz solapa subportadoras vecinas."
            )
        edge = np.max(np.abs(self.centers)) + self.subcarrier_baud * (1 + self.rolloff) / 2
        if edge >= self.sample_rate / 2:
            raise NyquistViolation(
                f"El borde espectral ({edge / 1e9:.3f} GHz) supera Nyquist "
                f"({self.sample_rate / 2e9:.3f} GHz)."
            )

    @property
    def subcarrier_baud(self):
        return self.total_baud / self.num_subcarriers

    @property
    def sample_rate(self):
        return self.total_baud * self.sps

    @property
    def subcarrier_sps(self):
        return self.sps * self.num_subcarriers

    @property
    def spacing(self):
        return self.subcarrier_baud * (1 + self.rolloff) + self.guard_band

    @property
    def centers(self):
        idx = np.arange(self.num_subcarriers)
        return (idx - (self.num_subcarriers - 1) / 2) * self.spacing

    @property
    def occupied_bandwidth(self):
        return self.num_subcarriers * self.spacing - self.guard_band


@dataclass(frozen=True, eq=False)
class FramePayload:
    """Bits y símbolos con forma (polarización, subportadora, muestra)."""

    bits: np.ndarray
    symbols: np.ndarray
    seed: int

    @property
    def num_subcarriers(self):
        return self.symbols.shape[1]

    @property
    def num_symbols(self):
        return self.symbols.shape[2]


def make_payload(num_symbols, num_subcarriers, seed, prbs_order=DEFAULT_PRBS_ORDER):
    rng = np.random.default_rng(seed)
    seeds = rng.integers(1, 2 ** prbs_order, size=(2, num_subcarriers))
    bits = np.empty((2, num_subcarriers, num_symbols * BITS_PER_SYMBOL), dtype=np.uint8)
    symbols = np.empty((2, num_subcarriers, num_symbols), dtype=np.complex128)
    for pol in range(2):
        for sc in range(num_subcarriers):
            bits[pol, sc] = generate_prbs(prbs_order, int(seeds[pol, sc]), bits.shape[2])
            symbols[pol, sc] = map_16qam(bits[pol, sc])
    return FramePayload(bits=bits, symbols=symbols, seed=seed)


def _build_polarization(streams, cfg):
    total = None
    for symbols, center in zip(streams, cfg.centers):
        block = rrc_shape(symbols, cfg.rolloff, cfg.subcarrier_sps, cfg.subcarrier_baud)
        shifted = frequency_shift(block, center).samples
        total = shifted if total is None else total + shifted
    power = np.mean(np.abs(total) ** 2)
    return total / np.sqrt(power)


def build_dscm(payload, cfg):
    if payload.num_subcarriers != cfg.num_subcarriers:
        raise DspError(
            f"El payload trae {payload.num_subcarriers} subportadoras y la "
            f"configuración {cfg.num_subcarriers}."
        )
    x = _build_polarization(payload.symbols[0], cfg)
    y = _build_polarization(payload.symbols[1], cfg)
    logger.debug(
        "[TX] DSCM %d SC x %.3f GBd, muestras=%d",
        cfg.num_subcarriers, cfg.subcarrier_baud / 1e9, x.size,
    )
    return DualPolWaveform.from_arrays(x, y, cfg.sample_rate)


# =========================
# Pilotos
# =========================

class PilotScheme(str, Enum):
    SPT = 'SPT'
    DPT = 'DPT'
    MGPD_TRAINING = 'MGPD_TRAINING'
    NONE = 'NONE'


@dataclass(frozen=True)
class PilotDescriptor:
    scheme: PilotScheme = PilotScheme.SPT
    f1: float = 0.0
    f2: float | None = None
    psr_db: float = -10.0

    def __post_init__(self):
        object.__setattr__(self, 'scheme', PilotScheme(self.scheme))
        if self.scheme == PilotScheme.DPT:
            if self.f2 is None:
                raise DspError("DPT necesita f2.")
            if self.f1 == self.f2:
                raise DspError("DPT necesita f1 != f2.")

    @property
    def frequencies(self):
        if self.scheme == PilotScheme.DPT:
            return (self.f1, self.f2)
        if self.scheme == PilotScheme.NONE:
            return ()
        return (self.f1,)


def pilot_amplitude(signal_power, psr_db):
    return np.sqrt(10 ** (psr_db / 10) * signal_power)


def check_pilot_positions(p, cfg):
    """
    Un piloto sobre el centro de una subportadora es un error; dentro de su
    banda -3 dB solo se avisa.
    """
    for freq in p.frequencies:
        distance = np.min(np.abs(cfg.centers - freq))
        if distance < PILOT_CENTER_TOLERANCE * cfg.subcarrier_baud:
            raise SpectralOverlapError(
                f"Piloto en {freq / 1e9:.3f} GHz sobre el centro de una subportadora."
            )
        if distance < cfg.subcarrier_baud / 2:
            logger.warning(
                "[TX] Piloto en %.3f GHz dentro de la banda -3 dB de una subportadora "
                "(a %.3f GHz del centro).", freq / 1e9, distance / 1e9,
            )


def pilot_waveform(w, p):
    """Componentes (X, Y) que ``insert_pilots`` suma a la señal."""
    n, fs = len(w), w.sample_rate
    px = np.zeros(n, dtype=np.complex128)
    py = np.zeros(n, dtype=np.complex128)
    for freq in p.frequencies:
        if abs(freq) >= fs / 2:
            raise NyquistViolation(f"Piloto en {freq:.4g} Hz fuera de Nyquist.")

    if p.scheme == PilotScheme.SPT:
        px = pilot_amplitude(w.x.power, p.psr_db) * tone(n, p.f1, fs)
    elif p.scheme == PilotScheme.DPT:
        px = pilot_amplitude(w.x.power, p.psr_db) * tone(n, p.f1, fs)
        py = pilot_amplitude(w.y.power, p.psr_db) * tone(n, p.f2, fs)
    elif p.scheme == PilotScheme.MGPD_TRAINING:
        # coseno real: amplitud total A repartida en ±f1
        amp = pilot_amplitude(w.x.power, p.psr_db) * np.sqrt(2)
        px = amp * np.cos(2 * np.pi * p.f1 * np.arange(n) / fs) + 0j
    return px, py


def insert_pilots(w, p, cfg=None):
    if p.scheme == PilotScheme.NONE:
        return w
    if cfg is not None:
        check_pilot_positions(p, cfg)
    px, py = pilot_waveform(w, p)
    y = w.y if p.scheme != PilotScheme.DPT else ComplexBlock(w.y.samples + py, w.sample_rate)
    return DualPolWaveform(ComplexBlock(w.x.samples + px, w.sample_rate), y)


def generate_mgpd_training(f1, duration, sample_rate, amplitude=1.0):
    """Coseno real A·cos(2πf1·t) en X y ceros en Y."""
    if f1 <= 0:
        raise DspError("La frecuencia del tono de entrenamiento debe ser positiva.")
    if f1 >= sample_rate / 2:
        raise NyquistViolation(f"f1 = {f1:.4g} Hz fuera de Nyquist.")
    n = int(round(duration * sample_rate))
    cycles = f1 * n / sample_rate
    if abs(cycles - round(cycles)) > 1e-6:
        raise OffGridToneError(
            f"f1 = {f1:.6g} Hz no cae en un bin de la FFT de {n} muestras "
            f"({cycles:.4f} ciclos)."
        )
    x = amplitude * np.cos(2 * np.pi * f1 * np.arange(n) / sample_rate)
    return DualPolWaveform.from_arrays(x, np.zeros(n), sample_rate)
