"""
Cadena de recepción: demultiplexado de subportadoras, CDC por subportadora,
retiming, sincronización, ecualizadores CMMA (SISO y MIMO 2x2), BPS y BER.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal, special

from .channel import cd_response
from .core import decimate, frequency_shift, matched_filter
from .errors import DspError, EqualizerDivergedError, SyncFailedError
from .tx import QAM16_RADII, decide_16qam

logger = logging.getLogger(__name__)

SYNC_PEAK_RATIO = 5.0
DIVERGENCE_FACTOR = 100.0
SINGULARITY_CORRELATION = 0.9
MIN_CONFIDENT_BITS = 100_000

# puntos de 16QAM en cada anillo, de menor a mayor radio
RING_POPULATION = np.array([4, 8, 4])


# =========================
# Subportadoras
# =========================

def demux_subcarriers(w, cfg):
    """
    Flujos en banda base a 2 muestras/símbolo, forma (pol, subportadora, muestra).

    El filtro adaptado se aplica a tasa completa y luego se diezma: para un
    bloque limitado en banda equivale a remuestrear y filtrar.
    """
    if cfg.subcarrier_sps % 2:
        raise DspError(
            f"Se necesitan muestras/símbolo pares por subportadora para bajar a 2 "
            f"(llegó {cfg.subcarrier_sps})."
        )
    factor = cfg.subcarrier_sps // 2
    out = None
    for p, block in enumerate((w.x, w.y)):
        for s, center in enumerate(cfg.centers):
            shifted = frequency_shift(block, -center)
            filtered = matched_filter(shifted, cfg.rolloff, cfg.subcarrier_sps)
            stream = decimate(filtered, factor).samples
            if out is None:
                out = np.empty((2, cfg.num_subcarriers, stream.size), dtype=np.complex128)
            out[p, s] = stream
    return out


def compensate_cd_subcarrier(stream, fs, link, center):
    """CDC en la frecuencia óptica real (f + centro), incluye el retardo de grupo."""
    if link.fiber_km == 0 or link.dispersion_ps_nm_km == 0:
        return np.asarray(stream)
    freqs = np.fft.fftfreq(len(stream), d=1 / fs)
    return np.fft.ifft(np.fft.fft(stream) * cd_response(freqs + center, link, -1))


def retime(stream):
    """Elige la fase 2->1 de mayor potencia; devuelve (flujo desde esa fase, fase)."""
    stream = np.asarray(stream)
    powers = [np.mean(np.abs(stream[phase::2]) ** 2) for phase in (0, 1)]
    phase = int(np.argmax(powers))
    aligned = stream[phase:]
    return aligned[:aligned.size // 2 * 2], phase


def normalize_power(stream):
    """Escala para potencia unitaria en los instantes de símbolo."""
    power = np.mean(np.abs(stream[::2]) ** 2)
    if power == 0:
        raise DspError("Flujo sin potencia.")
    return stream / np.sqrt(power)


# =========================
# Sincronización
# =========================

@dataclass(frozen=True, eq=False)
class SyncResult:
    rx: np.ndarray
    ref: np.ndarray
    lag: int
    peak_ratio: float


def synchronize(rx_symbols, ref_symbols, max_lag=None):
    """
    Retardo entero con la convención ``rx[n] = ref[n - lag]`` a partir de la
    correlación cruzada de |símbolos| (sin media). Recorta ambos al solape.
    """
    rx = np.asarray(rx_symbols)
    ref = np.asarray(ref_symbols)
    a = np.abs(rx) - np.mean(np.abs(rx))
    b = np.abs(ref) - np.mean(np.abs(ref))
    corr = signal.correlate(a, b, mode='full', method='fft')
    lags = signal.correlation_lags(a.size, b.size, mode='full')
    if max_lag is None:
        max_lag = min(a.size, b.size) // 4
    window = np.abs(lags) <= max_lag
    corr, lags = corr[window], lags[window]

    k = int(np.argmax(corr))
    floor = np.sqrt(np.mean(corr ** 2))
    ratio = float(corr[k] / floor) if floor > 0 else 0.0
    if ratio < SYNC_PEAK_RATIO:
        raise SyncFailedError(
            f"Pico de correlación {ratio:.2f}x el piso (mínimo {SYNC_PEAK_RATIO:.0f}x)."
        )
    lag = int(lags[k])
    if lag >= 0:
        rx = rx[lag:]
    else:
        ref = ref[-lag:]
    n = min(rx.size, ref.size)
    return SyncResult(rx=rx[:n], ref=ref[:n], lag=lag, peak_ratio=ratio)


# =========================
# Ecualizadores
# =========================

@dataclass(frozen=True)
class EqualizerConfig:
    taps: int = 15
    mu_cma: float = 1e-3
    mu_cmma: float = 1e-4
    cma_pretrain_symbols: int = 20_000
    radii: tuple = field(default_factory=lambda: tuple(QAM16_RADII))

    def __post_init__(self):
        if self.taps < 1 or self.taps % 2 == 0:
            raise DspError(f"El número de taps debe ser impar (llegó {self.taps}).")
        if len(self.radii) != 3:
            raise DspError("El CMMA de 16QAM usa exactamente tres radios.")
        if np.any(np.diff(self.radii) <= 0):
            raise DspError("Los radios del CMMA deben ser estrictamente crecientes.")
        object.__setattr__(self, 'radii', tuple(float(r) for r in self.radii))

    @property
    def cma_radius_sq(self):
        """R² = E|s|⁴ / E|s|² sobre la constelación de anillos."""
        radii = np.asarray(self.radii)
        weights = RING_POPULATION
        m2 = np.sum(weights * radii ** 2) / weights.sum()
        m4 = np.sum(weights * radii ** 4) / weights.sum()
        return m4 / m2


def _windows(stream, taps):
    """Ventanas de ``taps`` muestras centradas en cada instante de símbolo (índices pares)."""
    half = taps // 2
    padded = np.concatenate([np.zeros(half), np.asarray(stream), np.zeros(half)])
    return sliding_window_view(padded, taps)[::2]


def _nearest_radius_sq(modulus, radii):
    return radii[np.argmin(np.abs(radii - modulus))] ** 2


def equalize_siso_cmma(symbols, cfg=None):
    """Ecualizador fraccionario T/2: CMA de preconvergencia y luego CMMA por radio."""
    cfg = cfg or EqualizerConfig()
    X = _windows(symbols, cfg.taps)
    radii = np.asarray(cfg.radii)
    r2_cma = cfg.cma_radius_sq
    w = np.zeros(cfg.taps, dtype=np.complex128)
    w[cfg.taps // 2] = 1.0
    limit = DIVERGENCE_FACTOR * np.linalg.norm(w)

    out = np.empty(X.shape[0], dtype=np.complex128)
    for k in range(X.shape[0]):
        x = X[k]
        y = w @ x
        out[k] = y
        if k < cfg.cma_pretrain_symbols:
            mu, target = cfg.mu_cma, r2_cma
        else:
            mu, target = cfg.mu_cmma, _nearest_radius_sq(abs(y), radii)
        w -= mu * (abs(y) ** 2 - target) * y * np.conj(x)
        if not np.isfinite(w).all() or np.linalg.norm(w) > limit:
            raise EqualizerDivergedError(f"Taps divergentes en el símbolo {k}.")
    return out


@dataclass(frozen=True, eq=False)
class MimoResult:
    x: np.ndarray
    y: np.ndarray
    singular: bool
    correlation: float


def equalize_mimo_cmma(x, y, cfg=None):
    """
    Mariposa 2x2 fraccionaria. La rama X preconverge sola durante la mitad
    del entrenamiento CMA; entonces los taps de Y se inicializan ortogonales.
    """
    cfg = cfg or EqualizerConfig()
    X = _windows(x, cfg.taps)
    Y = _windows(y, cfg.taps)
    n = min(X.shape[0], Y.shape[0])
    radii = np.asarray(cfg.radii)
    r2_cma = cfg.cma_radius_sq
    center = cfg.taps // 2

    wxx = np.zeros(cfg.taps, dtype=np.complex128)
    wxx[center] = 1.0
    wxy = np.zeros(cfg.taps, dtype=np.complex128)
    wyx = np.zeros(cfg.taps, dtype=np.complex128)
    wyy = np.zeros(cfg.taps, dtype=np.complex128)
    wyy[center] = 1.0
    limit = DIVERGENCE_FACTOR * np.sqrt(2)
    y_start = cfg.cma_pretrain_symbols // 2

    out_x = np.empty(n, dtype=np.complex128)
    out_y = np.empty(n, dtype=np.complex128)
    for k in range(n):
        xk, yk = X[k], Y[k]
        if k == y_start:
            wyx = -np.conj(wxy[::-1])
            wyy = np.conj(wxx[::-1])
        if k < cfg.cma_pretrain_symbols:
            mu = cfg.mu_cma
        else:
            mu = cfg.mu_cmma

        ox = wxx @ xk + wxy @ yk
        oy = wyx @ xk + wyy @ yk
        out_x[k], out_y[k] = ox, oy

        if k < cfg.cma_pretrain_symbols:
            tx = ty = r2_cma
        else:
            tx = _nearest_radius_sq(abs(ox), radii)
            ty = _nearest_radius_sq(abs(oy), radii)

        ex = mu * (abs(ox) ** 2 - tx) * ox
        wxx -= ex * np.conj(xk)
        wxy -= ex * np.conj(yk)
        if k >= y_start:
            ey = mu * (abs(oy) ** 2 - ty) * oy
            wyx -= ey * np.conj(xk)
            wyy -= ey * np.conj(yk)

        for branch, taps in (('X', (wxx, wxy)), ('Y', (wyx, wyy))):
            norm = np.sqrt(sum(np.linalg.norm(t) ** 2 for t in taps))
            if not np.isfinite(norm) or norm > limit:
                raise EqualizerDivergedError(
                    f"Taps MIMO de la rama {branch} divergentes en el símbolo {k}."
                )

    tail = slice(cfg.cma_pretrain_symbols, n) if n > cfg.cma_pretrain_symbols else slice(0, n)
    a, b = out_x[tail], out_y[tail]
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    correlation = float(np.abs(np.vdot(a, b)) / denom) if denom > 0 else 0.0
    singular = correlation > SINGULARITY_CORRELATION
    if singular:
        logger.warning("[RX] Singularidad CMA: correlación entre salidas %.3f", correlation)
    return MimoResult(x=out_x, y=out_y, singular=singular, correlation=correlation)


# =========================
# Recuperación de fase
# =========================

@dataclass(frozen=True, eq=False)
class BpsResult:
    symbols: np.ndarray
    phases: np.ndarray
    quadrant: int


def bps_carrier_recovery(symbols, num_test_phases=32, block=64, reference=None):
    """
    Búsqueda ciega de fase por bloques. Con ``reference`` resuelve la
    ambigüedad de π/2 contra los símbolos conocidos.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    n = symbols.size
    test = -np.pi / 4 + (np.pi / 2) * np.arange(num_test_phases) / num_test_phases
    rotated = symbols[None, :] * np.exp(1j * test)[:, None]
    distance = np.abs(rotated - decide_16qam(rotated)) ** 2

    num_blocks = -(-n // block)
    padded = np.zeros((num_test_phases, num_blocks * block))
    padded[:, :n] = distance
    per_block = padded.reshape(num_test_phases, num_blocks, block).sum(axis=2)
    phases = np.unwrap(test[np.argmin(per_block, axis=0)], period=np.pi / 2)

    recovered = symbols * np.exp(1j * np.repeat(phases, block)[:n])
    quadrant = 0
    if reference is not None:
        reference = np.asarray(reference)
        decided = [decide_16qam(recovered * 1j ** q) for q in range(4)]
        errors = [np.count_nonzero(np.abs(d - reference) > 1e-6) for d in decided]
        quadrant = int(np.argmin(errors))
        recovered = recovered * 1j ** quadrant
    return BpsResult(symbols=recovered, phases=phases, quadrant=quadrant)


# =========================
# BER
# =========================

@dataclass(frozen=True)
class BerCell:
    errors: int
    bits: int

    @property
    def ber(self):
        return self.errors / self.bits if self.bits else float('nan')


def q_factor_db(ber):
    """Q = 20·log10(√2·erfcinv(2·BER)); inf sin errores, NaN si BER >= 0.5."""
    if ber == 0:
        return float('inf')
    if not 0 < ber < 0.5:
        return float('nan')
    return float(20 * np.log10(np.sqrt(2) * special.erfcinv(2 * ber)))


@dataclass(frozen=True)
class BerReport:
    cells: dict
    low_confidence: bool = False
    notes: tuple = ()

    @property
    def errors(self):
        return sum(cell.errors for cell in self.cells.values())

    @property
    def bits(self):
        return sum(cell.bits for cell in self.cells.values())

    @property
    def ber(self):
        return self.errors / self.bits if self.bits else float('nan')

    @property
    def q_db(self):
        return q_factor_db(self.ber)

    def to_dict(self):
        return {
            'ber': self.ber,
            'q_db': self.q_db,
            'bits': self.bits,
            'errors': self.errors,
            'low_confidence': self.low_confidence,
            'cells': [
                {'pol': pol, 'subcarrier': sc, 'errors': c.errors, 'bits': c.bits, 'ber': c.ber}
                for (pol, sc), c in sorted(self.cells.items())
            ],
            'notes': list(self.notes),
        }


def measure_ber(decided_bits, ref_bits, notes=()):
    """
    Compara bits exactos. Acepta arreglos o diccionarios ``{(pol, sc): bits}``
    con las mismas claves.
    """
    if not isinstance(decided_bits, dict):
        decided_bits, ref_bits = {('X', 0): decided_bits}, {('X', 0): ref_bits}
    if decided_bits.keys() != ref_bits.keys():
        raise DspError("Las celdas de bits decididos y de referencia no coinciden.")

    cells = {}
    for key, decided in decided_bits.items():
        decided = np.asarray(decided, dtype=np.uint8)
        ref = np.asarray(ref_bits[key], dtype=np.uint8)
        if decided.shape != ref.shape:
            raise DspError(f"Longitudes distintas en la celda {key}.")
        cells[key] = BerCell(errors=int(np.count_nonzero(decided != ref)), bits=ref.size)

    total = sum(cell.bits for cell in cells.values())
    return BerReport(
        cells=cells,
        low_confidence=total < MIN_CONFIDENT_BITS,
        notes=tuple(notes),
    )
