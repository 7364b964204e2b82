"""
Motor de tonos piloto: estimación de offset de frecuencia, extracción de
pilotos, estimación de la matriz de Jones (DPT y SPT), su inversa y el
predictor analítico de la corrupción por skew XY del receptor.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .channel import JonesTrajectory
from .core import tone
from .errors import DspError, PilotNotFoundError

logger = logging.getLogger(__name__)

# Umbral de detección del piloto sobre la mediana espectral
PILOT_DETECTION_DB = 10.0

# Muestras con |det| por debajo de esto se marcan como degeneradas (DPT)
DEGENERATE_DET = 1e-3

# Potencia de piloto (relativa a la mediana) por debajo de la cual se da por perdido (SPT)
PILOT_LOST_RATIO = 1e-3

WELCH_SEGMENT = 4096


@dataclass(frozen=True, eq=False)
class PilotTrace:
    """
    Piloto bajado a banda base, filtrado y diezmado.

    La muestra k está centrada en ``(k*D + (D-1)/2) / sample_rate``, con
    ``sample_rate`` la tasa completa de la forma de onda.
    """

    values: np.ndarray
    source_pol: str
    pilot_freq: float
    sample_rate: float
    decimation: int = 1

    def __len__(self):
        return self.values.size

    @property
    def positions(self):
        """Posición de cada muestra en la rejilla de tasa completa."""
        d = self.decimation
        return np.arange(len(self)) * d + (d - 1) / 2


@dataclass(frozen=True)
class ExtractorConfig:
    lpf_bandwidth_hz: float = 100e6
    lpf_kind: str = 'fir'
    decimation: int = 64
    num_taps: int = 255
    foe_search_span_hz: float = 2e9

    LPF_KINDS = ('fir', 'single-pole', 'moving-average')

    def __post_init__(self):
        if self.lpf_kind not in self.LPF_KINDS:
            raise DspError(
                f"lpf_kind '{self.lpf_kind}' no soportado; use uno de {self.LPF_KINDS}."
            )
        if self.lpf_bandwidth_hz <= 0:
            raise DspError("lpf_bandwidth_hz debe ser positivo.")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise DspError("decimation debe ser un entero >= 1.")

    def check_rsop(self, omega):
        """Avisa si el filtro no deja pasar la dinámica de la RSOP con margen 10."""
        needed = omega / (2 * np.pi) * 10
        if self.lpf_bandwidth_hz <= needed:
            logger.warning(
                "[PILOTO] B=%.3g Hz no cubre Ω=%.3g rad/s con margen 10 (se necesita > %.3g Hz)",
                self.lpf_bandwidth_hz, omega, needed,
            )
            return False
        return True


# =========================
# Offset de frecuencia
# =========================

def _welch_power(w):
    nperseg = min(WELCH_SEGMENT, len(w))
    freqs, pxx = signal.welch(
        w.x.samples, fs=w.sample_rate, window='hann', nperseg=nperseg,
        return_onesided=False, detrend=False,
    )
    _, pyy = signal.welch(
        w.y.samples, fs=w.sample_rate, window='hann', nperseg=nperseg,
        return_onesided=False, detrend=False,
    )
    return freqs, pxx + pyy


def _parabolic_offset(left, center, right):
    denom = left - 2 * center + right
    if denom == 0:
        return 0.0
    return 0.5 * (left - right) / denom


def estimate_frequency_offset(w, expected_f1, search_span=2e9, expected_f2=None):
    """
    Offset Δf del piloto respecto de su frecuencia nominal.

    Detección con el periodograma de Welch (pico >= 10 dB sobre la mediana de
    la ventana) y refinamiento con el periodograma de todo el bloque más una
    parábola sobre la log-potencia. Con ``expected_f2`` (DPT) se busca el
    desplazamiento común de ambos tonos.
    """
    fs = w.sample_rate
    freqs, psd = _welch_power(w)
    window = np.abs(freqs - expected_f1) <= search_span
    if not window.any():
        raise PilotNotFoundError("La ventana de búsqueda no contiene bins.")
    peak = psd[window].max()
    floor = np.median(psd[window])
    if floor > 0 and 10 * np.log10(peak / floor) < PILOT_DETECTION_DB:
        raise PilotNotFoundError(
            f"Sin piloto cerca de {expected_f1 / 1e9:.3f} GHz "
            f"(pico {10 * np.log10(peak / floor):.1f} dB sobre la mediana)."
        )
    if peak == 0:
        raise PilotNotFoundError("Espectro nulo en la ventana de búsqueda.")

    n = len(w)
    power = np.abs(np.fft.fft(w.x.samples)) ** 2 + np.abs(np.fft.fft(w.y.samples)) ** 2
    bin_hz = fs / n
    span_bins = int(np.floor(search_span / bin_hz))
    offsets = np.arange(-span_bins, span_bins + 1)

    score = power[(int(round(expected_f1 / bin_hz)) + offsets) % n]
    if expected_f2 is not None:
        score = score + power[(int(round(expected_f2 / bin_hz)) + offsets) % n]

    k = int(np.argmax(score))
    delta = 0.0
    if 0 < k < score.size - 1:
        tiny = np.finfo(float).tiny
        delta = _parabolic_offset(*np.log(score[k - 1:k + 2] + tiny))
    base = round(expected_f1 / bin_hz) * bin_hz - expected_f1
    estimate = base + (offsets[k] + delta) * bin_hz
    logger.debug("[PILOTO] FOE: Δf=%.4f MHz", estimate / 1e6)
    return float(estimate)


# =========================
# Extracción
# =========================

def _lowpass(values, cfg, rate):
    if cfg.lpf_bandwidth_hz >= rate / 2:
        raise DspError(
            f"B={cfg.lpf_bandwidth_hz:.3g} Hz no cabe en la tasa diezmada ({rate:.3g} Hz)."
        )
    if cfg.lpf_kind == 'fir':
        b = signal.firwin(cfg.num_taps, cfg.lpf_bandwidth_hz, fs=rate)
        a = np.array([1.0])
    elif cfg.lpf_kind == 'single-pole':
        b, a = signal.butter(1, cfg.lpf_bandwidth_hz, fs=rate)
    else:
        # ancho -3 dB de un promedio móvil de M muestras ≈ 0.443·rate/M
        m = max(1, int(round(0.443 * rate / cfg.lpf_bandwidth_hz)))
        b = np.ones(m) / m
        a = np.array([1.0])
    padlen = min(3 * max(len(a), len(b)), values.size - 1)
    return signal.filtfilt(b, a, values, padtype='odd', padlen=padlen)


def _integrate_and_dump(values, decimation):
    usable = values.size // decimation * decimation
    return values[:usable].reshape(-1, decimation).mean(axis=1)


def extract_pilot(w, f, cfg=None):
    """Baja ambas polarizaciones en ``f``, integra-y-descarga y filtra."""
    cfg = cfg or ExtractorConfig()
    d = int(cfg.decimation)
    if len(w) < 2 * d:
        raise DspError("Bloque demasiado corto para el diezmado del extractor.")
    mixer = np.conj(tone(len(w), f, w.sample_rate))
    rate = w.sample_rate / d
    traces = []
    for pol, block in (('X', w.x), ('Y', w.y)):
        base = _integrate_and_dump(block.samples * mixer, d)
        traces.append(PilotTrace(
            values=_lowpass(base, cfg, rate),
            source_pol=pol,
            pilot_freq=f,
            sample_rate=w.sample_rate,
            decimation=d,
        ))
    return traces[0], traces[1]


def remove_pilot(w, freqs, cfg=None):
    """Resta de ambas polarizaciones la componente extraída alrededor de cada piloto."""
    cfg = cfg or ExtractorConfig()
    n = len(w)
    x, y = w.x.samples, w.y.samples
    for f in freqs:
        tx, ty = extract_pilot(w, f, cfg)
        carrier = tone(n, f, w.sample_rate)
        x = x - _to_full_rate(tx.values, tx.positions, n) * carrier
        y = y - _to_full_rate(ty.values, ty.positions, n) * carrier
    return w.with_samples(x, y)


# =========================
# Estimación de Jones
# =========================

def _check_common_grid(*traces):
    first = traces[0]
    for trace in traces[1:]:
        if len(trace) != len(first) or trace.decimation != first.decimation:
            raise DspError("Las trazas de piloto no comparten la misma rejilla temporal.")


def estimate_jones_dpt(px1, py1, px2, py2):
    _check_common_grid(px1, py1, px2, py2)
    mats = np.empty((len(px1), 2, 2), dtype=np.complex128)
    mats[:, 0, 0], mats[:, 1, 0] = px1.values, py1.values
    mats[:, 0, 1], mats[:, 1, 1] = px2.values, py2.values

    norms = np.sqrt(np.sum(np.abs(mats) ** 2, axis=1))
    mats = mats / np.where(norms > 0, norms, 1.0)[:, None, :]
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    degenerate = np.abs(det) < DEGENERATE_DET
    if degenerate.any():
        logger.debug("[PILOTO] DPT: %d muestras degeneradas", int(degenerate.sum()))
    return JonesTrajectory(mats, px1.sample_rate, px1.decimation, degenerate)


def estimate_jones_spt(px, py):
    """Ĵ = [[p_x, -p_y*], [p_y, p_x*]] / sqrt(|p_x|² + |p_y|²), det Ĵ = 1."""
    _check_common_grid(px, py)
    a, b = px.values, py.values
    power = np.abs(a) ** 2 + np.abs(b) ** 2
    lost = power <= PILOT_LOST_RATIO * np.median(power)
    scale = np.sqrt(np.where(power > 0, power, 1.0))

    mats = np.empty((a.size, 2, 2), dtype=np.complex128)
    mats[:, 0, 0] = a / scale
    mats[:, 0, 1] = -np.conj(b) / scale
    mats[:, 1, 0] = b / scale
    mats[:, 1, 1] = np.conj(a) / scale
    if lost.any():
        logger.debug("[PILOTO] SPT: piloto perdido en %d muestras", int(lost.sum()))
    return JonesTrajectory(mats, px.sample_rate, px.decimation, lost)


def hold_over(traj):
    """Sustituye cada muestra degenerada por la última válida; devuelve (trayectoria, reparadas)."""
    flags = traj.degenerate
    repaired = int(flags.sum())
    if repaired == 0:
        return traj, 0
    n = len(traj)
    if repaired == n:
        logger.warning("[PILOTO] Toda la trayectoria es degenerada; se usa la identidad.")
        mats = np.broadcast_to(np.eye(2, dtype=np.complex128), (n, 2, 2))
        return JonesTrajectory(mats, traj.sample_rate, traj.decimation), repaired

    idx = np.where(~flags, np.arange(n), -1)
    idx = np.maximum.accumulate(idx)
    idx[idx < 0] = int(np.argmax(~flags))
    return (
        JonesTrajectory(traj.matrices[idx], traj.sample_rate, traj.decimation),
        repaired,
    )


def _to_full_rate(values, positions, n):
    grid = np.arange(n)
    return np.interp(grid, positions, values.real) + 1j * np.interp(grid, positions, values.imag)


def _full_rate_matrices(traj, n):
    if traj.decimation == 1:
        if len(traj) < n:
            raise DspError("La trayectoria es más corta que la forma de onda.")
        return traj.matrices[:n]
    d = traj.decimation
    positions = np.arange(len(traj)) * d + (d - 1) / 2
    mats = np.empty((n, 2, 2), dtype=np.complex128)
    for r in range(2):
        for c in range(2):
            mats[:, r, c] = _to_full_rate(traj.matrices[:, r, c], positions, n)
    return mats


def inverse_matrices(mats):
    """Inversa por adjunta / det; para estimaciones SPT det = 1 y queda la adjunta."""
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    det = np.where(det != 0, det, 1.0)
    inv = np.empty_like(mats)
    inv[:, 0, 0] = mats[:, 1, 1] / det
    inv[:, 0, 1] = -mats[:, 0, 1] / det
    inv[:, 1, 0] = -mats[:, 1, 0] / det
    inv[:, 1, 1] = mats[:, 0, 0] / det
    return inv


def apply_inverse_jones(w, traj):
    traj, repaired = hold_over(traj)
    if repaired:
        logger.info("[PILOTO] %d muestras de Jones mantenidas (hold-over)", repaired)
    inv = inverse_matrices(_full_rate_matrices(traj, len(w)))
    x, y = w.x.samples, w.y.samples
    return w.with_samples(
        inv[:, 0, 0] * x + inv[:, 0, 1] * y,
        inv[:, 1, 0] * x + inv[:, 1, 1] * y,
    )


def predict_skewed_jones(J, tau_xy, f1, f2=None):
    """
    Estimación de Jones que produce un skew XY ``tau_xy`` en el receptor.

    Con ``f2`` (DPT) la fila inferior se rota columna a columna; sin ``f2`` se
    devuelve la forma SPT construida a partir de la primera columna rotada.
    """
    J = np.asarray(J, dtype=np.complex128)
    r1 = np.exp(-2j * np.pi * f1 * tau_xy)
    if f2 is not None:
        r2 = np.exp(-2j * np.pi * f2 * tau_xy)
        return np.array([
            [J[0, 0], J[0, 1]],
            [J[1, 0] * r1, J[1, 1] * r2],
        ])
    jyx = J[1, 0] * r1
    return np.array([
        [J[0, 0], -np.conj(jyx)],
        [jyx, np.conj(J[0, 0])],
    ])


def demux_polarization(w, scheme, f1, f2=None, cfg=None):
    """Extrae los pilotos del esquema, estima Ĵ y aplica la inversa. Devuelve (w, Ĵ, reparadas)."""
    cfg = cfg or ExtractorConfig()
    px1, py1 = extract_pilot(w, f1, cfg)
    if scheme == 'DPT':
        px2, py2 = extract_pilot(w, f2, cfg)
        traj = estimate_jones_dpt(px1, py1, px2, py2)
    else:
        traj = estimate_jones_spt(px1, py1)
    traj, repaired = hold_over(traj)
    return apply_inverse_jones(w, traj), traj, repaired

