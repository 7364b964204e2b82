"""
Modelo de canal: fibra (CD, PMD), RSOP/PDL variable en el tiempo, láseres,
carga de ruido (OSNR) y el front-end del receptor con sus cuatro tributarias.
"""
import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import constants

from .core import DualPolWaveform, QuadTributaryCapture, fractional_delay
from .errors import DspError, SampleRateMismatch, TrajectoryLengthError

logger = logging.getLogger(__name__)

# Ancho de banda de referencia del OSNR (0.1 nm), ambas polarizaciones
OSNR_REFERENCE_BW = 12.5e9

# D en ps/(nm·km) -> s/m²
PS_NM_KM = 1e-12 / (1e-9 * 1e3)


# =========================
# Parámetros
# =========================

@dataclass(frozen=True)
class RsopPdlParams:
    pdl_db: float = 0.0
    alpha0: float = 0.0
    beta0: float = 0.0
    eta0: float = 0.0
    omega: float = 0.0
    dgd: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.pdl_db):
            raise DspError("pdl_db debe ser finito.")
        if self.omega < 0:
            raise DspError("La velocidad de RSOP (omega) no puede ser negativa.")
        if self.dgd < 0:
            raise DspError("El DGD no puede ser negativo.")

    @property
    def gamma(self):
        ratio = 10 ** (self.pdl_db / 10)
        return (ratio - 1) / (ratio + 1)


@dataclass(frozen=True)
class LinkParams:
    fiber_km: float = 80.0
    dispersion_ps_nm_km: float = 17.0
    center_wavelength_nm: float = 1550.0
    linewidth_hz: float = 100e3
    freq_offset_hz: float = 0.0
    osnr_db: float = float('inf')

    def __post_init__(self):
        if self.fiber_km < 0:
            raise DspError("fiber_km no puede ser negativo.")
        if not self.osnr_db > 0:
            raise DspError("osnr_db debe ser positivo (o inf para desactivar el ruido).")

    @property
    def combined_linewidth(self):
        # láser de transmisión + oscilador local
        return 2 * self.linewidth_hz

    @property
    def dispersion_phase_coefficient(self):
        """πDλ²L/c en s², de modo que H(f) = exp(±j·coef·f²)."""
        wavelength = self.center_wavelength_nm * 1e-9
        return (
            np.pi * self.dispersion_ps_nm_km * PS_NM_KM * wavelength ** 2
            * self.fiber_km * 1e3 / constants.c
        )


@dataclass(frozen=True)
class FrontEndImpairments:
    tau_rxi: float = 0.0
    tau_rxq: float = 0.0
    tau_ryi: float = 0.0
    tau_ryq: float = 0.0
    tau_txi: float = 0.0
    amp_imb_x_db: float = 0.0
    amp_imb_y_db: float = 0.0
    phase_imb_x_deg: float = 0.0
    phase_imb_y_deg: float = 0.0

    @property
    def rx_xy_skew(self):
        return self.tau_ryi - self.tau_rxi


@dataclass(frozen=True)
class ImpairmentConfig:
    link: LinkParams = field(default_factory=LinkParams)
    rsop: RsopPdlParams = field(default_factory=RsopPdlParams)
    frontend: FrontEndImpairments = field(default_factory=FrontEndImpairments)


# =========================
# Trayectoria de Jones
# =========================

@dataclass(frozen=True, eq=False)
class JonesTrajectory:
    """
    Serie de matrices 2x2. ``decimation`` indica cuántas muestras de la forma
    de onda cubre cada matriz; ``degenerate`` marca las muestras no confiables.
    """

    matrices: np.ndarray
    sample_rate: float
    decimation: int = 1
    degenerate: np.ndarray | None = None

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=np.complex128)
        if mats.ndim != 3 or mats.shape[1:] != (2, 2):
            raise DspError(f"Se esperaban matrices (n, 2, 2), llegó {mats.shape}.")
        if mats.flags.writeable:
            mats = mats.copy()
            mats.setflags(write=False)
        object.__setattr__(self, 'matrices', mats)
        flags = (
            np.zeros(mats.shape[0], dtype=bool) if self.degenerate is None
            else np.asarray(self.degenerate, dtype=bool)
        )
        if flags.shape != (mats.shape[0],):
            raise DspError("La máscara de degenerados no coincide con la trayectoria.")
        object.__setattr__(self, 'degenerate', flags)

    @classmethod
    def static(cls, matrix, n, sample_rate):
        mats = np.broadcast_to(np.asarray(matrix, dtype=np.complex128), (n, 2, 2))
        return cls(mats, sample_rate)

    def __len__(self):
        return self.matrices.shape[0]

    @property
    def xx(self):
        return self.matrices[:, 0, 0]

    @property
    def xy(self):
        return self.matrices[:, 0, 1]

    @property
    def yx(self):
        return self.matrices[:, 1, 0]

    @property
    def yy(self):
        return self.matrices[:, 1, 1]

    @property
    def det(self):
        return self.xx * self.yy - self.xy * self.yx

    @property
    def degenerate_count(self):
        return int(self.degenerate.sum())


def jones_trajectory(p, n, fs):
    if n < 1:
        raise DspError("La trayectoria necesita al menos una muestra.")
    delta = p.omega * np.arange(n) / fs
    alpha = p.alpha0 + delta
    beta = p.beta0 + delta
    eta = p.eta0 + delta

    rsop = np.empty((n, 2, 2), dtype=np.complex128)
    rsop[:, 0, 0] = np.cos(alpha) * np.exp(1j * beta)
    rsop[:, 0, 1] = -np.sin(alpha) * np.exp(1j * eta)
    rsop[:, 1, 0] = np.sin(alpha) * np.exp(-1j * eta)
    rsop[:, 1, 1] = np.cos(alpha) * np.exp(-1j * beta)

    # PDL estático, aplicado a la izquierda de la rotación
    gamma = p.gamma
    pdl = np.array([np.sqrt(1 + gamma), np.sqrt(1 - gamma)])
    return JonesTrajectory(pdl[None, :, None] * rsop, fs)


def apply_polarization_channel(w, traj):
    n = len(w)
    if traj.decimation != 1:
        raise DspError("El canal necesita una trayectoria a tasa completa.")
    if len(traj) < n:
        raise TrajectoryLengthError(
            f"Trayectoria de {len(traj)} matrices para {n} muestras."
        )
    if traj.sample_rate != w.sample_rate:
        raise SampleRateMismatch(
            f"Trayectoria a {traj.sample_rate} Hz y forma de onda a {w.sample_rate} Hz."
        )
    m = traj.matrices[:n]
    x, y = w.x.samples, w.y.samples
    return w.with_samples(
        m[:, 0, 0] * x + m[:, 0, 1] * y,
        m[:, 1, 0] * x + m[:, 1, 1] * y,
    )


# =========================
# Fibra
# =========================

def _spectral_filter(samples, fs, response):
    freqs = np.fft.fftfreq(samples.size, d=1 / fs)
    return np.fft.ifft(np.fft.fft(samples) * response(freqs))


def apply_pmd(w, dgd):
    """Factor DGD de primer orden: ejes X/Y adelantados/atrasados τ/2."""
    if dgd == 0:
        return w
    fs = w.sample_rate
    return w.with_samples(
        _spectral_filter(w.x.samples, fs, lambda f: np.exp(1j * np.pi * f * dgd)),
        _spectral_filter(w.y.samples, fs, lambda f: np.exp(-1j * np.pi * f * dgd)),
    )


def cd_response(freqs, link, sign):
    return np.exp(sign * 1j * link.dispersion_phase_coefficient * freqs ** 2)


def apply_cd(w, link, sign=1):
    """``sign = +1`` acumula la dispersión de la fibra, ``-1`` la compensa."""
    if sign not in (1, -1):
        raise DspError("sign debe ser +1 (aplicar) o -1 (compensar).")
    if link.fiber_km == 0 or link.dispersion_ps_nm_km == 0:
        return w
    fs = w.sample_rate
    response = partial(cd_response, link=link, sign=sign)
    return w.with_samples(
        _spectral_filter(w.x.samples, fs, response),
        _spectral_filter(w.y.samples, fs, response),
    )


# =========================
# Láseres y ruido
# =========================

def laser_phase(n, fs, link, rng):
    """Fase 2πΔf·t + φ(t) con φ un proceso de Wiener."""
    phase = 2 * np.pi * link.freq_offset_hz * np.arange(n) / fs
    if link.combined_linewidth > 0:
        sigma = np.sqrt(2 * np.pi * link.combined_linewidth / fs)
        phase = phase + np.cumsum(rng.normal(0.0, sigma, n))
    return phase


def apply_laser(w, link, rng=None):
    if link.combined_linewidth == 0 and link.freq_offset_hz == 0:
        return w
    rng = np.random.default_rng(rng)
    rotor = np.exp(1j * laser_phase(len(w), w.sample_rate, link, rng))
    return w.with_samples(w.x.samples * rotor, w.y.samples * rotor)


def noise_power_for_osnr(signal_power, osnr_db, fs):
    """Potencia total de ruido (ambas polarizaciones) en el ancho de banda simulado."""
    return signal_power / 10 ** (osnr_db / 10) * (fs / OSNR_REFERENCE_BW)


def set_osnr(w, osnr_db, rng=None):
    if np.isinf(osnr_db):
        return w
    rng = np.random.default_rng(rng)
    n = len(w)
    per_pol = noise_power_for_osnr(w.total_power, osnr_db, w.sample_rate) / 2
    scale = np.sqrt(per_pol / 2)
    noise = rng.normal(0.0, scale, (2, n)) + 1j * rng.normal(0.0, scale, (2, n))
    return w.with_samples(w.x.samples + noise[0], w.y.samples + noise[1])


def measure_osnr(clean, noisy):
    """OSNR en dB referido a 12.5 GHz a partir de la señal limpia y la ruidosa."""
    noise = noisy.stack() - clean.stack()
    noise_power = np.sum(np.mean(np.abs(noise) ** 2, axis=1))
    return 10 * np.log10(
        clean.total_power / noise_power * clean.sample_rate / OSNR_REFERENCE_BW
    )


def propagate(w, imp, rng=None):
    """Fibra completa: PMD, RSOP/PDL, CD, láseres y ruido, en ese orden."""
    rng = np.random.default_rng(rng)
    w = apply_pmd(w, imp.rsop.dgd)
    w = apply_polarization_channel(w, jones_trajectory(imp.rsop, len(w), w.sample_rate))
    w = apply_cd(w, imp.link, sign=1)
    w = apply_laser(w, imp.link, rng)
    w = set_osnr(w, imp.link.osnr_db, rng)
    logger.debug(
        "[CANAL] Ω=%.3g rad/s PDL=%.2f dB L=%.0f km OSNR=%.1f dB",
        imp.rsop.omega, imp.rsop.pdl_db, imp.link.fiber_km, imp.link.osnr_db,
    )
    return w


# =========================
# Front-end del receptor
# =========================

def apply_tx_i_delay(w, tau_txi):
    """Retarda solo la tributaria I de la polarización X en el transmisor."""
    if tau_txi == 0:
        return w
    x = w.x.samples
    xi = fractional_delay(x.real, tau_txi, w.sample_rate)
    return w.with_samples(xi + 1j * x.imag, w.y.samples)


def _iq_imbalance(i, q, amp_db, phase_deg):
    if amp_db == 0 and phase_deg == 0:
        return q
    g = 10 ** (amp_db / 20)
    theta = np.deg2rad(phase_deg)
    return g * (q * np.cos(theta) - i * np.sin(theta))


def apply_rx_frontend(w, imp):
    fs = w.sample_rate
    rails = {
        'xi': (w.x.samples.real, imp.tau_rxi),
        'xq': (w.x.samples.imag, imp.tau_rxq),
        'yi': (w.y.samples.real, imp.tau_ryi),
        'yq': (w.y.samples.imag, imp.tau_ryq),
    }
    delayed = {
        name: fractional_delay(values, tau, fs) for name, (values, tau) in rails.items()
    }
    xq = _iq_imbalance(delayed['xi'], delayed['xq'], imp.amp_imb_x_db, imp.phase_imb_x_deg)
    yq = _iq_imbalance(delayed['yi'], delayed['yq'], imp.amp_imb_y_db, imp.phase_imb_y_deg)
    return QuadTributaryCapture(
        xi=delayed['xi'], xq=xq, yi=delayed['yi'], yq=yq, sample_rate=fs,
    )


def recombine(q):
    return DualPolWaveform.from_arrays(q.xi + 1j * q.xq, q.yi + 1j * q.yq, q.sample_rate)
