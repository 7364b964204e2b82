"""
Tipos de valor y operaciones primitivas en el dominio de muestras.

Todo el laboratorio trabaja por bloques: cada bloque lleva su propia
frecuencia de muestreo y las operaciones rechazan mezclas de frecuencias en
lugar de remuestrear de forma implícita.
"""
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import AliasingError, DspError, NyquistViolation, SampleRateMismatch

# Muestras descartadas en cada extremo de un bloque al medir (bordes de la FFT)
GUARD_SAMPLES = 256

# Extensión del filtro RRC en símbolos
RRC_SPAN_SYMBOLS = 32

# Fracción máxima de potencia fuera del nuevo Nyquist al diezmar
ALIAS_POWER_LIMIT = 1e-3


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1:
        raise DspError(f"Se esperaba un flujo 1-D, llegó forma {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise DspError("El flujo contiene valores no finitos (NaN/Inf).")
    arr.setflags(write=False)
    return arr


def _check_rate(sample_rate):
    if not np.isfinite(sample_rate) or sample_rate <= 0:
        raise DspError(f"Frecuencia de muestreo inválida: {sample_rate}.")
    return float(sample_rate)


@dataclass(frozen=True, eq=False)
class ComplexBlock:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, 'samples', _frozen(self.samples, np.complex128))
        object.__setattr__(self, 'sample_rate', _check_rate(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return len(self) / self.sample_rate

    @property
    def time(self):
        return np.arange(len(self)) / self.sample_rate

    @property
    def power(self):
        return float(np.mean(np.abs(self.samples) ** 2)) if len(self) else 0.0


@dataclass(frozen=True, eq=False)
class DualPolWaveform:
    """Par de flujos complejos X/Y con una frecuencia de muestreo común."""

    x: ComplexBlock
    y: ComplexBlock

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise DspError(
                f"X e Y deben tener la misma longitud ({len(self.x)} != {len(self.y)})."
            )
        if self.x.sample_rate != self.y.sample_rate:
            raise SampleRateMismatch(
                f"X a {self.x.sample_rate} Hz e Y a {self.y.sample_rate} Hz."
            )

    @classmethod
    def from_arrays(cls, x, y, sample_rate):
        return cls(ComplexBlock(x, sample_rate), ComplexBlock(y, sample_rate))

    def __len__(self):
        return len(self.x)

    @property
    def sample_rate(self):
        return self.x.sample_rate

    @property
    def total_power(self):
        return self.x.power + self.y.power

    def stack(self):
        return np.vstack([self.x.samples, self.y.samples])

    def with_samples(self, x, y):
        return DualPolWaveform.from_arrays(x, y, self.sample_rate)


@dataclass(frozen=True, eq=False)
class QuadTributaryCapture:
    """Las cuatro tributarias reales XI/XQ/YI/YQ después de la fotodetección."""

    xi: np.ndarray
    xq: np.ndarray
    yi: np.ndarray
    yq: np.ndarray
    sample_rate: float

    def __post_init__(self):
        rails = {}
        for name in ('xi', 'xq', 'yi', 'yq'):
            rails[name] = _frozen(getattr(self, name), np.float64)
            object.__setattr__(self, name, rails[name])
        if len({arr.size for arr in rails.values()}) != 1:
            raise DspError("Las cuatro tributarias deben tener la misma longitud.")
        object.__setattr__(self, 'sample_rate', _check_rate(self.sample_rate))

    def __len__(self):
        return self.xi.size


def tone(n, frequency, sample_rate):
    """e^{j2πfn/fs} para n = 0..N-1."""
    return np.exp(2j * np.pi * frequency * np.arange(n) / sample_rate)


def frequency_shift(block, delta_f):
    if abs(delta_f) >= block.sample_rate / 2:
        raise NyquistViolation(
            f"Desplazamiento {delta_f:.4g} Hz fuera de ±{block.sample_rate / 2:.4g} Hz."
        )
    if delta_f == 0:
        return block
    return ComplexBlock(
        block.samples * tone(len(block), delta_f, block.sample_rate),
        block.sample_rate,
    )


def _delay_samples(values, tau, sample_rate):
    if not np.all(np.isfinite(values)) or not np.isfinite(tau):
        raise DspError("Retardo fraccional con valores no finitos.")
    if tau == 0:
        return values
    n = values.size
    if np.isrealobj(values):
        freqs = np.fft.rfftfreq(n, d=1 / sample_rate)
        ramp = np.exp(-2j * np.pi * freqs * tau)
        if n % 2 == 0:
            # el bin de Nyquist es su propio conjugado
            ramp[-1] = np.cos(2 * np.pi * freqs[-1] * tau)
        return np.fft.irfft(np.fft.rfft(values) * ramp, n=n)
    freqs = np.fft.fftfreq(n, d=1 / sample_rate)
    return np.fft.ifft(np.fft.fft(values) * np.exp(-2j * np.pi * freqs * tau))


def fractional_delay(stream, tau, sample_rate=None):
    """
    Retardo fraccional exacto por rampa de fase lineal sobre todo el bloque.

    Acepta un ``ComplexBlock`` o un arreglo real/complejo (en ese caso hace
    falta ``sample_rate``). Una entrada real devuelve una salida real.
    """
    if isinstance(stream, ComplexBlock):
        return ComplexBlock(
            _delay_samples(stream.samples, tau, stream.sample_rate),
            stream.sample_rate,
        )
    if sample_rate is None:
        raise DspError("fractional_delay sobre un arreglo necesita sample_rate.")
    return _delay_samples(np.asarray(stream), tau, _check_rate(sample_rate))


def _rrc_impulse(t, rolloff):
    if rolloff == 0:
        return np.sinc(t)
    h = np.empty_like(t)
    center = t == 0
    edge = np.isclose(np.abs(t), 1 / (4 * rolloff))
    rest = ~(center | edge)

    h[center] = 1 + rolloff * (4 / np.pi - 1)
    h[edge] = rolloff / np.sqrt(2) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * rolloff))
        + (1 - 2 / np.pi) * np.cos(np.pi / (4 * rolloff))
    )
    tr = t[rest]
    h[rest] = (
        np.sin(np.pi * tr * (1 - rolloff))
        + 4 * rolloff * tr * np.cos(np.pi * tr * (1 + rolloff))
    ) / (np.pi * tr * (1 - (4 * rolloff * tr) ** 2))
    return h


def rrc_taps(rolloff, sps, span=RRC_SPAN_SYMBOLS):
    """Coeficientes RRC de energía unitaria, ``span * sps + 1`` taps."""
    if not 0 <= rolloff <= 1:
        raise DspError(f"Roll-off {rolloff} fuera de [0, 1].")
    if int(sps) != sps or sps < 2:
        raise DspError(f"sps debe ser un entero >= 2 (llegó {sps}).")
    sps = int(sps)
    half = span * sps // 2
    t = np.arange(-half, half + 1) / sps
    taps = _rrc_impulse(t, rolloff)
    return taps / np.sqrt(np.sum(taps ** 2))


def rrc_shape(symbols, rolloff, sps, symbol_rate):
    """Sobremuestrea por ``sps`` y filtra con el RRC; devuelve el bloque conformado."""
    taps = rrc_taps(rolloff, sps)
    symbols = np.asarray(symbols, dtype=np.complex128)
    upsampled = np.zeros(symbols.size * int(sps), dtype=np.complex128)
    upsampled[::int(sps)] = symbols
    shaped = signal.fftconvolve(upsampled, taps, mode='same')
    return ComplexBlock(shaped, symbol_rate * sps)


def matched_filter(block, rolloff, sps):
    """Filtro adaptado RRC sobre un bloque a ``sps`` muestras por símbolo."""
    taps = rrc_taps(rolloff, sps)
    filtered = signal.fftconvolve(block.samples, taps[::-1], mode='same')
    return ComplexBlock(filtered, block.sample_rate)


def _output_length(n, old_rate, new_rate):
    exact = n * new_rate / old_rate
    rounded = int(round(exact))
    if abs(exact - rounded) > 1e-6:
        raise DspError(
            f"La razón {new_rate:.6g}/{old_rate:.6g} no da un número entero de "
            f"muestras para un bloque de {n}."
        )
    return rounded


def resample(block, new_rate):
    """Conversión de frecuencia limitada en banda (FFT sobre todo el bloque)."""
    new_rate = _check_rate(new_rate)
    if new_rate == block.sample_rate:
        return block
    n_out = _output_length(len(block), block.sample_rate, new_rate)
    if new_rate < block.sample_rate:
        spectrum = np.abs(np.fft.fft(block.samples)) ** 2
        freqs = np.fft.fftfreq(len(block), d=1 / block.sample_rate)
        outside = spectrum[np.abs(freqs) >= new_rate / 2].sum()
        total = spectrum.sum()
        if total > 0 and outside / total > ALIAS_POWER_LIMIT:
            raise AliasingError(
                f"Diezmar a {new_rate:.4g} Hz plegaría {outside / total:.2%} "
                "de la potencia dentro de banda."
            )
    return ComplexBlock(signal.resample(block.samples, n_out), new_rate)


def decimate(block, factor):
    """Toma una de cada ``factor`` muestras; el llamador garantiza la banda."""
    if int(factor) != factor or factor < 1:
        raise DspError(f"Factor de diezmado inválido: {factor}.")
    if factor == 1:
        return block
    return ComplexBlock(block.samples[::int(factor)], block.sample_rate / factor)
