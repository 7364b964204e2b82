"""
Errores de la librería DSP.

Cada error lleva un ``code`` corto que el arnés copia a la columna
``diagnostics`` cuando un punto del barrido falla.
"""


class DspError(ValueError):
    code = 'dsp_error'


class SampleRateMismatch(DspError):
    code = 'sample_rate_mismatch'


class NyquistViolation(DspError):
    code = 'nyquist_violation'


class AliasingError(DspError):
    code = 'aliasing'


class OffGridToneError(DspError):
    code = 'off_grid_tone'


class UnsupportedPrbsOrder(DspError):
    code = 'unsupported_prbs_order'


class SpectralOverlapError(DspError):
    code = 'spectral_overlap'


class TrajectoryLengthError(DspError):
    code = 'trajectory_length'


class PilotNotFoundError(DspError):
    code = 'pilot_not_found'


class InsufficientCrosstalkError(DspError):
    code = 'insufficient_polarization_crosstalk'


class SyncFailedError(DspError):
    code = 'sync_failed'


class EqualizerDivergedError(DspError):
    code = 'equalizer_diverged'
