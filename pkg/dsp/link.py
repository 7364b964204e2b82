"""
Compone el enlace completo (transmisor, canal, front-end, calibración
opcional y cadena de recepción) para una realización con su propia semilla.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ImpairmentConfig,
    RsopPdlParams,
    apply_rx_frontend,
    apply_tx_i_delay,
    propagate,
    recombine,
)
from .core import frequency_shift
from .errors import DspError, SyncFailedError
from .mgpd import DEFAULT_DURATION, DEFAULT_F1, compensate_rx_xy_skew, run_obtb_calibration
from .polaris import ExtractorConfig, demux_polarization, estimate_frequency_offset, remove_pilot
from .rx import (
    EqualizerConfig,
    bps_carrier_recovery,
    compensate_cd_subcarrier,
    demux_subcarriers,
    equalize_mimo_cmma,
    equalize_siso_cmma,
    measure_ber,
    normalize_power,
    retime,
    synchronize,
)
from .tx import (
    DscmConfig,
    PilotDescriptor,
    PilotScheme,
    build_dscm,
    demap_16qam,
    insert_pilots,
    make_payload,
)

logger = logging.getLogger(__name__)

LINK_SCHEMES = ('SPT', 'DPT', 'MIMO_CMMA', 'NONE')
POLS = ('X', 'Y')
GUARD_SYMBOLS = 64


@dataclass(frozen=True)
class CalibrationConfig:
    enabled: bool = False
    f1: float = DEFAULT_F1
    duration: float = DEFAULT_DURATION
    osnr_db: float = float('inf')
    rotation: RsopPdlParams = field(default_factory=lambda: RsopPdlParams(alpha0=np.pi / 4))


@dataclass(frozen=True)
class LinkSetup:
    dscm: DscmConfig
    scheme: str = 'SPT'
    pilots: PilotDescriptor = field(default_factory=PilotDescriptor)
    impairments: ImpairmentConfig = field(default_factory=ImpairmentConfig)
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    symbols_per_subcarrier: int = 2 ** 15
    guard_symbols: int = GUARD_SYMBOLS

    def __post_init__(self):
        if self.scheme not in LINK_SCHEMES:
            raise DspError(f"Esquema '{self.scheme}' desconocido; use uno de {LINK_SCHEMES}.")
        if self.scheme in ('SPT', 'DPT') and self.pilots.scheme != PilotScheme(self.scheme):
            raise DspError(
                f"El esquema {self.scheme} necesita pilotos {self.scheme} "
                f"(llegó {self.pilots.scheme.value})."
            )


@dataclass
class TrialOutcome:
    ber: object = None
    skew: object = None
    diagnostics: dict = field(default_factory=dict)


def _child_seed(rng):
    return int(rng.integers(0, 2 ** 32))


def _compensate_frequency_offset(w, setup, diag):
    pilots = setup.pilots
    if setup.scheme in ('SPT', 'DPT'):
        f2 = pilots.f2 if setup.scheme == 'DPT' else None
        offset = estimate_frequency_offset(
            w, pilots.f1, setup.extractor.foe_search_span_hz, expected_f2=f2,
        )
        diag['foe'] = 'pilot'
    else:
        # sin piloto no hay referencia espectral: se usa el offset configurado
        offset = setup.impairments.link.freq_offset_hz
        diag['foe'] = 'genie'
    diag['foe_hz'] = offset
    diag['foe_error_hz'] = offset - setup.impairments.link.freq_offset_hz
    if offset == 0:
        return w
    return w.with_samples(
        frequency_shift(w.x, -offset).samples,
        frequency_shift(w.y, -offset).samples,
    )


def _prepare_streams(w, setup):
    dscm, link = setup.dscm, setup.impairments.link
    streams = demux_subcarriers(w, dscm)
    rate = 2 * dscm.subcarrier_baud
    prepared = {}
    for p in range(2):
        for s, center in enumerate(dscm.centers):
            stream = compensate_cd_subcarrier(streams[p, s], rate, link, center)
            stream, _ = retime(stream)
            prepared[(p, s)] = normalize_power(stream)
    return prepared


def _decide_cell(output, reference, setup):
    """Sincroniza, recorta la ventana de medida, BPS y demapeo. Devuelve (bits, bits_ref, meta)."""
    sync = synchronize(output, reference)
    start = max(setup.equalizer.cma_pretrain_symbols - max(sync.lag, 0), 0)
    stop = sync.rx.size - setup.guard_symbols
    if stop <= start:
        raise DspError("No quedan símbolos para medir después del entrenamiento del ecualizador.")
    ref = sync.ref[start:stop]
    bps = bps_carrier_recovery(sync.rx[start:stop], reference=ref)
    meta = {'lag': sync.lag, 'quadrant': bps.quadrant}
    return demap_16qam(bps.symbols), demap_16qam(ref), meta


def _decide_mimo(outputs, payload, s, setup, diag):
    """Asignación genie de las salidas de la mariposa a X/Y (puede intercambiarlas)."""
    best = None
    for swap in (False, True):
        order = (1, 0) if swap else (0, 1)
        try:
            cells = [
                _decide_cell(outputs[order[p]], payload.symbols[p, s], setup) for p in range(2)
            ]
        except SyncFailedError:
            continue
        errors = sum(int(np.count_nonzero(bits != ref)) for bits, ref, _ in cells)
        if best is None or errors < best[0]:
            best = (errors, swap, cells)
    if best is None:
        raise SyncFailedError(f"La subportadora {s} no sincroniza en ninguna asignación.")
    diag.setdefault('pol_swap', {})[s] = best[1]
    return best[2]


def run_link_trial(setup, seed):
    rng = np.random.default_rng(seed)
    dscm, imp = setup.dscm, setup.impairments
    outcome = TrialOutcome()
    diag = outcome.diagnostics

    payload = make_payload(setup.symbols_per_subcarrier, dscm.num_subcarriers, _child_seed(rng))
    w = build_dscm(payload, dscm)
    w = insert_pilots(w, setup.pilots, dscm)
    w = apply_tx_i_delay(w, imp.frontend.tau_txi)
    w = propagate(w, imp, rng)
    capture = apply_rx_frontend(w, imp.frontend)

    if setup.calibration.enabled:
        cal = setup.calibration
        outcome.skew = run_obtb_calibration(
            imp.frontend, cal.rotation, cal.f1, cal.duration, cal.osnr_db,
            seed=_child_seed(rng),
        )
        capture = compensate_rx_xy_skew(capture, outcome.skew)

    w = recombine(capture)
    w = _compensate_frequency_offset(w, setup, diag)

    if setup.scheme in ('SPT', 'DPT'):
        setup.extractor.check_rsop(imp.rsop.omega)
        w, _, repaired = demux_polarization(
            w, setup.scheme, setup.pilots.f1, setup.pilots.f2, setup.extractor,
        )
        diag['jones_repaired'] = repaired
    if setup.pilots.frequencies:
        w = remove_pilot(w, setup.pilots.frequencies, setup.extractor)

    prepared = _prepare_streams(w, setup)
    decided, reference = {}, {}
    lags, quadrants = {}, {}

    for s in range(dscm.num_subcarriers):
        if setup.scheme == 'MIMO_CMMA':
            result = equalize_mimo_cmma(prepared[(0, s)], prepared[(1, s)], setup.equalizer)
            if result.singular:
                diag.setdefault('mimo_singular', []).append(s)
            cells = _decide_mimo((result.x, result.y), payload, s, setup, diag)
        else:
            cells = [
                _decide_cell(
                    equalize_siso_cmma(prepared[(p, s)], setup.equalizer),
                    payload.symbols[p, s],
                    setup,
                )
                for p in range(2)
            ]
        for p, (bits, ref_bits, meta) in enumerate(cells):
            key = (POLS[p], s)
            decided[key], reference[key] = bits, ref_bits
            lags[f'{POLS[p]}{s}'] = meta['lag']
            quadrants[f'{POLS[p]}{s}'] = meta['quadrant']

    diag['lags'] = lags
    diag['quadrants'] = quadrants
    notes = ['cuadrante resuelto con datos conocidos']
    if setup.scheme == 'MIMO_CMMA':
        notes.append('asignación de polarización genie')
    outcome.ber = measure_ber(decided, reference, notes=notes)
    logger.info(
        "[RX] %s: BER=%.3e sobre %d bits", setup.scheme, outcome.ber.ber, outcome.ber.bits,
    )
    return outcome


def run_calibration_trial(setup, seed):
    """Solo la calibración OBTB; el error de estimación va a los diagnósticos."""
    cal, frontend = setup.calibration, setup.impairments.frontend
    outcome = TrialOutcome()
    outcome.skew = run_obtb_calibration(
        frontend, cal.rotation, cal.f1, cal.duration, cal.osnr_db, seed=seed,
    )
    outcome.diagnostics['skew_error_ps'] = (outcome.skew.tau_xy - frontend.rx_xy_skew) * 1e12
    return outcome
