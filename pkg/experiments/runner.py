"""
Ejecución de escenarios: un ensayo por (punto del barrido, semilla), en serie
o repartidos en un pool de procesos, con las filas siempre en orden de barrido.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from dsp.errors import DspError
from dsp.link import run_calibration_trial, run_link_trial
from dsp.mgpd import run_obtb_calibration

from .results import ResultRow
from .scenario import apply_point, expand_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trial:
    cfg: object
    point: object
    seed: int


def _build_row(cfg, trial, outcome=None, error=None):
    frontend, rsop = cfg.impairments.frontend, cfg.impairments.rsop
    calibration_mode = cfg.mode == 'calibration'
    diagnostics = {}
    ber = q_db = skew_est_ps = None

    if outcome is not None:
        diagnostics.update(outcome.diagnostics)
        if outcome.ber is not None:
            ber, q_db = outcome.ber.ber, outcome.ber.q_db
            diagnostics['bits'] = outcome.ber.bits
            diagnostics['errors'] = outcome.ber.errors
            if outcome.ber.low_confidence:
                diagnostics['low_confidence'] = True
        if outcome.skew is not None:
            skew_est_ps = outcome.skew.tau_xy * 1e12
            diagnostics['tone_snr_x_db'] = outcome.skew.tone_snr_x_db
            diagnostics['tone_snr_y_db'] = outcome.skew.tone_snr_y_db
    if error is not None:
        diagnostics['error'] = getattr(error, 'code', type(error).__name__)
        diagnostics['detail'] = str(error)
    if trial.point.extras:
        diagnostics['axes'] = {paths[0]: value for paths, value in trial.point.extras}

    return ResultRow(
        scenario=cfg.name,
        seed=trial.seed,
        sweep_axis=cfg.sweep.axis if cfg.sweep is not None else '',
        sweep_value=trial.point.value,
        osnr_db=cfg.calibration.osnr_db if calibration_mode else cfg.impairments.link.osnr_db,
        rsop_rad_s=rsop.omega,
        pdl_db=rsop.pdl_db,
        rx_xy_skew_ps=frontend.rx_xy_skew * 1e12,
        scheme='MGPD' if calibration_mode else cfg.scheme,
        ber=ber,
        q_db=q_db,
        skew_est_ps=skew_est_ps,
        diagnostics=diagnostics,
    )


def run_trial(trial):
    """Un ensayo autocontenido; el fallo de cualquier etapa queda en la fila."""
    cfg = trial.cfg
    try:
        cfg = apply_point(cfg, trial.point)
        setup = cfg.link_setup()
        if cfg.mode == 'calibration':
            outcome = run_calibration_trial(setup, trial.seed)
        else:
            outcome = run_link_trial(setup, trial.seed)
    except DspError as exc:
        logger.warning(
            "[ESCENARIO] %s: punto %d, semilla %d falló (%s): %s",
            cfg.name, trial.point.index, trial.seed, exc.code, exc,
        )
        return _build_row(cfg, trial, error=exc)
    except Exception as exc:
        # cualquier otro fallo de una etapa también queda en la fila
        logger.exception(
            "[ESCENARIO] %s: punto %d, semilla %d falló (%s)",
            cfg.name, trial.point.index, trial.seed, type(exc).__name__,
        )
        return _build_row(cfg, trial, error=exc)
    return _build_row(cfg, trial, outcome)


def build_trials(cfg):
    return [Trial(cfg, point, seed) for point in expand_points(cfg) for seed in cfg.seeds]


def run_scenario(cfg, jobs=1, on_row=None):
    """
    Ejecuta todos los ensayos del escenario. Cada semilla se reutiliza en
    todos los puntos del barrido, así las curvas comparten carga útil y ruido.
    ``on_row`` recibe cada fila en orden en cuanto está lista.
    """
    trials = build_trials(cfg)
    logger.info(
        "[ESCENARIO] %s: %d ensayos (%d semillas), jobs=%d",
        cfg.name, len(trials), len(cfg.seeds), jobs,
    )
    if not trials:
        return []

    rows = []
    executor = ProcessPoolExecutor(max_workers=min(jobs, len(trials))) if jobs > 1 else None
    try:
        outcomes = executor.map(run_trial, trials) if executor else map(run_trial, trials)
        for row in outcomes:
            rows.append(row)
            if on_row is not None:
                on_row(row)
    finally:
        if executor is not None:
            executor.shutdown()

    failed = sum(row.failed for row in rows)
    if failed:
        logger.warning("[ESCENARIO] %s: %d de %d filas con error", cfg.name, failed, len(rows))
    return rows


def calibration_report(frontend, calibration, seed=None):
    """Calibración OBTB aislada: informe del estimador más el error frente al skew real."""
    estimate = run_obtb_calibration(
        frontend,
        calibration.rotation,
        calibration.f1,
        calibration.duration,
        calibration.osnr_db,
        seed=seed,
    )
    report = estimate.to_report()
    report['true_skew_ps'] = frontend.rx_xy_skew * 1e12
    report['error_ps'] = report['tau_xy_ps'] - report['true_skew_ps']
    return report
