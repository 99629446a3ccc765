"""
Blow-up detection for single runs: the reciprocal-extrapolated life-span,
Phi on the characteristic regions and the location of the final gradient peak.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import linregress

from characteristics.paths import RegionFollower
from euler_lifespan.errors import FitFailure, InstabilityError, VacuumError
from solver.fields import FieldHistory, Monitors, StopCause, init, run_until, sup_norms_on_region

logger = logging.getLogger(__name__)

HOT_FACTOR = 10.0
MIN_HOT_SAMPLES = 8
FIT_WINDOWS = (0.1, 0.2, 0.4)
INTERCEPT_TOLERANCE = 0.1
RICHARDSON_SPREAD = 0.25


def extrapolate_blowup_time(t, g):
    """
    t-intercept of the affine least-squares fit of 1/g over the trailing window
    (10, 20 or 40 percent of the samples) with the smallest RMS residual.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    n = len(t)
    if n == 0 or not g[0] > 0:
        raise FitFailure("initial gradient must be positive for the reciprocal fit")
    hot = int(np.count_nonzero(g > HOT_FACTOR * g[0]))
    if hot < MIN_HOT_SAMPLES:
        raise FitFailure(f"only {hot} samples exceed {HOT_FACTOR:g}x the initial gradient",
                         hot=hot, required=MIN_HOT_SAMPLES)

    best = None
    for fraction in FIT_WINDOWS:
        m = min(n, max(MIN_HOT_SAMPLES, int(round(fraction * n))))
        tw, yw = t[-m:], 1.0 / g[-m:]
        fit = linregress(tw, yw)
        if not fit.slope < 0:
            continue
        rms = float(np.sqrt(np.mean((yw - fit.intercept - fit.slope * tw) ** 2)))
        if best is None or rms < best[0]:
            best = (rms, -fit.intercept / fit.slope, fraction)
    if best is None:
        raise FitFailure("1/g is not decreasing over any fit window")

    _, intercept, fraction = best
    t_stop = float(t[-1])
    if intercept < (1.0 - INTERCEPT_TOLERANCE) * t_stop:
        raise FitFailure(f"extrapolated T* = {intercept:.6g} lies before the stop at {t_stop:.6g}",
                         intercept=intercept, t_stop=t_stop)
    logger.debug("T* = %.6g from the trailing %d%% window", intercept, round(100 * fraction))
    return max(float(intercept), t_stop)


def estimate_T_star(series) -> float:
    if series.stop_cause not in (None, StopCause.GRADIENT):
        raise FitFailure(f"run stopped on {series.stop_cause.value}, not on the gradient monitor")
    return extrapolate_blowup_time(series.column("t"), series.steepness)


def richardson_T_star(fine, coarse, ratio=2.0):
    """
    Two-grid estimate for a life-span whose grid error is first order in dx:
    T = T_fine + (T_fine - T_coarse) / (ratio - 1).
    """
    if not ratio > 1:
        raise FitFailure("refinement ratio must exceed 1", ratio=ratio)
    if abs(fine - coarse) > RICHARDSON_SPREAD * fine:
        raise FitFailure(f"grid estimates {fine:.6g} and {coarse:.6g} are too far apart to extrapolate",
                         fine=fine, coarse=coarse)
    return fine + (fine - coarse) / (ratio - 1.0)


def phi_series(history: FieldHistory, region, law):
    """(t, Phi(t)) for every retained level, Phi = sup|r| + sup|s| over the region."""
    times = history.times
    phi = np.array([sup_norms_on_region(history.level(k, law), region).phi for k in range(len(times))])
    return times, phi


@dataclass(frozen=True)
class BlowupLocation:
    x: float
    inside_region: bool
    quantity: str


def localize_blowup(state, region, tol=None) -> BlowupLocation:
    """Node of the final max(|r_x|, |s_x|) and whether it lies in the region (within 2 dx)."""
    if tol is None:
        tol = 2.0 * state.grid.dx
    i_r = int(np.argmax(np.abs(state.rx)))
    i_s = int(np.argmax(np.abs(state.sx)))
    if abs(state.sx[i_s]) >= abs(state.rx[i_r]):
        i, quantity = i_s, "s_x"
    else:
        i, quantity = i_r, "r_x"
    x = float(state.grid.x[i])
    return BlowupLocation(x=x, inside_region=region.contains(state.t, x, tol), quantity=quantity)


@dataclass
class BlowupReport:
    stopped_cause: str
    t_stop: float
    epsilon: float
    t_star_estimate: Optional[float] = None
    t_star_fine: Optional[float] = None
    t_star_coarse: Optional[float] = None
    gradient_rule: Optional[str] = None
    blowup_node_x: Optional[float] = None
    peak_quantity: Optional[str] = None
    inside_region: Optional[bool] = None
    region: str = "omega"
    phi_max: float = 0.0
    phi_max_ratio: Optional[float] = None
    k_measured: float = 0.0
    kk_satisfied: bool = False
    regime_exits: int = 0
    steps: int = 0
    stop_message: str = ""
    fit_error: Optional[str] = None


@dataclass
class SimulationResult:
    report: BlowupReport
    series: object
    state: object
    region: object
    history: Optional[FieldHistory] = None


def build_report(series, state, region, data, phi=None) -> BlowupReport:
    """
    Report for a finished run. ``phi`` overrides the per-step Phi column, for
    instance with ``phi_series`` over retained levels.
    """
    report = BlowupReport(
        stopped_cause=series.stop_cause.value,
        t_stop=series.t_stop,
        epsilon=data.epsilon,
        gradient_rule=series.gradient_rule.value if series.gradient_rule else None,
        region=region.kind.value,
        k_measured=data.measured_k,
        kk_satisfied=data.kk_satisfied,
        regime_exits=series.regime_exits,
        steps=series.steps,
        stop_message=series.stop_message,
    )
    if phi is None:
        phi = series.column("phi_region")
    if len(phi) and np.all(np.isfinite(phi)):
        report.phi_max = float(np.max(phi))
        report.phi_max_ratio = report.phi_max / phi[0] if phi[0] > 0 else None

    if series.stop_cause is StopCause.GRADIENT:
        try:
            report.t_star_estimate = estimate_T_star(series)
            report.t_star_fine = report.t_star_estimate
        except FitFailure as exc:
            report.fit_error = exc.message
            logger.warning("T* extrapolation rejected: %s", exc.message)
        location = localize_blowup(state, region)
        report.blowup_node_x = location.x
        report.inside_region = location.inside_region
        report.peak_quantity = location.quantity
    return report


def _monitors(solver, **kwargs):
    return Monitors(g_stop=solver.g_stop, resolution_fraction=solver.resolution_fraction,
                    growth_stop=solver.growth_stop, max_steps=solver.max_steps, **kwargs)


def _coarse_T_star(config, grid, law, data):
    """T* of the same run on ``grid``, or None when that run does not yield one."""
    try:
        state = init(grid, law, data)
        _, series = run_until(state, law, config.damping, config.solver.cfl, config.solver.t_max,
                              _monitors(config.solver))
        return estimate_T_star(series)
    except (VacuumError, InstabilityError, FitFailure) as exc:
        logger.warning("coarse-grid T* unavailable: %s", exc)
        return None


def refine_T_star(report, config, grid, law, data):
    """Replace the fine-grid T* by the two-grid estimate when the halved grid agrees closely enough."""
    if (grid.nx - 1) % 2:
        logger.info("odd cell count %d, keeping the single-grid T*", grid.nx - 1)
        return report
    coarse = _coarse_T_star(config, grid.coarsened(2), law, data)
    if coarse is None:
        return report
    report.t_star_coarse = coarse
    try:
        refined = richardson_T_star(report.t_star_fine, coarse)
    except FitFailure as exc:
        logger.warning("keeping the single-grid T*: %s", exc.message)
        return report
    report.t_star_estimate = max(refined, report.t_stop)
    logger.info("T*: fine %.6g, coarse %.6g, two-grid %.6g", report.t_star_fine, coarse, report.t_star_estimate)
    return report


def simulate(config, keep_history=False, observers=()) -> SimulationResult:
    """
    One run of the Riemann-invariant solver for ``config`` up to solver.t_max,
    with the region boundaries followed alongside. Vacuum and instability stops
    become report causes instead of errors. With ``solver.richardson`` a
    gradient stop is repeated on the halved grid and T* is extrapolated in dx.
    ``observers`` receive every accepted level of the main run.
    """
    law = config.law()
    grid = config.grid_1d()
    data = config.initial_data()
    solver = config.solver

    state = init(grid, law, data)
    follower = RegionFollower(data.x0)
    history = FieldHistory(grid, solver.history_stride) if keep_history else None
    monitors = _monitors(solver, history=history, phi_source=follower, observers=tuple(observers))
    logger.info("simulating %s: gamma=%g epsilon=%g nx=%d on [%g, %g]", config.scenario,
                law.gamma, data.epsilon, grid.nx, grid.x_min, grid.x_max)
    try:
        state, series = run_until(state, law, config.damping, solver.cfl, solver.t_max, monitors)
    except (VacuumError, InstabilityError) as exc:
        state, series = exc.state, exc.series

    region = follower.region()
    phi = phi_series(history, region, law)[1] if history is not None else None
    report = build_report(series, state, region, data, phi)
    if solver.richardson and report.t_star_fine is not None:
        refine_T_star(report, config, grid, law, data)
    if report.t_star_estimate is not None and math.isfinite(report.t_star_estimate):
        logger.info("blow-up: T* ~ %.6g (stopped at %.6g)", report.t_star_estimate, report.t_stop)
    return SimulationResult(report=report, series=series, state=state, region=region, history=history)
