import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.conf import settings
from scipy.stats import linregress

from euler_lifespan.errors import FitFailure, InsufficientDataError, VacuumError
from .blowup import simulate

logger = logging.getLogger(__name__)

MIN_FIT_ROWS = 3
POWER_PREFERENCE = 0.01
MONOTONE_SLACK = 0.05


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    t_stop: float
    t_star: Optional[float]
    stopped_cause: str
    phi_max: float = 0.0
    phi_max_ratio: Optional[float] = None

    @property
    def usable(self):
        return self.stopped_cause == "gradient" and self.t_star is not None


@dataclass(frozen=True)
class ScalingFit:
    model: str
    exponent_or_rate: float
    r_squared: float
    rows_used: int
    intercept: float = 0.0


@dataclass
class SweepResult:
    rows: list
    fit: Optional[ScalingFit] = None
    alternatives: dict = field(default_factory=dict)


def _sweep_row(config) -> SweepRow:
    try:
        report = simulate(config).report
    except VacuumError as exc:
        logger.warning("epsilon=%g rejected: %s", config.initial.epsilon, exc.message)
        return SweepRow(epsilon=config.initial.epsilon, t_stop=0.0, t_star=None, stopped_cause="vacuum")
    return SweepRow(epsilon=report.epsilon, t_stop=report.t_stop, t_star=report.t_star_estimate,
                    stopped_cause=report.stopped_cause, phi_max=report.phi_max,
                    phi_max_ratio=report.phi_max_ratio)


def default_workers():
    return int(getattr(settings, "EULER_LIFESPAN", {}).get("WORKERS", 1) or 1)


def _regression(x, y, model, rows_used):
    try:
        fit = linregress(x, y)
    except ValueError as exc:
        raise FitFailure(f"{model} fit failed: {exc}") from exc
    return ScalingFit(model=model, exponent_or_rate=float(fit.slope),
                      r_squared=float(fit.rvalue ** 2), rows_used=rows_used,
                      intercept=float(fit.intercept))


def fit_scaling(rows):
    """
    Power law log T* ~ p log eps against exponential log T* ~ k / eps. The
    exponential model must beat the power model's R^2 by POWER_PREFERENCE.
    Returns (chosen, {model: fit}).
    """
    used = [row for row in rows if row.usable]
    if len(used) < MIN_FIT_ROWS:
        raise InsufficientDataError(f"{len(used)} gradient-stopped rows, at least {MIN_FIT_ROWS} needed",
                                    rows_used=len(used))
    eps = np.array([row.epsilon for row in used])
    log_t = np.log([row.t_star for row in used])
    power = _regression(np.log(eps), log_t, "power", len(used))
    exponential = _regression(1.0 / eps, log_t, "exponential", len(used))
    chosen = exponential if exponential.r_squared > power.r_squared + POWER_PREFERENCE else power
    logger.info("scaling fit: %s with %.4g (R^2 %.4f; power R^2 %.4f, exponential R^2 %.4f)",
                chosen.model, chosen.exponent_or_rate, chosen.r_squared,
                power.r_squared, exponential.r_squared)
    return chosen, {"power": power, "exponential": exponential}


def run_sweep(config, epsilons=None, workers=None) -> SweepResult:
    """
    Independent simulations per epsilon, fanned out over a process pool, rows
    sorted by decreasing epsilon. Raises InsufficientDataError (carrying the
    rows as ``exc.rows``) when fewer than three runs stopped on the gradient.
    """
    epsilons = config.sweep.epsilons if epsilons is None else epsilons
    epsilons = sorted({float(e) for e in epsilons}, reverse=True)
    workers = default_workers() if workers is None else workers
    configs = [config.with_epsilon(eps) for eps in epsilons]
    logger.info("sweep over %d epsilons with %d workers", len(configs), workers)

    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as pool:
            rows = list(pool.map(_sweep_row, configs))
    else:
        rows = [_sweep_row(c) for c in configs]

    result = SweepResult(rows=rows)
    try:
        result.fit, result.alternatives = fit_scaling(rows)
    except FitFailure as exc:
        exc.rows = rows
        raise
    return result


def is_monotone_nonincreasing(rows, slack=MONOTONE_SLACK):
    """T* does not grow with epsilon beyond ``slack``; rows in any order."""
    usable = sorted((row for row in rows if row.usable), key=lambda row: row.epsilon)
    return all(later.t_star <= earlier.t_star * (1.0 + slack)
               for earlier, later in zip(usable[:-1], usable[1:]))


def phi_ratio_spread(rows):
    """Largest over smallest max_t Phi(t)/Phi(0) across the rows that have one."""
    ratios = [row.phi_max_ratio for row in rows if row.phi_max_ratio]
    if not ratios:
        return math.nan
    return max(ratios) / min(ratios)
