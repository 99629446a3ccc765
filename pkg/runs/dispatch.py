import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from characteristics.paths import PathFollower, integrating_factor
from characteristics.riccati import dual_mode_deviation, gradient_crosscheck, riccati_evolve
from damping.coefficients import check_assumptions
from euler_lifespan.errors import FitFailure, MissingHistoryError, SimulationError
from lifespan.blowup import simulate
from lifespan.serializers import BlowupReportSerializer, ScalingFitSerializer
from lifespan.sweep import run_sweep
from oracle.conservative import compare_solvers
from solver.grid import Grid1D
from .reports import emit_report, path_frame, sweep_frame, timeseries_frame
from .serializers import (CheckDampingSerializer, OracleCompareSerializer, SweepRowSerializer,
                          TraceSummarySerializer)

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("simulate", "trace", "sweep", "check-damping", "oracle-compare")
DEFAULT_ORACLE_GRIDS = (2001, 4001, 8001)


@dataclass
class DispatchResult:
    exit_code: int = 0
    artifacts: list = field(default_factory=list)
    error: Optional[SimulationError] = None


def _simulate(config, out_dir, options):
    result = simulate(config)
    report = result.report
    emit_report(out_dir, {
        "timeseries.csv": timeseries_frame(result.series),
        "report.json": BlowupReportSerializer(report).data,
    }, config.output.precision)
    if report.stopped_cause in ("vacuum", "instability"):
        return 2
    if report.fit_error:
        return 3
    return 0


def _trace(config, out_dir, options):
    sign = options.get("sign") or "+"
    x0 = config.initial.x0 if options.get("x0") is None else float(options["x0"])
    mode = options.get("mode") or "differential"
    form = options.get("form") or "derived"
    follower = PathFollower(sign, x0)
    result = simulate(config, observers=(follower,))
    if len(follower) == 0:
        raise MissingHistoryError("the traced characteristic saw no solver level")
    law, spec = config.law(), config.damping
    path = follower.path()
    integrating_factor(path, spec)
    g_stop = config.solver.g_stop
    state = riccati_evolve(path, law, spec, mode=mode, form=form, g_stop=g_stop)
    summary = {
        "sign": "+" if path.sign > 0 else "-",
        "x0": x0,
        "mode": mode,
        "form": form,
        "samples": len(path),
        "exited": path.exited,
        "blowup": state.blowup,
        "blowup_time": state.blowup_time,
        "max_A": float(np.max(path.A)),
        "min_A": float(np.min(path.A)),
        "crosscheck": gradient_crosscheck(path, state, config.grid_1d().dx),
        "mode_gap": dual_mode_deviation(path, law, spec, form=form, g_stop=g_stop),
    }
    emit_report(out_dir, {
        "path.csv": path_frame(path, state),
        "trace.json": TraceSummarySerializer(summary).data,
        "report.json": BlowupReportSerializer(result.report).data,
    }, config.output.precision)
    return 0


def _sweep(config, out_dir, options):
    precision = config.output.precision
    try:
        result = run_sweep(config, epsilons=options.get("epsilons"), workers=options.get("workers"))
    except FitFailure as exc:
        emit_report(out_dir, {"sweep.csv": sweep_frame(getattr(exc, "rows", []))}, precision)
        raise
    emit_report(out_dir, {
        "sweep.csv": sweep_frame(result.rows),
        "fit.json": ScalingFitSerializer(result.fit).data,
        "rows.json": SweepRowSerializer(result.rows, many=True).data,
    }, precision)
    return 0


def _check_damping(config, out_dir, options):
    report = check_assumptions(config.damping)
    payload = CheckDampingSerializer({**report.__dict__, "scenario": config.scenario}).data
    emit_report(out_dir, {"damping.json": payload}, config.output.precision)
    return 0


def _oracle_compare(config, out_dir, options):
    t_compare = float(options.get("t_compare") or 0.5)
    grids = tuple(options.get("grids") or DEFAULT_ORACLE_GRIDS)
    data = config.initial_data()
    reach = config.grid.speed_bound * t_compare + data.support_radius + 1.0
    linf_u, linf_v = [], []
    for nx in grids:
        grid = Grid1D(data.x0 - reach, data.x0 + reach, nx)
        du, dv = compare_solvers(grid, config.law(), config.damping, data, t_compare, config.solver.cfl)
        logger.info("oracle compare nx=%d: |du|=%.3e |dv|=%.3e", nx, du, dv)
        linf_u.append(du)
        linf_v.append(dv)
    payload = {"t_compare": t_compare, "linf_u": linf_u, "linf_v": linf_v, "grids": list(grids)}
    emit_report(out_dir, {"oracle_compare.json": OracleCompareSerializer(payload).data},
                config.output.precision)
    return 0


HANDLERS = {
    "simulate": _simulate,
    "trace": _trace,
    "sweep": _sweep,
    "check-damping": _check_damping,
    "oracle-compare": _oracle_compare,
}


def dispatch(subcommand, config, out_dir=None, **options) -> DispatchResult:
    """
    Run one subcommand and write its artifacts under ``out_dir`` (default
    output.dir). Exit codes: 0 success, 1 configuration, 2 runtime
    (vacuum, instability, I/O), 3 fit failure.
    """
    if subcommand not in HANDLERS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    out_dir = Path(out_dir or config.output.dir)
    result = DispatchResult()
    try:
        result.exit_code = HANDLERS[subcommand](config, out_dir, options)
    except SimulationError as exc:
        logger.error("%s failed: %s", subcommand, exc)
        result.exit_code = exc.exit_code
        result.error = exc
    if out_dir.exists():
        result.artifacts = sorted(p.name for p in out_dir.iterdir())
    return result
