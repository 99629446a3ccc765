"""
CSV and JSON emission. CSV columns are fixed per artifact and floats use
``%.{precision}g``; JSON goes through DRF's JSONRenderer with the key order
of the serializer that produced it. Non-finite floats become null.
"""
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from rest_framework.renderers import JSONRenderer

from euler_lifespan.errors import SimulationError
from solver.fields import SERIES_COLUMNS

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("epsilon", "t_stop", "t_star", "stopped_cause")
PATH_COLUMNS = ("t", "x", "u", "c", "r", "s", "a", "A", "Q_or_Y")


def timeseries_frame(series) -> pd.DataFrame:
    return series.to_frame()[list(SERIES_COLUMNS)]


def sweep_frame(rows) -> pd.DataFrame:
    return pd.DataFrame([[getattr(row, name) for name in SWEEP_COLUMNS] for row in rows],
                        columns=list(SWEEP_COLUMNS))


def path_frame(path, riccati) -> pd.DataFrame:
    values = np.full(len(path), np.nan)
    values[:len(riccati.values)] = riccati.values
    columns = {name: getattr(path, name) for name in PATH_COLUMNS[:-1]}
    columns["Q_or_Y"] = values
    return pd.DataFrame(columns, columns=list(PATH_COLUMNS))


def _finite(value):
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_json(data) -> bytes:
    return JSONRenderer().render(_finite(data), renderer_context={"indent": 2}) + b"\n"


def write_csv(frame: pd.DataFrame, path, precision=12):
    path = Path(path)
    try:
        frame.to_csv(path, index=False, float_format=f"%.{precision}g")
    except OSError as exc:
        raise SimulationError(f"cannot write {path}: {exc.strerror}", path=str(path)) from exc
    return path


def write_json(data, path):
    path = Path(path)
    try:
        path.write_bytes(render_json(data))
    except OSError as exc:
        raise SimulationError(f"cannot write {path}: {exc.strerror}", path=str(path)) from exc
    return path


def emit_report(out_dir, artifacts, precision=12):
    """
    Write every ``name -> DataFrame | dict`` in ``artifacts`` under ``out_dir``
    (CSV for frames, JSON otherwise) and return the written paths in order.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SimulationError(f"cannot create {out_dir}: {exc.strerror}", path=str(out_dir)) from exc
    written = []
    for name, payload in artifacts.items():
        if isinstance(payload, pd.DataFrame):
            written.append(write_csv(payload, out_dir / name, precision))
        else:
            written.append(write_json(payload, out_dir / name))
        logger.info("wrote %s", written[-1])
    return written
