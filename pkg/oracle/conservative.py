"""
Conservative-form reference solver for

    u_t - v_x = 0,     v_t + p(u)_x = -a(t, x) v,

with local Lax-Friedrichs (Rusanov) fluxes and Strang-split exact integration
of the linear source. Shares Grid1D, InitialData and the CFL rule with the
Riemann-invariant solver so the two can be compared node by node.
"""
import logging
from dataclasses import dataclass

import numpy as np

from euler_lifespan.errors import DomainError, InstabilityError, VacuumError
from solver.fields import Monitors, init, run_until, stable_dt

logger = logging.getLogger(__name__)


@dataclass
class ConservativeState:
    grid: object
    t: float
    u: np.ndarray
    v: np.ndarray


def _flux(law, u, v):
    return -v, law.pressure(u)


def _decay_source(spec, state, t_mid, half_dt):
    if spec.is_zero:
        return
    state.v = state.v * np.exp(-spec.eval_a(t_mid, state.grid.x) * half_dt)


def _check(law, state):
    if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.v))):
        raise InstabilityError("non-finite conservative state", t=state.t)
    u_min = float(np.min(state.u))
    if u_min <= law.u_floor:
        raise VacuumError("specific volume fell to the vacuum floor", u_min=u_min, t=state.t)


def lax_friedrichs_run(grid, law, spec, data, t_stop, cfl=0.9, max_steps=1_000_000) -> ConservativeState:
    if not t_stop > 0:
        raise DomainError("t_stop must be positive", t_stop=t_stop)
    data.check_positivity(law, grid)
    u0, v0 = data.state_variables(law, grid.x)
    state = ConservativeState(grid=grid, t=0.0, u=np.array(u0, dtype=float), v=np.array(v0, dtype=float))
    dx = grid.dx
    steps = 0
    while state.t < t_stop - 1e-12 * max(1.0, t_stop):
        if steps >= max_steps:
            raise InstabilityError("step budget exhausted before t_stop", t=state.t, steps=steps)
        c = law.sound_speed(state.u)
        a_max = 0.0 if spec.is_zero else spec.max_abs_a(state.t, grid.x)
        dt = min(stable_dt(grid, c, a_max, cfl), t_stop - state.t)

        _decay_source(spec, state, state.t + 0.25 * dt, 0.5 * dt)

        fu, fv = _flux(law, state.u, state.v)
        speed = np.maximum(c[:-1], c[1:])
        face_u = 0.5 * (fu[:-1] + fu[1:]) - 0.5 * speed * (state.u[1:] - state.u[:-1])
        face_v = 0.5 * (fv[:-1] + fv[1:]) - 0.5 * speed * (state.v[1:] - state.v[:-1])
        u_new = state.u.copy()
        v_new = state.v.copy()
        u_new[1:-1] -= dt / dx * (face_u[1:] - face_u[:-1])
        v_new[1:-1] -= dt / dx * (face_v[1:] - face_v[:-1])
        u_new[0] = u_new[-1] = 1.0
        v_new[0] = v_new[-1] = 0.0
        state.u, state.v = u_new, v_new

        _decay_source(spec, state, state.t + 0.75 * dt, 0.5 * dt)
        state.t += dt
        steps += 1
        _check(law, state)

    logger.debug("lax-friedrichs reached t=%.6g in %d steps", state.t, steps)
    return state


def compare_solvers(grid, law, spec, data, t_compare, cfl=0.9):
    """L-infinity differences (u, v) between the two solvers at ``t_compare``."""
    field = init(grid, law, data)
    field, _ = run_until(field, law, spec, cfl, t_compare,
                         Monitors(g_stop=np.inf, resolution_fraction=0.0, growth_stop=0.0))
    reference = lax_friedrichs_run(grid, law, spec, data, t_compare, cfl=cfl)
    return (float(np.max(np.abs(field.u - reference.u))),
            float(np.max(np.abs(field.v - reference.v))))
