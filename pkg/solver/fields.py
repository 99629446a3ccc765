"""
First-order upwind evolution of the Riemann invariants (r, s) of the damped
p-system:

    r_t - c r_x = -(a/2)(r + s),     s_t + c s_x = -(a/2)(r + s),

with c = c(u) frozen per node and step, background Dirichlet boundaries and a
backward-Euler treatment of the damping source.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import pandas as pd

from euler_lifespan.errors import DomainError, InstabilityError, VacuumError
from gas.thermo import GasLaw
from .grid import Grid1D
from .profiles import Profile

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "min_u", "max_u", "max_abs_rx", "max_abs_sx",
                  "max_abs_ux", "max_abs_vx", "phi_region")

# regime: c_1/4 <= c(u) <= 4 c_1 with c_1 = c(1) = 1
REGIME_LOW, REGIME_HIGH = 0.25, 4.0


class StopCause(str, enum.Enum):
    GRADIENT = "gradient"
    VACUUM = "vacuum"
    HORIZON = "horizon"
    INSTABILITY = "instability"
    BUDGET = "budget"


@dataclass(frozen=True)
class InitialData:
    """u(0,x) = 1 + eps*phi(x), v(0,x) = eps*psi(x); or r = 0 data when ``simple_wave``."""
    phi: Profile
    psi: Profile
    epsilon: float
    x0: float = 0.0
    delta0: float = 0.1
    k_report: float = 1.0
    simple_wave: bool = False

    def __post_init__(self):
        if self.epsilon < 0:
            raise DomainError("epsilon must be non-negative", epsilon=self.epsilon)

    def _simple_wave_base(self, law, x):
        base = 1.0 + (law.gamma - 1.0) * self.epsilon * self.psi(x) / 2.0
        if np.any(base <= 0):
            raise VacuumError("simple-wave data leaves the admissible set", epsilon=self.epsilon)
        return base

    def state_variables(self, law: GasLaw, x):
        v = self.epsilon * self.psi(x)
        if self.simple_wave:
            u = self._simple_wave_base(law, x) ** (-2.0 / (law.gamma - 1.0))
        else:
            u = 1.0 + self.epsilon * self.phi(x)
        return u, v

    def state_derivatives(self, law: GasLaw, x):
        vx = self.epsilon * self.psi.derivative(x)
        if self.simple_wave:
            base = self._simple_wave_base(law, x)
            ux = -base ** (-(law.gamma + 1.0) / (law.gamma - 1.0)) * vx
        else:
            ux = self.epsilon * self.phi.derivative(x)
        return ux, vx

    def riemann_profiles(self, law: GasLaw, x):
        """(r0, s0, r0', s0') with exact derivatives (eta' = -c)."""
        u, v = self.state_variables(law, x)
        ux, vx = self.state_derivatives(law, x)
        r, s = law.riemann_invariants(u, v)
        c = law.sound_speed(u)
        return r, s, vx + c * ux, vx - c * ux

    def check_positivity(self, law: GasLaw, grid: Grid1D):
        u, _ = self.state_variables(law, grid.x)
        u_min = float(np.min(u))
        if u_min < self.delta0 or u_min <= 0:
            raise VacuumError(f"initial specific volume {u_min:.6g} is below delta0 = {self.delta0}",
                              u_min=u_min, delta0=self.delta0)

    @property
    def measured_k(self):
        """K measured as -psi_x(x0)."""
        return -float(self.psi.derivative(self.x0))

    @property
    def kk_satisfied(self):
        return float(self.psi.derivative(self.x0)) <= -self.k_report

    @property
    def support_radius(self):
        return max(self.phi.support_radius, self.psi.support_radius)


@dataclass
class FieldState:
    grid: Grid1D
    t: float
    r: np.ndarray
    s: np.ndarray
    u: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)
    c: np.ndarray = field(default=None, repr=False)
    rx: np.ndarray = field(default=None, repr=False)
    sx: np.ndarray = field(default=None, repr=False)
    ux: np.ndarray = field(default=None, repr=False)
    vx: np.ndarray = field(default=None, repr=False)

    def refresh(self, law: GasLaw):
        """Recompute the derived caches; raises on non-finite or vacuum states."""
        if not (np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.s))):
            raise InstabilityError("non-finite Riemann invariant", t=self.t)
        self.u, self.v = law.state_variables(self.r, self.s)
        self.c = law.sound_speed(self.u)
        dx = self.grid.dx
        self.rx = np.gradient(self.r, dx)
        self.sx = np.gradient(self.s, dx)
        self.ux = np.gradient(self.u, dx)
        self.vx = np.gradient(self.v, dx)
        return self

    def max_gradient(self):
        return max(float(np.max(np.abs(self.rx))), float(np.max(np.abs(self.sx))))

    def oscillation(self):
        return max(float(np.ptp(self.r)), float(np.ptp(self.s)))

    def in_regime(self):
        return REGIME_LOW <= float(np.min(self.c)) and float(np.max(self.c)) <= REGIME_HIGH


def init(grid: Grid1D, law: GasLaw, data: InitialData) -> FieldState:
    data.check_positivity(law, grid)
    u, v = data.state_variables(law, grid.x)
    r, s = law.riemann_invariants(u, v)
    return FieldState(grid=grid, t=0.0, r=np.asarray(r, dtype=float), s=np.asarray(s, dtype=float)).refresh(law)


def stable_dt(grid: Grid1D, c, a_max: float, cfl: float) -> float:
    """dt = cfl*dx/max(c), additionally capped by 0.5/max|a|."""
    dt = cfl * grid.dx / float(np.max(c))
    if a_max > 0:
        dt = min(dt, 0.5 / a_max)
    return dt


def step(state: FieldState, law: GasLaw, spec, cfl: float, dt_max: Optional[float] = None) -> FieldState:
    if not 0 < cfl <= 1:
        raise DomainError("cfl must lie in (0, 1]", cfl=cfl)
    grid = state.grid
    x = grid.x
    a_max = 0.0 if spec.is_zero else spec.max_abs_a(state.t, x)
    dt = stable_dt(grid, state.c, a_max, cfl)
    if dt_max is not None:
        dt = min(dt, dt_max)

    nu = dt * state.c / grid.dx
    r, s = state.r, state.s
    r_new = r.copy()
    s_new = s.copy()
    # r travels with speed -c: forward difference; s with +c: backward difference
    r_new[:-1] = r[:-1] + nu[:-1] * (r[1:] - r[:-1])
    s_new[1:] = s[1:] - nu[1:] * (s[1:] - s[:-1])

    if not spec.is_zero:
        damp = dt * spec.eval_a(state.t + dt, x)
        total = (r_new + s_new) / (1.0 + damp)
        r_new -= 0.5 * damp * total
        s_new -= 0.5 * damp * total

    for arr in (r_new, s_new):
        arr[0] = 0.0
        arr[-1] = 0.0
    return FieldState(grid=grid, t=state.t + dt, r=r_new, s=s_new).refresh(law)


class FieldHistory:
    """
    Retained solver levels (t, r, s, u, c), every ``stride``-th accepted step
    plus the final one. Values between levels are interpolated linearly in x
    and t.
    """

    def __init__(self, grid: Grid1D, stride: int = 1):
        if stride < 1:
            raise DomainError("history stride must be >= 1", stride=stride)
        self.grid = grid
        self.stride = stride
        self._t = []
        self._levels = {"r": [], "s": [], "u": [], "c": []}

    def __len__(self):
        return len(self._t)

    def append(self, state: FieldState, step_index: int = 0, force: bool = False):
        if self._t and state.t <= self._t[-1]:
            return
        if not force and step_index % self.stride:
            return
        self._t.append(state.t)
        for name in self._levels:
            self._levels[name].append(np.array(getattr(state, name), copy=True))

    @property
    def times(self):
        return np.asarray(self._t)

    @property
    def t_end(self):
        return self._t[-1]

    def array(self, name, k):
        return self._levels[name][k]

    def level(self, k, law: GasLaw) -> FieldState:
        return FieldState(grid=self.grid, t=self._t[k], r=self._levels["r"][k],
                          s=self._levels["s"][k]).refresh(law)

    def bracket(self, t):
        """(k, w): t lies between levels k and k+1 with weight w on level k+1."""
        times = self.times
        if t <= times[0]:
            return 0, 0.0
        if t >= times[-1]:
            return len(times) - 1, 0.0
        k = int(np.searchsorted(times, t, side="right")) - 1
        w = (t - times[k]) / (times[k + 1] - times[k])
        return k, w

    def value_at(self, name, t, x):
        k, w = self.bracket(t)
        grid_x = self.grid.x
        value = np.interp(x, grid_x, self._levels[name][k])
        if w:
            value = (1 - w) * value + w * np.interp(x, grid_x, self._levels[name][k + 1])
        return float(value)

    def gradient_at(self, name, t, x):
        """Centered-difference gradient at the bracketing nodes, interpolated to (t, x)."""
        k, w = self.bracket(t)
        value = local_gradient(self._levels[name][k], self.grid, x)
        if w:
            value = (1 - w) * value + w * local_gradient(self._levels[name][k + 1], self.grid, x)
        return float(value)


def local_gradient(values, grid: Grid1D, x):
    """Centered node differences around x, interpolated linearly in x."""
    i = int(grid.cell_index(x))
    theta = (x - grid.x[i]) / grid.dx
    return (1 - theta) * _node_gradient(values, i, grid.dx) + theta * _node_gradient(values, i + 1, grid.dx)


def _node_gradient(values, j, dx):
    if j == 0:
        return (values[1] - values[0]) / dx
    if j == len(values) - 1:
        return (values[-1] - values[-2]) / dx
    return (values[j + 1] - values[j - 1]) / (2 * dx)


class GradientRule(str, enum.Enum):
    """Which monitor ended a gradient-stopped run."""
    THRESHOLD = "threshold"
    RESOLUTION = "resolution"
    GROWTH = "growth"


@dataclass
class TimeSeries:
    rows: list = field(default_factory=list)
    stop_cause: Optional[StopCause] = None
    stop_message: str = ""
    regime_exits: int = 0
    steps: int = 0
    gradient_rule: Optional[GradientRule] = None
    oscillations: list = field(default_factory=list, repr=False)

    def record(self, state: FieldState, phi: float = math.nan):
        self.rows.append((
            state.t,
            float(np.min(state.u)),
            float(np.max(state.u)),
            float(np.max(np.abs(state.rx))),
            float(np.max(np.abs(state.sx))),
            float(np.max(np.abs(state.ux))),
            float(np.max(np.abs(state.vx))),
            float(phi),
        ))
        self.oscillations.append(state.oscillation())

    def stop(self, cause: StopCause, message: str = "", rule: Optional[GradientRule] = None):
        self.stop_cause = cause
        self.stop_message = message
        self.gradient_rule = rule

    def column(self, name):
        j = SERIES_COLUMNS.index(name)
        return np.array([row[j] for row in self.rows])

    @property
    def gradient(self):
        """g(t) = max(|r_x|, |s_x|) per recorded level."""
        return np.maximum(self.column("max_abs_rx"), self.column("max_abs_sx"))

    @property
    def steepness(self):
        """
        g(t) / osc(t), osc = max(ptp r, ptp s). Equal to g/osc(0) for undamped
        runs; removes the amplitude decay of damped runs from the blow-up signal.
        Levels without oscillation fall back to g.
        """
        g = self.gradient
        osc = np.asarray(self.oscillations, dtype=float)
        if len(osc) != len(g):
            return g
        return np.where(osc > 0, g / np.where(osc > 0, osc, 1.0), g)

    @property
    def t_stop(self):
        return self.rows[-1][0]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(SERIES_COLUMNS))


@dataclass
class Monitors:
    """Stopping rules and per-step consumers for run_until."""
    g_stop: float = 1e4
    resolution_fraction: float = 0.25
    growth_stop: float = 12.0
    max_steps: int = 1_000_000
    history: Optional[FieldHistory] = None
    phi_source: Optional[Callable[[FieldState], float]] = None
    observers: tuple = ()

    def gradient_fired(self, state: FieldState, steepness0: float = 0.0) -> Optional[GradientRule]:
        """
        Returns the rule that fired, or None:

        * threshold: g >= g_stop
        * growth: g/osc >= growth_stop * (g/osc at t = 0)
        * resolution: g >= resolution_fraction * osc / dx

        A zero fraction or growth factor disables that rule.
        """
        g = state.max_gradient()
        if g >= self.g_stop:
            return GradientRule.THRESHOLD
        osc = state.oscillation()
        if osc <= 0:
            return None
        if self.growth_stop and steepness0 > 0 and g / osc >= self.growth_stop * steepness0:
            return GradientRule.GROWTH
        if self.resolution_fraction and g >= self.resolution_fraction * osc / state.grid.dx:
            return GradientRule.RESOLUTION
        return None


def initial_steepness(state: FieldState) -> float:
    osc = state.oscillation()
    return state.max_gradient() / osc if osc > 0 else 0.0


def run_until(state: FieldState, law: GasLaw, spec, cfl: float, t_stop: float,
              monitors: Optional[Monitors] = None):
    """
    Advance until t_stop, a monitor fires or the step budget runs out.

    Every accepted level goes to ``monitors.observers`` (callables taking the
    state) after it is recorded. Vacuum and instability errors propagate with
    ``stop_cause``, ``series`` and ``state`` (last good level) attached.
    """
    if not t_stop > state.t:
        raise DomainError("t_stop must exceed the current time", t=state.t, t_stop=t_stop)
    monitors = monitors or Monitors()
    series = TimeSeries()
    history = monitors.history

    def record(current):
        phi = monitors.phi_source(current) if monitors.phi_source else math.nan
        series.record(current, phi)
        for observer in monitors.observers:
            observer(current)
        if not current.in_regime():
            if not series.regime_exits:
                logger.warning("sound speed left [c1/4, 4c1] at t=%.6g", current.t)
            series.regime_exits += 1

    record(state)
    steepness0 = initial_steepness(state)
    if history is not None:
        history.append(state, 0, force=True)

    eps_t = 1e-12 * max(1.0, abs(t_stop))
    while True:
        if state.t >= t_stop - eps_t:
            series.stop(StopCause.HORIZON)
            break
        if series.steps >= monitors.max_steps:
            series.stop(StopCause.BUDGET, f"step budget {monitors.max_steps} exhausted")
            break
        try:
            state_next = step(state, law, spec, cfl, dt_max=t_stop - state.t)
        except (VacuumError, InstabilityError) as exc:
            cause = StopCause.VACUUM if isinstance(exc, VacuumError) else StopCause.INSTABILITY
            series.stop(cause, str(exc))
            logger.warning("run stopped by %s at t=%.6g: %s", cause.value, state.t, exc)
            if history is not None:
                history.append(state, 0, force=True)
            exc.stop_cause, exc.series, exc.state = cause, series, state
            raise
        state = state_next
        series.steps += 1
        record(state)
        if history is not None:
            history.append(state, series.steps)
        rule = monitors.gradient_fired(state, steepness0)
        if rule:
            series.stop(StopCause.GRADIENT, f"{rule.value} rule, max gradient {state.max_gradient():.6g}", rule)
            break

    if history is not None:
        history.append(state, 0, force=True)
    logger.info("run stopped (%s) at t=%.6g after %d steps", series.stop_cause.value, state.t, series.steps)
    return state, series


@dataclass(frozen=True)
class SupNorms:
    r: float
    s: float
    rx: float
    sx: float
    ux: float
    vx: float
    empty: bool = False

    @property
    def phi(self):
        return self.r + self.s


def sup_norms_on_region(state: FieldState, region=None) -> SupNorms:
    """Maxima over the grid nodes inside ``region`` (any object with ``mask(t, x)``)."""
    if region is None:
        mask = np.ones(state.grid.nx, dtype=bool)
    else:
        mask = region.mask(state.t, state.grid.x)
    if not mask.any():
        return SupNorms(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, empty=True)
    return SupNorms(*(float(np.max(np.abs(getattr(state, name)[mask])))
                      for name in ("r", "s", "rx", "sx", "ux", "vx")))
