"""
Characteristic curves dx/dt = +-c(u), traced through retained solver levels or
followed alongside the solver; their integrating factors
A(tau) = exp(int_0^tau a/2) and the regions bounded by the curves issued from
(0, x0).
"""
import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from euler_lifespan.errors import DomainError, MissingHistoryError
from solver.fields import local_gradient, sup_norms_on_region

logger = logging.getLogger(__name__)


def _sign(sign):
    if sign in ("+", "plus", 1, 1.0):
        return 1
    if sign in ("-", "minus", -1, -1.0):
        return -1
    raise DomainError(f"unknown characteristic sign {sign!r}")


@dataclass
class CharPath:
    sign: int
    anchor: tuple
    t: np.ndarray
    x: np.ndarray
    exited: bool = False
    u: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    rx: Optional[np.ndarray] = None
    sx: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    a_t: Optional[np.ndarray] = None
    a_x: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.t)

    @property
    def kind(self):
        return "Q" if self.sign > 0 else "Y"

    def sample(self, history):
        """Fill u, c, r, s and the grid gradients at every (t, x) sample."""
        t, x = self.t, self.x
        for name in ("u", "c", "r", "s"):
            setattr(self, name, np.array([history.value_at(name, ti, xi) for ti, xi in zip(t, x)]))
        self.rx = np.array([history.gradient_at("r", ti, xi) for ti, xi in zip(t, x)])
        self.sx = np.array([history.gradient_at("s", ti, xi) for ti, xi in zip(t, x)])
        return self


def trace(history, sign, anchor, direction="forward") -> CharPath:
    """
    Heun integration of dx/dt = sign*c through the stored levels starting at
    ``anchor = (t0, x0)``. A path leaving the grid is clipped at the edge and
    flagged ``exited``. Samples are returned in increasing t.
    """
    if history is None or len(history) == 0:
        raise MissingHistoryError("characteristic tracing needs retained solver levels")
    sigma = _sign(sign)
    t0, x0 = float(anchor[0]), float(anchor[1])
    grid = history.grid
    if not grid.contains(x0):
        raise DomainError("anchor lies outside the grid", x0=x0)
    times = history.times
    if t0 < times[0] or t0 > times[-1]:
        raise MissingHistoryError("anchor time outside the retained levels", t0=t0)

    if direction == "forward":
        ts = [t0, *times[times > t0]]
    elif direction == "backward":
        ts = [t0, *times[times < t0][::-1]]
    else:
        raise DomainError(f"unknown direction {direction!r}")

    xs = [x0]
    exited = False
    for t_prev, t_next in zip(ts[:-1], ts[1:]):
        h = t_next - t_prev
        x = xs[-1]
        k1 = sigma * history.value_at("c", t_prev, x)
        k2 = sigma * history.value_at("c", t_next, x + h * k1)
        x_next = x + 0.5 * h * (k1 + k2)
        if not grid.contains(x_next):
            xs.append(min(max(x_next, grid.x_min), grid.x_max))
            exited = True
            logger.warning("characteristic from (%.6g, %.6g) left the grid at t=%.6g", t0, x0, t_next)
            break
        xs.append(x_next)

    t = np.asarray(ts[:len(xs)], dtype=float)
    x = np.asarray(xs, dtype=float)
    if direction == "backward":
        t, x = t[::-1].copy(), x[::-1].copy()
    return CharPath(sign=sigma, anchor=(t0, x0), t=t, x=x, exited=exited).sample(history)


def integrating_factor(path: CharPath, spec):
    """Attach a, a_t, a_x and A along ``path``; returns (t, A) with A(0) = 1."""
    if abs(path.t[0]) > 1e-12:
        raise DomainError("integrating factors accumulate from tau = 0", t_first=float(path.t[0]))
    path.a = np.broadcast_to(spec.eval_a(path.t, path.x), path.t.shape).astype(float)
    path.a_t = np.broadcast_to(spec.eval_a_t(path.t, path.x), path.t.shape).astype(float)
    path.a_x = np.broadcast_to(spec.eval_a_x(path.t, path.x), path.t.shape).astype(float)
    if len(path) == 1:
        path.A = np.ones(1)
    else:
        path.A = np.exp(cumulative_trapezoid(path.a / 2.0, path.t, initial=0.0))
    return path.t, path.A


def damped_factor_rate(path: CharPath, method="analytic", c=None):
    """
    d/dtau (A a) along the path: A (a/2) a + A (a_t + sign c a_x), or a
    difference quotient of the sampled product. ``c`` replaces the sampled
    sound speed in the analytic form.
    """
    if path.A is None:
        raise DomainError("integrating_factor must run before damped_factor_rate")
    if method == "analytic":
        speed = path.c if c is None else c
        return path.A * (0.5 * path.a * path.a + path.a_t + path.sign * speed * path.a_x)
    if method == "difference":
        return np.gradient(path.A * path.a, path.t)
    raise DomainError(f"unknown method {method!r}")


class RegionKind(str, enum.Enum):
    OMEGA = "omega"
    OMEGA_PLUS = "omega_plus"
    OMEGA_MINUS = "omega_minus"


def region_kind(x0):
    if x0 > 0:
        return RegionKind.OMEGA_PLUS
    if x0 < 0:
        return RegionKind.OMEGA_MINUS
    return RegionKind.OMEGA


def _region_mask(kind, x, plus_x, minus_x, tol):
    x = np.asarray(x, dtype=float)
    if kind is RegionKind.OMEGA:
        return (x >= plus_x - tol) | (x <= minus_x + tol)
    if kind is RegionKind.OMEGA_PLUS:
        return x >= plus_x - tol
    return x <= minus_x + tol


@dataclass(frozen=True)
class RegionSpec:
    """
    omega:        x >= x_+(t; 0, 0) or x <= x_-(t; 0, 0)
    omega_plus:   x >= x_+(t; 0, x0), x0 > 0
    omega_minus:  x <= x_-(t; 0, x0), x0 < 0
    """
    kind: RegionKind
    x0: float
    plus_path: Optional[CharPath] = None
    minus_path: Optional[CharPath] = None

    def plus_boundary(self, t):
        if self.plus_path is None:
            return np.inf
        return float(np.interp(t, self.plus_path.t, self.plus_path.x))

    def minus_boundary(self, t):
        if self.minus_path is None:
            return -np.inf
        return float(np.interp(t, self.minus_path.t, self.minus_path.x))

    def mask(self, t, x, tol=0.0):
        return _region_mask(self.kind, x, self.plus_boundary(t), self.minus_boundary(t), tol)

    def contains(self, t, x, tol=0.0):
        return bool(np.all(self.mask(t, x, tol)))


def region_boundaries(history, x0) -> RegionSpec:
    if history is None or len(history) == 0:
        raise MissingHistoryError("region boundaries need retained solver levels")
    kind = region_kind(x0)
    anchor = (history.times[0], x0)
    plus = trace(history, +1, anchor) if kind is not RegionKind.OMEGA_MINUS else None
    minus = trace(history, -1, anchor) if kind is not RegionKind.OMEGA_PLUS else None
    return RegionSpec(kind=kind, x0=x0, plus_path=plus, minus_path=minus)


def _heun_step(x, sigma, h, nodes, c_prev, c_next):
    k1 = sigma * np.interp(x, nodes, c_prev)
    k2 = sigma * np.interp(x + h * k1, nodes, c_next)
    return float(x + 0.5 * h * (k1 + k2))


class RegionFollower:
    """
    Moves the boundaries x_+-(t; 0, x0) forward with every accepted solver
    level, using the same Heun rule as ``trace``. Calling the follower with a
    FieldState returns Phi = sup|r| + sup|s| over the region at that level.
    """

    def __init__(self, x0):
        self.x0 = float(x0)
        self.kind = region_kind(self.x0)
        self._t, self._plus, self._minus = [], [], []
        self._previous_c = None

    def __call__(self, state):
        self.advance(state)
        return self.phi(state)

    def advance(self, state):
        grid = state.grid
        if self._previous_c is None:
            plus = minus = self.x0
        else:
            h = state.t - self._t[-1]
            plus = _heun_step(self._plus[-1], +1, h, grid.x, self._previous_c, state.c)
            minus = _heun_step(self._minus[-1], -1, h, grid.x, self._previous_c, state.c)
            plus = min(max(plus, grid.x_min), grid.x_max)
            minus = min(max(minus, grid.x_min), grid.x_max)
        self._t.append(state.t)
        self._plus.append(plus)
        self._minus.append(minus)
        self._previous_c = state.c

    def mask(self, t, x, tol=0.0):
        """Mask at the most recent level."""
        return _region_mask(self.kind, x, self._plus[-1], self._minus[-1], tol)

    def contains(self, t, x, tol=0.0):
        return bool(np.all(self.mask(t, x, tol)))

    def phi(self, state):
        return sup_norms_on_region(state, self).phi

    def region(self) -> RegionSpec:
        t = np.asarray(self._t)
        anchor = (t[0] if len(t) else 0.0, self.x0)
        plus = CharPath(sign=1, anchor=anchor, t=t, x=np.asarray(self._plus))
        minus = CharPath(sign=-1, anchor=anchor, t=t, x=np.asarray(self._minus))
        return RegionSpec(
            kind=self.kind, x0=self.x0,
            plus_path=plus if self.kind is not RegionKind.OMEGA_MINUS else None,
            minus_path=minus if self.kind is not RegionKind.OMEGA_PLUS else None,
        )


class PathFollower:
    """
    One characteristic from (0, x0) traced alongside the solver, sampled at
    every accepted level. Gives the same samples as ``trace`` on a stride-1
    history without retaining any level.
    """
    _FIELDS = ("u", "c", "r", "s")

    def __init__(self, sign, x0):
        self.sign = _sign(sign)
        self.x0 = float(x0)
        self.exited = False
        self._rows = []
        self._previous_c = None

    def __call__(self, state):
        if self.exited:
            return
        grid = state.grid
        if not self._rows:
            if not grid.contains(self.x0):
                raise DomainError("anchor lies outside the grid", x0=self.x0)
            x = self.x0
        else:
            h = state.t - self._rows[-1][0]
            x = _heun_step(self._rows[-1][1], self.sign, h, grid.x, self._previous_c, state.c)
            if not grid.contains(x):
                x = min(max(x, grid.x_min), grid.x_max)
                self.exited = True
                logger.warning("characteristic from (0, %.6g) left the grid at t=%.6g", self.x0, state.t)
        self._previous_c = state.c
        self._rows.append((
            state.t, x,
            *(float(np.interp(x, grid.x, getattr(state, name))) for name in self._FIELDS),
            float(local_gradient(state.r, grid, x)),
            float(local_gradient(state.s, grid, x)),
        ))

    def __len__(self):
        return len(self._rows)

    def path(self) -> CharPath:
        if not self._rows:
            raise MissingHistoryError("the follower has not seen any solver level")
        columns = [np.array(column, dtype=float) for column in zip(*self._rows)]
        t, x, u, c, r, s, rx, sx = columns
        return CharPath(sign=self.sign, anchor=(0.0, self.x0), t=t, x=x, exited=self.exited,
                        u=u, c=c, r=r, s=s, rx=rx, sx=sx)
