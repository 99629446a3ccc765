"""
Thermodynamic closure of the p-system for the gamma-law pressure
p(u) = u**(-gamma) / gamma.

Every function accepts a float or a numpy array and returns the same shape.
Riemann invariants are normalised so that r = s = 0 at the background
state (u, v) = (1, 0).
"""
from dataclasses import dataclass

import numpy as np

from euler_lifespan.errors import DomainError, VacuumError

DEFAULT_U_FLOOR = 1e-6


def _scalar_or_array(value):
    # 0-d results come back as numpy scalars, which behave as floats
    return value[()] if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class GasState:
    u: float
    v: float

    def __post_init__(self):
        if not np.all(np.asarray(self.u) > 0):
            raise DomainError("specific volume u must be positive", u=self.u)


@dataclass(frozen=True)
class RiemannPair:
    r: float
    s: float


@dataclass(frozen=True)
class GasLaw:
    """
    Gamma-law gas. All derived functions close over ``gamma`` so that no
    call site can mix exponents.
    """
    gamma: float
    u_floor: float = DEFAULT_U_FLOOR

    def __post_init__(self):
        if not self.gamma > 1:
            raise DomainError("gamma must exceed 1", gamma=self.gamma)
        if not self.u_floor >= 0:
            raise DomainError("u_floor must be non-negative", u_floor=self.u_floor)

    @property
    def shift(self):
        """The constant 2/(gamma-1) that normalises the invariants."""
        return 2.0 / (self.gamma - 1.0)

    def _checked(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(~(u > 0)):
            raise DomainError("specific volume u must be positive", u_min=float(np.nanmin(u)))
        if np.any(u <= self.u_floor):
            raise VacuumError("specific volume at or below the vacuum floor",
                              u_min=float(np.min(u)), u_floor=self.u_floor)
        return u

    def pressure(self, u):
        u = self._checked(u)
        return _scalar_or_array(u ** (-self.gamma) / self.gamma)

    def sound_speed(self, u):
        """c(u) = sqrt(-p'(u)) = u**(-(gamma+1)/2); c(1) = 1."""
        u = self._checked(u)
        return _scalar_or_array(u ** (-(self.gamma + 1.0) / 2.0))

    def sound_speed_prime(self, u):
        u = self._checked(u)
        return _scalar_or_array(-(self.gamma + 1.0) / 2.0 * u ** (-(self.gamma + 3.0) / 2.0))

    def eta(self, u):
        """eta(u) = integral of c from u to infinity."""
        u = self._checked(u)
        return _scalar_or_array(self.shift * u ** (-(self.gamma - 1.0) / 2.0))

    def theta_gamma(self, u):
        """
        4/(3-gamma) * (u**((3-gamma)/4) - 1), and log(u) when gamma == 3.
        The power branch is evaluated through expm1 so that gamma close to 3
        stays accurate.
        """
        u = self._checked(u)
        if self.gamma == 3:
            return _scalar_or_array(np.log(u))
        k = (3.0 - self.gamma) / 4.0
        return _scalar_or_array(np.expm1(k * np.log(u)) / k)

    def riemann_invariants(self, u, v):
        """Array form of riemann_from_state: returns (r, s)."""
        u = self._checked(u)
        v = np.asarray(v, dtype=float)
        w = self.eta(u) - self.shift
        return _scalar_or_array(v - w), _scalar_or_array(v + w)

    def state_variables(self, r, s):
        """
        Array form of state_from_riemann: returns (u, v).

        Raises VacuumError where (s - r)/2 + 2/(gamma-1) <= 0 or where the
        recovered u falls to the vacuum floor.
        """
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        w = (s - r) / 2.0 + self.shift
        if np.any(~(w > 0)):
            raise VacuumError(
                "Riemann invariants leave the admissible set (s-r)/2 + 2/(gamma-1) > 0",
                w_min=float(np.nanmin(w)),
            )
        u = ((self.gamma - 1.0) / 2.0 * w) ** (-2.0 / (self.gamma - 1.0))
        if np.any(u <= self.u_floor):
            raise VacuumError("specific volume fell to the vacuum floor",
                              u_min=float(np.min(u)), u_floor=self.u_floor)
        return _scalar_or_array(u), _scalar_or_array((r + s) / 2.0)

    def riemann_from_state(self, state: GasState) -> RiemannPair:
        r, s = self.riemann_invariants(state.u, state.v)
        return RiemannPair(r=r, s=s)

    def state_from_riemann(self, pair: RiemannPair) -> GasState:
        u, v = self.state_variables(pair.r, pair.s)
        return GasState(u=u, v=v)

    # Wave speeds of the decoupled families (one invariant identically zero).

    def simple_wave_speed(self, w, family="s"):
        """
        Characteristic speed magnitude c as a function of the single nonzero
        invariant: s-family with r = 0, or r-family with s = 0.
        """
        base = self._simple_wave_base(w, family)
        return _scalar_or_array(base ** ((self.gamma + 1.0) / (self.gamma - 1.0)))

    def simple_wave_speed_prime(self, w, family="s"):
        """d/dw of the s-family speed; for the r-family, -d/dw of its speed."""
        base = self._simple_wave_base(w, family)
        return _scalar_or_array((self.gamma + 1.0) / 4.0 * base ** (2.0 / (self.gamma - 1.0)))

    def _simple_wave_base(self, w, family):
        sign = {"s": 1.0, "r": -1.0}[family]
        base = 1.0 + sign * (self.gamma - 1.0) * np.asarray(w, dtype=float) / 4.0
        if np.any(~(base > 0)):
            raise VacuumError("simple-wave invariant outside the admissible set", family=family)
        return base
