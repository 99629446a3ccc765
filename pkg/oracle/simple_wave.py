"""
Exact gradient-catastrophe times for undamped data.

With a = 0 each Riemann invariant is constant along its own family, so the
family behaves as a scalar law x'(t) = speed(w0(x)). Characteristics cross
first at T = -1 / min_x d/dx speed(w0(x)), provided the minimum is negative.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from euler_lifespan.errors import DomainError, PoleError

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES_PER_WIDTH = 4096


@dataclass(frozen=True)
class SimpleWaveOracle:
    law: object
    s0: Callable
    s0_prime: Callable
    window: tuple
    r0: Optional[Callable] = None
    r0_prime: Optional[Callable] = None
    width: float = 1.0

    @classmethod
    def from_initial(cls, law, data, spec=None):
        if spec is not None and not spec.is_zero:
            raise DomainError("the simple-wave oracle is exact only without damping")
        radius = data.support_radius
        centers = [p.center for p in (data.phi, data.psi) if p.support_radius > 0] or [data.x0]
        widths = [p.width for p in (data.phi, data.psi) if p.support_radius > 0] or [1.0]

        def profile(index):
            return lambda x: data.riemann_profiles(law, x)[index]

        return cls(law=law, s0=profile(1), s0_prime=profile(3),
                   window=(min(centers) - radius, max(centers) + radius),
                   r0=profile(0), r0_prime=profile(2), width=min(widths))

    def speed(self, w, family="s"):
        sign = 1.0 if family == "s" else -1.0
        return sign * self.law.simple_wave_speed(w, family)

    def rate(self, x, family="s"):
        """d/dx of the characteristic speed carried by the initial profile."""
        if family == "s":
            return self.law.simple_wave_speed_prime(self.s0(x), "s") * self.s0_prime(x)
        return self.law.simple_wave_speed_prime(self.r0(x), "r") * self.r0_prime(x)

    def families(self, which="both"):
        if which == "both":
            return ("s", "r") if self.r0 is not None else ("s",)
        if which == "r" and self.r0 is None:
            raise DomainError("oracle has no r-profile")
        return (which,)


def _family_T_star(oracle, family, samples_per_width):
    lo, hi = oracle.window
    if not hi > lo:
        return math.inf
    n = max(int((hi - lo) / oracle.width * samples_per_width), 16)
    x = np.linspace(lo, hi, n)
    rate = np.asarray(oracle.rate(x, family), dtype=float)
    k = int(np.argmin(rate))
    best = float(rate[k])
    if best >= 0:
        return math.inf
    if 0 < k < n - 1 and rate[k - 1] > best < rate[k + 1]:
        result = minimize_scalar(lambda z: float(oracle.rate(z, family)),
                                 bracket=(x[k - 1], x[k], x[k + 1]), method="golden",
                                 options={"xtol": 1e-12})
        best = min(best, float(result.fun))
    return -1.0 / best


def simple_wave_T_star(oracle: SimpleWaveOracle, families="both",
                       samples_per_width=DEFAULT_SAMPLES_PER_WIDTH) -> float:
    """Earliest crossing time over the requested families; inf when no family steepens."""
    times = {family: _family_T_star(oracle, family, samples_per_width)
             for family in oracle.families(families)}
    logger.debug("simple-wave catastrophe times: %s", times)
    return min(times.values())


def riccati_closed_form(q0, coeff, t):
    """Solution q0 / (1 - coeff q0 t) of q' = coeff q^2."""
    denom = 1.0 - coeff * q0 * t
    if abs(denom) < 1e-14:
        raise PoleError("Riccati solution evaluated at its pole", q0=q0, coeff=coeff, t=t)
    return q0 / denom
