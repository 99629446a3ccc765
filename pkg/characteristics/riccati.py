"""
Riccati dynamics of the weighted gradients along characteristics:

    Q(t) = A_+ sqrt(c) s_x   on plus paths,
    Y(t) = A_- sqrt(c) r_x   on minus paths.

``differential`` integrates the transport equation of the gradient with Heun
steps; ``volterra`` marches the integrated form with trapezoid sums and an
implicit quadratic term.

``form`` picks the gradient equations. ``derived`` follows the chain rule:
quadratic term s_x (s_x - r_x) for Q and r_x (r_x - s_x) for Y, weight 1/2 on
the integrated d/dtau (A a) theta term. ``printed`` keeps the classical
written form: r_x (r_x - s_x) for Q, r_x (s_x - r_x) for Y, weight 1.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from euler_lifespan.errors import DomainError, InstabilityError
from .paths import CharPath, damped_factor_rate, integrating_factor

logger = logging.getLogger(__name__)


class RiccatiMode(str, enum.Enum):
    DIFFERENTIAL = "differential"
    VOLTERRA = "volterra"


class RiccatiForm(str, enum.Enum):
    DERIVED = "derived"
    PRINTED = "printed"


@dataclass
class RiccatiState:
    kind: str
    t: np.ndarray
    values: np.ndarray
    blowup: bool = False
    blowup_time: Optional[float] = None

    @property
    def value(self):
        return float(self.values[-1])


def _quadratic_term(form, kind, cp2c, rx, sx):
    if form is RiccatiForm.DERIVED:
        return cp2c * sx * (sx - rx) if kind == "Q" else cp2c * rx * (rx - sx)
    return cp2c * rx * (rx - sx) if kind == "Q" else cp2c * rx * (sx - rx)


def transported_state(path: CharPath, law):
    """
    (u, c, r, s) along the path with the path's own invariant (s on plus
    paths, r on minus paths) carried by its damped transport law

        d/dtau own = -(a/2)(r + s)        (trapezoid, implicit in own)

    and the other invariant taken from the grid. Near a steep front of the own
    invariant the grid value depends on where the smeared front sits relative
    to the path; the transported value does not.
    """
    if path.a is None:
        raise DomainError("integrating_factor must run before transported_state")
    kind = path.kind
    other = path.r if kind == "Q" else path.s
    own = np.empty_like(path.t)
    own[0] = path.s[0] if kind == "Q" else path.r[0]
    a, t = path.a, path.t
    for n in range(len(t) - 1):
        h = t[n + 1] - t[n]
        own[n + 1] = ((own[n] - 0.25 * h * (a[n] * (other[n] + own[n]) + a[n + 1] * other[n + 1]))
                      / (1.0 + 0.25 * h * a[n + 1]))
    r, s = (other, own) if kind == "Q" else (own, other)
    u, _ = law.state_variables(r, s)
    u = np.asarray(u, dtype=float)
    return u, np.asarray(law.sound_speed(u), dtype=float), r, s


def riccati_evolve(path: CharPath, law, spec, mode="differential", form="derived",
                   g_stop: float = 1e4) -> RiccatiState:
    mode = RiccatiMode(mode)
    form = RiccatiForm(form)
    if path.u is None:
        raise DomainError("path carries no field samples")
    if path.A is None:
        integrating_factor(path, spec)

    kind = path.kind
    A = path.A
    u, c, r, s = transported_state(path, law)
    sqrt_c = np.sqrt(c)
    own = path.sx if kind == "Q" else path.rx
    other = path.rx if kind == "Q" else path.sx
    # coefficient of Z^2: A^-1 (gamma+1)/4 u^((gamma-3)/4)
    quad = (law.gamma + 1.0) / 4.0 * u ** ((law.gamma - 3.0) / 4.0) / A
    threshold = g_stop * float(np.max(A)) * float(np.max(sqrt_c))

    z0 = float(A[0] * sqrt_c[0] * own[0])
    t = path.t
    values = [z0]
    blowup = False

    if mode is RiccatiMode.DIFFERENTIAL:
        cp = law.sound_speed_prime(u)
        cp2c = cp / (2.0 * c)
        dsqrt_c = cp / (2.0 * sqrt_c)

        def rhs(n, z):
            gradient = z / (A[n] * sqrt_c[n])
            rx, sx = (other[n], gradient) if kind == "Q" else (gradient, other[n])
            a_half = 0.5 * path.a[n]
            source = (_quadratic_term(form, kind, cp2c[n], rx, sx)
                      - a_half * (rx + sx) - 0.5 * path.a_x[n] * (r[n] + s[n]))
            return a_half * z + A[n] * (dsqrt_c[n] * rx * sx + sqrt_c[n] * source)

        for n in range(len(t) - 1):
            h = t[n + 1] - t[n]
            z = values[-1]
            k1 = rhs(n, z)
            k2 = rhs(n + 1, z + h * k1)
            z_next = z + 0.5 * h * (k1 + k2)
            if not math.isfinite(z_next):
                raise InstabilityError(f"{kind} became non-finite", t=float(t[n + 1]))
            values.append(z_next)
            if abs(z_next) >= threshold:
                blowup = True
                break
    else:
        theta = law.theta_gamma(u)
        kappa = 0.5 if form is RiccatiForm.DERIVED else 1.0
        aa_rate = damped_factor_rate(path, c=c)
        forcing = (
            z0
            + kappa * cumulative_trapezoid(aa_rate * theta, t, initial=0.0)
            - 0.5 * (A * path.a * theta - path.a[0] * theta[0])
            - cumulative_trapezoid(A * 0.5 * path.a_x * sqrt_c * (r + s), t, initial=0.0)
        )
        for n in range(len(t) - 1):
            h = t[n + 1] - t[n]
            z = values[-1]
            rest = z + forcing[n + 1] - forcing[n] - 0.5 * h * quad[n] * z * z
            disc = 1.0 + 2.0 * h * quad[n + 1] * rest
            if not math.isfinite(disc):
                raise InstabilityError(f"{kind} became non-finite", t=float(t[n + 1]))
            if disc < 0:
                # no real root: the trapezoid step has crossed the pole
                blowup = True
                break
            z_next = 2.0 * rest / (1.0 + math.sqrt(disc))
            values.append(z_next)
            if abs(z_next) >= threshold:
                blowup = True
                break

    values = np.asarray(values)
    state = RiccatiState(kind=kind, t=t[:len(values)].copy(), values=values, blowup=blowup,
                         blowup_time=float(t[len(values) - 1]) if blowup else None)
    if blowup:
        logger.info("%s blew up along the %s path at t=%.6g (%s, %s)",
                    kind, "plus" if path.sign > 0 else "minus", state.blowup_time, mode.value, form.value)
    return state


def gradient_crosscheck(path: CharPath, state: RiccatiState, dx: float, growth: float = 4.0) -> float:
    """
    Max relative deviation between the Riccati values and A sqrt(c) times the
    grid gradient sampled along the path, up to the first sample where |Z|
    exceeds ``growth`` times its initial size (the grid cannot resolve the
    gradient much beyond that). Samples with a grid gradient below 10 dx are
    skipped; 0 when nothing remains.
    """
    n = len(state.values)
    if growth and state.values[0] != 0:
        beyond = np.nonzero(np.abs(state.values) > growth * abs(state.values[0]))[0]
        if len(beyond):
            n = int(beyond[0])
    own = (path.sx if state.kind == "Q" else path.rx)[:n]
    reference = path.A[:n] * np.sqrt(path.c[:n]) * own
    keep = np.abs(own) >= 10.0 * dx
    if not keep.any():
        return 0.0
    deviation = np.abs(state.values[:n][keep] - reference[keep]) / np.abs(reference[keep])
    return float(np.max(deviation))


def dual_mode_deviation(path: CharPath, law, spec, form="derived", bound: float = 100.0,
                        g_stop: float = 1e4) -> float:
    """
    Max relative gap between the differential and volterra values on the
    samples where both stay below ``bound`` in size. Gaps are relative to
    max(|Z_differential|, 1e-3 max|Z_differential|).
    """
    differential = riccati_evolve(path, law, spec, RiccatiMode.DIFFERENTIAL, form, g_stop)
    volterra = riccati_evolve(path, law, spec, RiccatiMode.VOLTERRA, form, g_stop)
    n = min(len(differential.values), len(volterra.values))
    zd, zv = differential.values[:n], volterra.values[:n]
    keep = (np.abs(zd) < bound) & (np.abs(zv) < bound)
    if not keep.any():
        return 0.0
    floor = 1e-3 * float(np.max(np.abs(zd[keep])))
    scale = np.maximum(np.abs(zd[keep]), floor)
    if not np.all(scale > 0):
        return 0.0
    return float(np.max(np.abs(zd[keep] - zv[keep]) / scale))
