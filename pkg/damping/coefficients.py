"""
Damping coefficient a(t, x) for the damped p-system.

Each family is a closed form together with its separated bound
a_1(t) + a_2(x) and a family constant ``bound_factor`` such that

    |a| + |a_t| + |a_x| <= bound_factor * (a_1(t) + a_2(x)).

C_a is the integral of a_1 over t >= 0 plus the integral of a_2 over the line.
"""
import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from euler_lifespan.errors import DivergenceError, DomainError

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-9
QUAD_LIMIT = 200
SLACK = 1e-12


class DampingFamily(str, enum.Enum):
    ZERO = "zero"
    TIME_POWER = "time_power"
    SPACE_POWER = "space_power"
    SEPARATED_SUM = "separated_sum"
    SEPARATED_PRODUCT = "separated_product"


@dataclass(frozen=True)
class DampingSpec:
    family: DampingFamily = DampingFamily.ZERO
    mu: float = 1.0
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", DampingFamily(self.family))
        if self.family is DampingFamily.SEPARATED_PRODUCT and min(self.lambda1, self.lambda2) < 0:
            raise DomainError("separated_product exponents must be non-negative",
                              lambda1=self.lambda1, lambda2=self.lambda2)

    @property
    def is_zero(self):
        return self.family is DampingFamily.ZERO or (
            self.family is DampingFamily.TIME_POWER and self.mu == 0
        )

    @property
    def has_space_dependence(self):
        return self.family in (DampingFamily.SPACE_POWER, DampingFamily.SEPARATED_SUM) or (
            self.family is DampingFamily.SEPARATED_PRODUCT and self.lambda2 != 0
        )

    # closed forms

    def eval_a(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        fam = self.family
        if self.is_zero:
            out = np.zeros_like(t)
        elif fam is DampingFamily.TIME_POWER:
            out = self.mu * _decay(t, self.lambda1)
        elif fam is DampingFamily.SPACE_POWER:
            out = _decay(np.abs(x), self.lambda2)
        elif fam is DampingFamily.SEPARATED_SUM:
            out = _decay(t, self.lambda1) + _decay(np.abs(x), self.lambda2)
        else:
            out = _decay(t, self.lambda1) * _decay(np.abs(x), self.lambda2)
        return _unwrap(out)

    def eval_a_t(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        fam = self.family
        if self.is_zero or fam is DampingFamily.SPACE_POWER:
            out = np.zeros_like(t)
        elif fam is DampingFamily.TIME_POWER:
            out = -self.mu * self.lambda1 * _decay(t, self.lambda1 + 1)
        elif fam is DampingFamily.SEPARATED_SUM:
            out = -self.lambda1 * _decay(t, self.lambda1 + 1)
        else:
            out = -self.lambda1 * _decay(t, self.lambda1 + 1) * _decay(np.abs(x), self.lambda2)
        return _unwrap(out)

    def eval_a_x(self, t, x):
        """
        x-derivative; at x = 0 the even space factor takes the symmetric
        subgradient 0 (np.sign(0) == 0).
        """
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        fam = self.family
        if self.is_zero or fam is DampingFamily.TIME_POWER:
            out = np.zeros_like(x)
        else:
            dspace = -self.lambda2 * np.sign(x) * _decay(np.abs(x), self.lambda2 + 1)
            if fam is DampingFamily.SEPARATED_PRODUCT:
                dspace = dspace * _decay(t, self.lambda1)
            out = dspace
        return _unwrap(out)

    # separated bound

    @property
    def bound_weights(self):
        """(w1, p1, w2, p2): a_1(t) = w1 (1+t)^-p1 and a_2(x) = w2 (1+|x|)^-p2."""
        fam = self.family
        if self.is_zero:
            return 0.0, 0.0, 0.0, 0.0
        if fam is DampingFamily.TIME_POWER:
            return abs(self.mu), self.lambda1, 0.0, 0.0
        if fam is DampingFamily.SPACE_POWER:
            return 0.0, 0.0, 1.0, self.lambda2
        if fam is DampingFamily.SEPARATED_SUM:
            return 1.0, self.lambda1, 1.0, self.lambda2
        # Young: (1+t)^-l1 (1+|x|)^-l2 <= l1/L (1+t)^-L + l2/L (1+|x|)^-L, L = l1 + l2
        total = self.lambda1 + self.lambda2
        if total == 0:
            return 1.0, 0.0, 0.0, 0.0
        return self.lambda1 / total, total, self.lambda2 / total, total

    @property
    def bound_factor(self):
        fam = self.family
        if self.is_zero:
            return 1.0
        if fam is DampingFamily.TIME_POWER:
            return 1.0 + abs(self.lambda1)
        if fam is DampingFamily.SPACE_POWER:
            return 1.0 + abs(self.lambda2)
        if fam is DampingFamily.SEPARATED_SUM:
            return 1.0 + max(abs(self.lambda1), abs(self.lambda2))
        return 1.0 + self.lambda1 + self.lambda2

    def a1(self, t):
        w1, p1, _, _ = self.bound_weights
        return _unwrap(w1 * _decay(np.asarray(t, dtype=float), p1))

    def a2(self, x):
        _, _, w2, p2 = self.bound_weights
        return _unwrap(w2 * _decay(np.abs(np.asarray(x, dtype=float)), p2))

    def a2_prime(self, x):
        _, _, w2, p2 = self.bound_weights
        x = np.asarray(x, dtype=float)
        return _unwrap(-w2 * p2 * np.sign(x) * _decay(np.abs(x), p2 + 1))

    def max_abs_a(self, t, x):
        return float(np.max(np.abs(self.eval_a(t, x))))


def _decay(z, power):
    return (1.0 + z) ** (-power)


def _unwrap(value):
    return value[()] if np.ndim(value) == 0 else value


def integral_C_a(spec: DampingSpec) -> float:
    """
    Adaptive Gauss-Kronrod quadrature of a_1 over [0, inf) plus a_2 over the
    line. Raises DivergenceError when either integral does not converge.
    """
    w1, p1, w2, p2 = spec.bound_weights
    total = 0.0
    if w1:
        total += _half_line_integral(spec.a1, p1, "a_1")
    if w2:
        total += 2.0 * _half_line_integral(spec.a2, p2, "a_2")
    return total


def _half_line_integral(fn, power, label):
    if power <= 1:
        raise DivergenceError(f"{label} is not integrable: decay exponent {power} <= 1",
                              power=power)
    # z = expm1(y) turns the algebraic tail into an exponential one
    def integrand(y):
        if y > 700.0:
            return 0.0
        return float(fn(math.expm1(y))) * math.exp(y)

    value, abserr, info, *message = quad(integrand, 0.0, np.inf, epsabs=QUAD_EPSABS,
                                         limit=QUAD_LIMIT, full_output=1)
    if message or not math.isfinite(value) or abserr > 1e3 * QUAD_EPSABS:
        logger.warning("quadrature of %s failed after %s evaluations: %s",
                       label, info.get("neval"), message[0] if message else abserr)
        raise DivergenceError(f"quadrature of {label} did not converge", value=value, abserr=abserr)
    return value


@dataclass
class Violation:
    kind: str
    t: float
    x: float
    lhs: float
    rhs: float


@dataclass
class AssumptionReport:
    family: str
    c_a: float = None
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def check_assumptions(spec: DampingSpec, sample_budget: int = 4096,
                      t_max: float = 1e3, x_max: float = 1e3) -> AssumptionReport:
    """
    Sample the separated bound on a (t, x) lattice and the monotonicity
    condition x a_2'(x) <= 0 on an x lattice. Violations are reported with
    their location and magnitude, never raised.
    """
    report = AssumptionReport(family=spec.family.value)
    try:
        report.c_a = integral_C_a(spec)
    except DivergenceError as exc:
        report.violations.append(Violation("integrable", None, None, None, None))
        report.notes.append(exc.message)

    per_axis = max(int(math.sqrt(sample_budget)), 4)
    t = np.concatenate([[0.0], np.geomspace(1e-3, t_max, per_axis - 1)])
    xs = np.geomspace(1e-3, x_max, per_axis // 2)
    x = np.concatenate([-xs[::-1], [0.0], xs])
    tt, xx = np.meshgrid(t, x, indexing="ij")

    lhs = np.abs(spec.eval_a(tt, xx)) + np.abs(spec.eval_a_t(tt, xx)) + np.abs(spec.eval_a_x(tt, xx))
    rhs = spec.bound_factor * (spec.a1(tt) + spec.a2(xx))
    bad = lhs > rhs * (1 + SLACK) + SLACK
    for i, j in zip(*np.nonzero(bad)):
        report.violations.append(Violation("bound", float(tt[i, j]), float(xx[i, j]),
                                           float(lhs[i, j]), float(rhs[i, j])))

    monotone = x * spec.a2_prime(x)
    for k in np.nonzero(monotone > SLACK)[0]:
        report.violations.append(Violation("monotone", 0.0, float(x[k]), float(monotone[k]), 0.0))

    if spec.has_space_dependence:
        report.notes.append("a_x(t, 0) taken as 0: (1+|x|)^-lambda is Lipschitz but not C^1 at x = 0")
    if report.violations:
        logger.info("damping %s: %d assumption violations", spec.family.value, len(report.violations))
    return report
