import math

import numpy as np
from django.test import SimpleTestCase

from euler_lifespan.errors import DivergenceError
from .coefficients import DampingFamily, DampingSpec, check_assumptions, integral_C_a
from .serializers import AssumptionReportSerializer, DampingSerializer

ZERO = DampingSpec()
SUM22 = DampingSpec(DampingFamily.SEPARATED_SUM, lambda1=2, lambda2=2)


class EvaluationTests(SimpleTestCase):
    def test_zero_family(self):
        self.assertEqual(ZERO.eval_a(5, -3), 0)
        self.assertEqual(ZERO.eval_a_t(5, -3), 0)
        self.assertEqual(ZERO.eval_a_x(5, -3), 0)

    def test_closed_forms(self):
        self.assertAlmostEqual(SUM22.eval_a(0, 0), 2.0)
        self.assertAlmostEqual(DampingSpec("time_power", mu=2, lambda1=1).eval_a(1.0, 17.0), 1.0)
        self.assertAlmostEqual(SUM22.eval_a_x(0, 1), -0.25)

    def test_space_derivative_vanishes_at_origin(self):
        for spec in (SUM22, DampingSpec("space_power", lambda2=2),
                     DampingSpec("separated_product", lambda1=0.6, lambda2=0.6)):
            self.assertEqual(spec.eval_a_x(0.7, 0.0), 0.0)

    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(7)
        t = rng.uniform(0, 20, 100)
        x = rng.uniform(0.1, 20, 100) * rng.choice([-1, 1], 100)
        h = 1e-6
        for spec in (SUM22, DampingSpec("time_power", mu=1.5, lambda1=0.5),
                     DampingSpec("space_power", lambda2=3),
                     DampingSpec("separated_product", lambda1=0.6, lambda2=0.6)):
            fd_t = (spec.eval_a(t + h, x) - spec.eval_a(np.maximum(t - h, 0), x)) / (t + h - np.maximum(t - h, 0))
            fd_x = (spec.eval_a(t, x + h) - spec.eval_a(t, x - h)) / (2 * h)
            np.testing.assert_allclose(spec.eval_a_t(t, x), fd_t, rtol=1e-6, atol=1e-9)
            np.testing.assert_allclose(spec.eval_a_x(t, x), fd_x, rtol=1e-6, atol=1e-9)

    def test_vectorised_evaluation_broadcasts(self):
        a = SUM22.eval_a(0.5, np.linspace(-3, 3, 7))
        self.assertEqual(a.shape, (7,))
        np.testing.assert_allclose(a, a[::-1])


class IntegralTests(SimpleTestCase):
    def test_sum_family_closed_form(self):
        self.assertAlmostEqual(integral_C_a(SUM22), 3.0, delta=1e-6)
        for l1 in (1.1, 2.0, 4.0):
            for l2 in (1.1, 2.5, 4.0):
                spec = DampingSpec("separated_sum", lambda1=l1, lambda2=l2)
                expected = 1 / (l1 - 1) + 2 / (l2 - 1)
                self.assertAlmostEqual(integral_C_a(spec) / expected, 1.0, delta=1e-6)

    def test_zero_and_time_power(self):
        self.assertEqual(integral_C_a(ZERO), 0.0)
        self.assertAlmostEqual(integral_C_a(DampingSpec("time_power", mu=1, lambda1=2)), 1.0, delta=1e-6)

    def test_product_family_uses_young_split(self):
        spec = DampingSpec("separated_product", lambda1=0.6, lambda2=0.6)
        self.assertAlmostEqual(integral_C_a(spec), 0.5 / 0.2 + 2 * 0.5 / 0.2, delta=1e-5)

    def test_non_integrable_family_diverges(self):
        with self.assertRaises(DivergenceError):
            integral_C_a(DampingSpec("time_power", mu=1, lambda1=1))


class AssumptionTests(SimpleTestCase):
    def test_canonical_families_have_no_violations(self):
        for spec in (ZERO, SUM22, DampingSpec("time_power", mu=1, lambda1=2),
                     DampingSpec("space_power", lambda2=2),
                     DampingSpec("separated_product", lambda1=0.6, lambda2=0.6)):
            report = check_assumptions(spec)
            self.assertEqual(report.violations, [], spec)
        self.assertAlmostEqual(check_assumptions(SUM22).c_a, 3.0, delta=1e-6)

    def test_monotonicity_holds_for_power_families(self):
        x = np.linspace(-50, 50, 1001)
        for spec in (SUM22, DampingSpec("space_power", lambda2=1.5)):
            self.assertTrue(np.all(x * spec.a2_prime(x) <= 1e-12))

    def test_increasing_space_factor_is_reported(self):
        report = check_assumptions(DampingSpec("space_power", lambda2=-0.5))
        kinds = {v.kind for v in report.violations}
        self.assertIn("monotone", kinds)
        self.assertIn("integrable", kinds)
        self.assertIsNone(report.c_a)

    def test_origin_convention_is_noted(self):
        self.assertTrue(any("x = 0" in note for note in check_assumptions(SUM22).notes))
        self.assertEqual(check_assumptions(ZERO).notes, [])

    def test_report_serialization(self):
        data = AssumptionReportSerializer(check_assumptions(SUM22)).data
        self.assertEqual(list(data), ["family", "c_a", "violations", "notes"])
        self.assertEqual(data["violations"], [])
        self.assertTrue(math.isclose(data["c_a"], 3.0, abs_tol=1e-6))


class DampingSerializerTests(SimpleTestCase):
    def test_builds_spec(self):
        ser = DampingSerializer(data={"family": "separated_sum", "lambda1": "2", "lambda2": "2"})
        self.assertTrue(ser.is_valid(), ser.errors)
        self.assertEqual(ser.to_spec(), SUM22)
        self.assertEqual(DampingSerializer().to_spec(dict(ser.validated_data)), SUM22)

    def test_rejects_unknown_family(self):
        ser = DampingSerializer(data={"family": "quadratic"})
        self.assertFalse(ser.is_valid())
        self.assertIn("family", ser.errors)
