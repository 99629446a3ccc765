import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import quad

from euler_lifespan.errors import DomainError, VacuumError
from .thermo import GasLaw, GasState, RiemannPair


class GasLawTests(SimpleTestCase):
    def test_gamma_must_exceed_one(self):
        with self.assertRaisesMessage(DomainError, "gamma must exceed 1"):
            GasLaw(gamma=0.9)
        with self.assertRaises(DomainError):
            GasLaw(gamma=1.0)

    def test_pressure_closed_forms(self):
        self.assertAlmostEqual(GasLaw(2).pressure(1.0), 0.5)
        self.assertAlmostEqual(GasLaw(1.5).pressure(4.0), 1.0 / 12.0)
        self.assertAlmostEqual(GasLaw(3).pressure(1.0), 1.0 / 3.0)

    def test_sound_speed_closed_forms(self):
        for gamma in (1.4, 2, 3, 5):
            self.assertEqual(GasLaw(gamma).sound_speed(1.0), 1.0)
        self.assertAlmostEqual(GasLaw(3).sound_speed(4.0), 1.0 / 16.0)
        self.assertAlmostEqual(GasLaw(2).sound_speed(0.25), 8.0)

    def test_eta_closed_forms(self):
        for gamma in (1.4, 2, 3, 5):
            self.assertAlmostEqual(GasLaw(gamma).eta(1.0), 2.0 / (gamma - 1.0))
        self.assertAlmostEqual(GasLaw(3).eta(2.0), 0.5)

    def test_eta_matches_quadrature_of_sound_speed(self):
        law = GasLaw(2)
        value, _ = quad(law.sound_speed, 1.0, np.inf, epsabs=1e-12)
        self.assertAlmostEqual(value, 2.0, delta=1e-8)

    def test_functions_reject_nonpositive_volume(self):
        law = GasLaw(2)
        for fn in (law.pressure, law.sound_speed, law.eta, law.theta_gamma):
            with self.assertRaises(DomainError):
                fn(0.0)
            with self.assertRaises(DomainError):
                fn(np.array([1.0, -2.0]))

    def test_vacuum_floor_is_reported_distinctly(self):
        law = GasLaw(2, u_floor=1e-3)
        with self.assertRaises(VacuumError):
            law.sound_speed(5e-4)

    def test_sound_speed_matches_pressure_derivative(self):
        h = 1e-6
        for gamma in (1.4, 2, 3, 5):
            law = GasLaw(gamma)
            u = np.linspace(0.3, 4.0, 25)
            dp = (law.pressure(u + h) - law.pressure(u - h)) / (2 * h)
            np.testing.assert_allclose(law.sound_speed(u), np.sqrt(-dp), rtol=1e-6)

    def test_sound_speed_is_decreasing(self):
        c = GasLaw(1.4).sound_speed(np.linspace(0.1, 10, 200))
        self.assertTrue(np.all(np.diff(c) < 0))


class RiemannInvariantTests(SimpleTestCase):
    def test_background_maps_to_zero(self):
        pair = GasLaw(2).riemann_from_state(GasState(u=1.0, v=0.0))
        self.assertEqual((pair.r, pair.s), (0.0, 0.0))

    def test_velocity_shift(self):
        pair = GasLaw(2).riemann_from_state(GasState(u=1.0, v=0.1))
        self.assertAlmostEqual(pair.r, 0.1)
        self.assertAlmostEqual(pair.s, 0.1)

    def test_gamma_three_example_and_inverse(self):
        law = GasLaw(3)
        pair = law.riemann_from_state(GasState(u=2.0, v=0.0))
        self.assertAlmostEqual(pair.r, 0.5)
        self.assertAlmostEqual(pair.s, -0.5)
        state = law.state_from_riemann(RiemannPair(r=0.5, s=-0.5))
        self.assertAlmostEqual(state.u, 2.0)
        self.assertAlmostEqual(state.v, 0.0)

    def test_inverse_of_background(self):
        state = GasLaw(2).state_from_riemann(RiemannPair(r=0.0, s=0.0))
        self.assertEqual((state.u, state.v), (1.0, 0.0))

    def test_random_round_trip(self):
        rng = np.random.default_rng(20)
        for gamma in (1.4, 2, 3, 5):
            law = GasLaw(gamma)
            u = rng.uniform(0.5, 2.0, 10_000)
            v = rng.uniform(-1.0, 1.0, 10_000)
            r, s = law.riemann_invariants(u, v)
            u2, v2 = law.state_variables(r, s)
            self.assertLess(np.max(np.abs(u2 - u)), 1e-12)
            self.assertLess(np.max(np.abs(v2 - v)), 1e-12)

    def test_wide_round_trip_and_identities(self):
        law = GasLaw(1.4)
        u, v = np.meshgrid(np.linspace(0.1, 10, 60), np.linspace(-5, 5, 60))
        r, s = law.riemann_invariants(u, v)
        np.testing.assert_allclose(r + s, 2 * v, atol=1e-13)
        np.testing.assert_allclose(s - r, 2 * law.eta(u) - 4 / (law.gamma - 1), atol=1e-12)
        u2, v2 = law.state_variables(r, s)
        np.testing.assert_allclose(u2, u, rtol=0, atol=1e-12)
        np.testing.assert_allclose(v2, v, rtol=0, atol=1e-12)

    def test_inverse_rejects_vacuum(self):
        law = GasLaw(2)
        with self.assertRaises(VacuumError):
            law.state_from_riemann(RiemannPair(r=3.0, s=-3.0))


class ThetaGammaTests(SimpleTestCase):
    def test_branches(self):
        self.assertEqual(GasLaw(3).theta_gamma(1.0), 0.0)
        self.assertAlmostEqual(GasLaw(2).theta_gamma(16.0), 4.0)
        for gamma in (1.4, 2, 3, 5):
            self.assertAlmostEqual(GasLaw(gamma).theta_gamma(1.0), 0.0)

    def test_continuous_in_gamma_at_three(self):
        for gamma in (3 - 1e-6, 3 + 1e-6):
            self.assertAlmostEqual(GasLaw(gamma).theta_gamma(2.0), np.log(2.0), delta=1e-5)

    def test_derivative_is_square_root_of_sound_speed(self):
        h = 1e-6
        for gamma in (1.4, 2, 3, 5):
            law = GasLaw(gamma)
            u = np.linspace(0.4, 3.0, 30)
            dtheta = (law.theta_gamma(u + h) - law.theta_gamma(u - h)) / (2 * h)
            np.testing.assert_allclose(dtheta, np.sqrt(law.sound_speed(u)), rtol=1e-6)


class SimpleWaveSpeedTests(SimpleTestCase):
    def test_speed_matches_sound_speed_of_recovered_state(self):
        law = GasLaw(2)
        s = np.linspace(-0.3, 0.3, 11)
        u, _ = law.state_variables(np.zeros_like(s), s)
        np.testing.assert_allclose(law.simple_wave_speed(s, "s"), law.sound_speed(u), rtol=1e-12)
        u, _ = law.state_variables(s, np.zeros_like(s))
        np.testing.assert_allclose(law.simple_wave_speed(s, "r"), law.sound_speed(u), rtol=1e-12)

    def test_speed_slope_at_background(self):
        self.assertAlmostEqual(GasLaw(2).simple_wave_speed_prime(0.0), 0.75)
