import numpy as np
from django.test import SimpleTestCase, tag

from damping.coefficients import DampingSpec, integral_C_a
from euler_lifespan.errors import DomainError, MissingHistoryError
from gas.thermo import GasLaw
from oracle.simple_wave import riccati_closed_form
from solver.fields import FieldHistory, InitialData, Monitors, StopCause, init, run_until
from solver.grid import Grid1D
from solver.profiles import Profile
from .paths import (CharPath, PathFollower, RegionFollower, RegionKind, damped_factor_rate, integrating_factor,
                    region_boundaries, region_kind, trace)
from .riccati import (RiccatiState, dual_mode_deviation, gradient_crosscheck, riccati_evolve,
                      transported_state)

LAW = GasLaw(2)
ZERO = DampingSpec()
TIME2 = DampingSpec("time_power", mu=1.0, lambda1=2.0)
SUM22 = DampingSpec("separated_sum", lambda1=2, lambda2=2)


def gauss_slope_data(epsilon, **kwargs):
    return InitialData(phi=Profile("zero"), psi=Profile("gauss_slope"), epsilon=epsilon, **kwargs)


def solved_history(epsilon, spec=ZERO, t_stop=5.0, grid=None, cfl=0.9, **kwargs):
    grid = grid or Grid1D(-10, 10, 2001)
    history = FieldHistory(grid)
    state = init(grid, LAW, gauss_slope_data(epsilon, **kwargs))
    run_until(state, LAW, spec, cfl, t_stop, Monitors(history=history))
    return history


def frozen_path(q0, t_end, samples=20001, rx=0.0):
    t = np.linspace(0.0, t_end, samples)
    ones, zeros = np.ones_like(t), np.zeros_like(t)
    return CharPath(sign=1, anchor=(0.0, 0.0), t=t, x=t.copy(), u=ones, c=ones.copy(),
                    r=zeros, s=zeros.copy(), rx=np.full_like(t, rx), sx=np.full_like(t, q0))


class TraceTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.background = solved_history(0.0, t_stop=5.0)
        cls.decaying = solved_history(0.0, spec=TIME2, t_stop=5.0)

    def test_background_characteristics_are_straight(self):
        plus = trace(self.background, "+", (0.0, 0.0))
        minus = trace(self.background, "-", (0.0, 1.0))
        np.testing.assert_allclose(plus.x, plus.t, atol=1e-12)
        np.testing.assert_allclose(minus.x, 1.0 - minus.t, atol=1e-12)
        self.assertEqual(plus.kind, "Q")
        self.assertEqual(minus.kind, "Y")
        self.assertFalse(plus.exited)

    def test_backward_trace_returns_increasing_times(self):
        path = trace(self.background, 1, (3.0, 3.0), direction="backward")
        self.assertTrue(np.all(np.diff(path.t) > 0))
        self.assertAlmostEqual(path.x[0], 0.0, places=10)

    def test_leaving_the_grid_is_flagged(self):
        with self.assertLogs("characteristics.paths", "WARNING"):
            path = trace(self.background, "+", (0.0, 9.9))
        self.assertTrue(path.exited)
        self.assertEqual(path.x[-1], 10.0)

    def test_requires_history(self):
        with self.assertRaises(MissingHistoryError):
            trace(FieldHistory(Grid1D(-1, 1, 21)), "+", (0.0, 0.0))
        with self.assertRaises(DomainError):
            trace(self.background, "+", (0.0, 11.0))
        with self.assertRaises(DomainError):
            trace(self.background, "up", (0.0, 0.0))

    def test_integrating_factor_for_time_power_decay(self):
        path = trace(self.decaying, "+", (0.0, 0.0))
        t, A = integrating_factor(path, TIME2)
        self.assertEqual(A[0], 1.0)
        np.testing.assert_allclose(A, np.exp(0.5 * (1.0 - 1.0 / (1.0 + t))), rtol=1e-5)

    def test_undamped_factor_is_one(self):
        path = trace(self.background, "-", (0.0, 2.0))
        _, A = integrating_factor(path, ZERO)
        np.testing.assert_array_equal(A, 1.0)

    def test_factor_must_start_at_zero(self):
        path = trace(self.background, "+", (1.0, 0.0))
        with self.assertRaises(DomainError):
            integrating_factor(path, ZERO)

    def test_damped_factor_rate_methods_agree(self):
        path = trace(self.background, "+", (0.0, 0.0))
        integrating_factor(path, SUM22)
        analytic = damped_factor_rate(path, "analytic")
        difference = damped_factor_rate(path, "difference")
        np.testing.assert_allclose(analytic[1:-1], difference[1:-1], atol=1e-4)
        with self.assertRaises(DomainError):
            damped_factor_rate(path, "spline")


class RegionTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.background = solved_history(0.0, t_stop=3.0)

    def test_region_kind_follows_the_anchor(self):
        self.assertIs(region_kind(0.0), RegionKind.OMEGA)
        self.assertIs(region_kind(2.0), RegionKind.OMEGA_PLUS)
        self.assertIs(region_kind(-2.0), RegionKind.OMEGA_MINUS)

    def test_background_region_outside_the_light_cone(self):
        region = region_boundaries(self.background, 0.0)
        self.assertTrue(region.contains(2.0, [2.5, -3.0]))
        self.assertFalse(region.contains(2.0, [1.0]))
        np.testing.assert_array_equal(region.mask(2.0, np.array([-1.5, 0.0, 1.5])), [False, False, False])

    def test_right_region_is_bounded_by_the_plus_curve(self):
        region = region_boundaries(self.background, 2.0)
        self.assertIsNone(region.minus_path)
        self.assertAlmostEqual(region.plus_boundary(1.5), 3.5, places=10)
        self.assertTrue(region.contains(1.5, [3.6, 8.0]))
        self.assertFalse(region.contains(1.5, [3.4]))

    def test_left_region_is_bounded_by_the_minus_curve(self):
        region = region_boundaries(self.background, -2.0)
        self.assertIsNone(region.plus_path)
        self.assertTrue(region.contains(1.0, [-3.5, -9.0]))
        self.assertFalse(region.contains(1.0, [-2.5]))

    def test_follower_matches_traced_boundaries(self):
        grid = Grid1D(-10, 10, 2001)
        history = FieldHistory(grid)
        follower = RegionFollower(0.0)
        state = init(grid, LAW, gauss_slope_data(0.1))
        state, series = run_until(state, LAW, ZERO, 0.9, 3.0, Monitors(history=history, phi_source=follower))
        followed = follower.region()
        traced = region_boundaries(history, 0.0)
        for t in (0.5, 1.7, state.t):
            self.assertAlmostEqual(followed.plus_boundary(t), traced.plus_boundary(t), places=9)
            self.assertAlmostEqual(followed.minus_boundary(t), traced.minus_boundary(t), places=9)
        phi = series.column("phi_region")
        self.assertTrue(np.all(phi >= 0))
        self.assertAlmostEqual(phi[0], 2 * 0.1 * np.max(np.abs(Profile("gauss_slope")(grid.x))), places=6)


class FollowerTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.grid = Grid1D(-10, 10, 2001)
        cls.history = FieldHistory(cls.grid)
        cls.plus, cls.minus = PathFollower("+", 0.3), PathFollower("-", 0.3)
        state = init(cls.grid, LAW, gauss_slope_data(0.1))
        run_until(state, LAW, SUM22, 0.9, 3.0, Monitors(history=cls.history, observers=(cls.plus, cls.minus)))

    def test_follower_matches_the_traced_path(self):
        for follower in (self.plus, self.minus):
            followed = follower.path()
            traced = trace(self.history, follower.sign, (0.0, 0.3))
            self.assertEqual(followed.kind, traced.kind)
            np.testing.assert_allclose(followed.t, traced.t, rtol=0, atol=1e-12)
            for name in ("x", "u", "c", "r", "s", "rx", "sx"):
                np.testing.assert_allclose(getattr(followed, name), getattr(traced, name), rtol=1e-12, atol=1e-12)

    def test_follower_stops_at_the_grid_edge(self):
        grid = Grid1D(-1, 1, 201)
        follower = PathFollower("+", 0.9)
        with self.assertLogs("characteristics.paths", "WARNING"):
            run_until(init(grid, LAW, gauss_slope_data(0.0)), LAW, ZERO, 0.9, 0.5, Monitors(observers=(follower,)))
        path = follower.path()
        self.assertTrue(path.exited)
        self.assertEqual(path.x[-1], 1.0)
        self.assertLess(path.t[-1], 0.5)

    def test_follower_rejects_outside_anchors(self):
        with self.assertRaises(MissingHistoryError):
            PathFollower("-", 0.0).path()
        with self.assertRaises(DomainError):
            PathFollower("+", 5.0)(init(Grid1D(-1, 1, 21), LAW, gauss_slope_data(0.0)))


class CharacteristicGeometryTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.history = solved_history(0.1, spec=SUM22, t_stop=5.0)

    def test_plus_and_minus_paths_are_monotone_and_ordered(self):
        lower = trace(self.history, "+", (0.0, -0.5))
        upper = trace(self.history, "+", (0.0, 0.5))
        self.assertTrue(np.all(np.diff(lower.x) > 0))
        self.assertTrue(np.all(upper.x > lower.x))
        minus = trace(self.history, "-", (0.0, 0.5))
        self.assertTrue(np.all(np.diff(minus.x) < 0))

    def test_boundary_speeds_stay_in_the_regime(self):
        region = region_boundaries(self.history, 0.0)
        for path in (region.plus_path, region.minus_path):
            speed = np.abs(np.diff(path.x) / np.diff(path.t))
            self.assertTrue(np.all((speed >= 0.25) & (speed <= 4.0)))

    def test_plus_boundary_outruns_a_quarter_of_the_time(self):
        region = region_boundaries(self.history, 0.0)
        path = region.plus_path
        self.assertTrue(np.all(path.x >= path.t / 4.0))

    def test_backward_paths_stay_in_the_right_region(self):
        region = region_boundaries(self.history, 2.0)
        t0 = 4.0
        x0 = region.plus_boundary(t0) + 1.0
        for sign in ("+", "-"):
            path = trace(self.history, sign, (t0, x0), direction="backward")
            inside = [region.contains(t, x, tol=1e-9) for t, x in zip(path.t, path.x)]
            self.assertTrue(all(inside))

    def test_integrating_factors_respect_the_damping_bound(self):
        c_a = integral_C_a(SUM22)
        self.assertAlmostEqual(c_a, 3.0, places=6)
        anchors = np.linspace(-4.0, 4.0, 20)
        for k, x0 in enumerate(anchors):
            path = trace(self.history, "+" if k % 2 == 0 else "-", (0.0, float(x0)))
            _, A = integrating_factor(path, SUM22)
            bound = np.exp(c_a * (1.0 + 4.0 / float(np.min(path.c))) / 2.0)
            self.assertLessEqual(float(np.max(A)), bound)
            self.assertGreaterEqual(float(np.min(A)), 1.0 / bound)


class RiccatiTests(SimpleTestCase):
    def test_frozen_gradient_follows_the_closed_form(self):
        coeff = -(LAW.gamma + 1.0) / 4.0
        for q0, t_end in ((1.0, 1.0), (-1.0, 0.8)):
            for mode in ("differential", "volterra"):
                path = frozen_path(q0, t_end)
                state = riccati_evolve(path, LAW, ZERO, mode=mode)
                expected = np.array([riccati_closed_form(q0, coeff, t) for t in state.t])
                np.testing.assert_allclose(state.values, expected, rtol=1e-6)
                self.assertFalse(state.blowup)

    def test_compressive_gradient_blows_up_near_the_pole(self):
        path = frozen_path(-1.0, 2.0)
        state = riccati_evolve(path, LAW, ZERO, g_stop=100.0)
        self.assertTrue(state.blowup)
        self.assertAlmostEqual(state.blowup_time, 4.0 / 3.0, delta=0.02)
        self.assertLess(state.blowup_time, 4.0 / 3.0)

    def test_background_gradient_stays_zero(self):
        history = solved_history(0.0, t_stop=2.0)
        for sign in ("+", "-"):
            path = trace(history, sign, (0.0, 0.5))
            for mode in ("differential", "volterra"):
                state = riccati_evolve(path, LAW, TIME2, mode=mode)
                np.testing.assert_array_equal(state.values, 0.0)

    def test_forms_differ_when_both_gradients_are_present(self):
        derived = riccati_evolve(frozen_path(-0.5, 0.5, 2001, rx=0.3), LAW, ZERO, form="derived")
        printed = riccati_evolve(frozen_path(-0.5, 0.5, 2001, rx=0.3), LAW, ZERO, form="printed")
        self.assertEqual(derived.values[0], printed.values[0])
        self.assertGreater(abs(derived.value - printed.value), 1e-3)

    def test_unsampled_path_is_rejected(self):
        path = CharPath(sign=1, anchor=(0.0, 0.0), t=np.linspace(0, 1, 5), x=np.zeros(5))
        with self.assertRaises(DomainError):
            riccati_evolve(path, LAW, ZERO)

    def test_simple_wave_gradient_matches_the_grid(self):
        grid = Grid1D(-6, 10, 3201)
        history = solved_history(0.1, grid=grid, t_stop=3.0, simple_wave=True)
        path = trace(history, "+", (0.0, 0.0))
        state = riccati_evolve(path, LAW, ZERO)
        self.assertFalse(state.blowup)
        self.assertLess(gradient_crosscheck(path, state, grid.dx), 0.1)
        self.assertLess(state.value, state.values[0])

    def test_transported_state_keeps_the_simple_wave_invariant(self):
        grid = Grid1D(-6, 10, 3201)
        history = solved_history(0.1, grid=grid, t_stop=3.0, simple_wave=True)
        path = trace(history, "+", (0.0, -0.5))
        integrating_factor(path, ZERO)
        u, c, r, s = transported_state(path, LAW)
        np.testing.assert_array_equal(s, path.s[0])
        np.testing.assert_array_equal(r, path.r)
        np.testing.assert_allclose(u, path.u, atol=1e-3)
        np.testing.assert_allclose(c, LAW.sound_speed(u))

    def test_transported_invariant_decays_with_constant_damping(self):
        path = frozen_path(0.0, 1.0, samples=1001)
        path.s = np.full_like(path.t, 0.1)
        path.r = np.zeros_like(path.t)
        integrating_factor(path, DampingSpec("time_power", mu=1.0, lambda1=0.0))
        _, _, _, s = transported_state(path, LAW)
        # s' = -s/2 with r = 0
        np.testing.assert_allclose(s, 0.1 * np.exp(-0.5 * path.t), rtol=1e-6)

    def test_crosscheck_window_ends_once_the_gradient_has_grown(self):
        path = frozen_path(-1.0, 1.0, samples=11)
        integrating_factor(path, ZERO)
        values = np.array([-1.0] * 5 + [-5.0] * 6)
        state = RiccatiState(kind="Q", t=path.t, values=values)
        self.assertEqual(gradient_crosscheck(path, state, 0.01), 0.0)
        self.assertAlmostEqual(gradient_crosscheck(path, state, 0.01, growth=0), 4.0)

    def test_modes_agree_on_a_frozen_path(self):
        self.assertLess(dual_mode_deviation(frozen_path(-0.5, 1.0), LAW, ZERO), 1e-5)

    @tag("acceptance")
    def test_modes_agree_along_a_damped_blowup_run(self):
        grid = Grid1D(-25, 25, 5001)
        followers = [PathFollower("+", 0.0), PathFollower("+", -0.3)]
        state = init(grid, LAW, gauss_slope_data(0.2))
        _, series = run_until(state, LAW, SUM22, 1.0, 20.0, Monitors(observers=tuple(followers)))
        self.assertEqual(series.stop_cause, StopCause.GRADIENT)
        for follower in followers:
            path = follower.path()
            integrating_factor(path, SUM22)
            self.assertLess(dual_mode_deviation(path, LAW, SUM22), 0.05)
            differential = riccati_evolve(path, LAW, SUM22)
            self.assertLess(gradient_crosscheck(path, differential, grid.dx), 0.2)
