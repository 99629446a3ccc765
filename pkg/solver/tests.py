import numpy as np
from django.test import SimpleTestCase, tag

from damping.coefficients import DampingSpec
from euler_lifespan.errors import DomainError, InstabilityError, VacuumError
from gas.thermo import GasLaw
from .fields import (FieldHistory, FieldState, GradientRule, InitialData, Monitors, SERIES_COLUMNS, StopCause,
                     TimeSeries, init, initial_steepness, local_gradient, run_until, step, sup_norms_on_region)
from .grid import Grid1D
from .profiles import Profile

LAW = GasLaw(2)
ZERO = DampingSpec()
SUM22 = DampingSpec("separated_sum", lambda1=2, lambda2=2)


def gauss_slope_data(epsilon, **kwargs):
    return InitialData(phi=Profile("zero"), psi=Profile("gauss_slope"), epsilon=epsilon, **kwargs)


class _Everywhere:
    def mask(self, t, x):
        return np.ones_like(x, dtype=bool)


class _Nowhere:
    def mask(self, t, x):
        return np.zeros_like(x, dtype=bool)


class GridTests(SimpleTestCase):
    def test_spacing_and_nodes(self):
        grid = Grid1D(-1.0, 1.0, 5)
        self.assertEqual(grid.dx, 0.5)
        np.testing.assert_allclose(grid.x, [-1, -0.5, 0, 0.5, 1])

    def test_rejects_degenerate_grids(self):
        with self.assertRaises(DomainError):
            Grid1D(0.0, 1.0, 2)
        with self.assertRaises(DomainError):
            Grid1D(1.0, 1.0, 11)

    def test_coarsening_keeps_every_other_node(self):
        grid = Grid1D(-2.0, 2.0, 81)
        coarse = grid.coarsened(2)
        self.assertEqual(coarse.nx, 41)
        np.testing.assert_allclose(coarse.x, grid.x[::2])
        with self.assertRaises(DomainError):
            Grid1D(0.0, 1.0, 12).coarsened(2)

    def test_cell_index_is_clamped(self):
        grid = Grid1D(0.0, 1.0, 11)
        self.assertEqual(int(grid.cell_index(0.55)), 5)
        self.assertEqual(int(grid.cell_index(1.0)), 9)
        self.assertEqual(int(grid.cell_index(-3.0)), 0)


class ProfileTests(SimpleTestCase):
    def test_derivatives_match_finite_differences(self):
        x = np.linspace(-3, 3, 601)
        h = 1e-6
        for name in ("gaussian", "gauss_slope", "bump", "bump_slope"):
            profile = Profile(name, amplitude=0.7, center=0.3, width=1.5)
            fd = (profile(x + h) - profile(x - h)) / (2 * h)
            np.testing.assert_allclose(profile.derivative(x), fd, atol=1e-6)

    def test_gauss_slope_has_unit_negative_slope_at_center(self):
        self.assertAlmostEqual(float(Profile("gauss_slope").derivative(0.0)), -1.0)


class InitTests(SimpleTestCase):
    def test_zero_amplitude_is_background(self):
        grid = Grid1D(-5, 5, 101)
        state = init(grid, LAW, gauss_slope_data(0.0))
        self.assertTrue(np.all(state.r == 0))
        self.assertTrue(np.all(state.s == 0))
        np.testing.assert_array_equal(state.u, 1.0)
        np.testing.assert_array_equal(state.c, 1.0)

    def test_velocity_only_data_gives_equal_invariants(self):
        grid = Grid1D(-5, 5, 1001)
        data = gauss_slope_data(0.1)
        state = init(grid, LAW, data)
        expected = 0.1 * data.psi(grid.x)
        np.testing.assert_allclose(state.r, expected, atol=1e-15)
        np.testing.assert_allclose(state.s, expected, atol=1e-15)
        self.assertAlmostEqual(data.measured_k, 1.0)
        self.assertTrue(data.kk_satisfied)

    def test_centered_gradient_at_origin(self):
        grid = Grid1D(-5, 5, 1001)
        state = init(grid, LAW, gauss_slope_data(0.1))
        self.assertAlmostEqual(float(state.sx[500]), -0.1, delta=1e-4)

    def test_simple_wave_data_has_no_r_component(self):
        grid = Grid1D(-5, 5, 1001)
        data = gauss_slope_data(0.1, simple_wave=True)
        state = init(grid, LAW, data)
        np.testing.assert_allclose(state.r, 0.0, atol=1e-14)
        np.testing.assert_allclose(state.s, 0.2 * data.psi(grid.x), atol=1e-14)

    def test_exact_riemann_derivatives(self):
        grid = Grid1D(-5, 5, 2001)
        data = InitialData(phi=Profile("gaussian"), psi=Profile("gauss_slope"), epsilon=0.2)
        state = init(grid, LAW, data)
        _, _, r_prime, s_prime = data.riemann_profiles(LAW, grid.x)
        np.testing.assert_allclose(state.rx[1:-1], r_prime[1:-1], atol=1e-4)
        np.testing.assert_allclose(state.sx[1:-1], s_prime[1:-1], atol=1e-4)

    def test_positivity_floor_is_enforced(self):
        grid = Grid1D(-5, 5, 101)
        data = InitialData(phi=Profile("gaussian", amplitude=-1.0), psi=Profile("zero"), epsilon=0.95)
        with self.assertRaises(VacuumError):
            init(grid, LAW, data)


class StepTests(SimpleTestCase):
    def test_background_is_steady_for_every_family(self):
        grid = Grid1D(-10, 10, 201)
        for spec in (ZERO, SUM22, DampingSpec("time_power", mu=2, lambda1=1),
                     DampingSpec("separated_product", lambda1=0.6, lambda2=0.6)):
            state = init(grid, LAW, gauss_slope_data(0.0))
            for _ in range(5):
                state = step(state, LAW, spec, 0.9)
            self.assertGreater(state.t, 0)
            self.assertTrue(np.all(state.r == 0))
            self.assertTrue(np.all(state.s == 0))

    def test_time_step_follows_cfl_and_damping_cap(self):
        grid = Grid1D(-10, 10, 201)
        state = init(grid, LAW, gauss_slope_data(0.0))
        self.assertAlmostEqual(step(state, LAW, ZERO, 0.5).t, 0.05)
        strong = DampingSpec("time_power", mu=100, lambda1=0)
        self.assertAlmostEqual(step(state, LAW, strong, 0.9).t, 0.005)
        self.assertAlmostEqual(step(state, LAW, ZERO, 0.9, dt_max=0.01).t, 0.01)

    def test_rejects_bad_cfl(self):
        grid = Grid1D(-10, 10, 201)
        state = init(grid, LAW, gauss_slope_data(0.1))
        with self.assertRaises(DomainError):
            step(state, LAW, ZERO, 1.5)

    def test_non_finite_field_is_an_instability(self):
        grid = Grid1D(-10, 10, 201)
        state = init(grid, LAW, gauss_slope_data(0.1))
        state.r[100] = np.nan
        with self.assertRaises(InstabilityError):
            step(state, LAW, ZERO, 0.9)

    def test_simple_wave_keeps_r_identically_zero(self):
        grid = Grid1D(-10, 10, 2001)
        state = init(grid, LAW, gauss_slope_data(0.1, simple_wave=True))
        state, _ = run_until(state, LAW, ZERO, 0.9, 3.0)
        self.assertLessEqual(float(np.max(np.abs(state.r))), 1e-14)
        self.assertGreater(float(np.max(np.abs(state.s))), 0.05)

    def test_damped_scheme_obeys_maximum_principle(self):
        grid = Grid1D(-10, 10, 2001)
        state = init(grid, LAW, gauss_slope_data(0.1))
        bound = max(np.max(np.abs(state.r)), np.max(np.abs(state.s)))
        while state.t < 2.0:
            state = step(state, LAW, SUM22, 0.9)
            self.assertLessEqual(max(np.max(np.abs(state.r)), np.max(np.abs(state.s))), bound + 1e-10)

    def test_finite_speed_of_propagation(self):
        grid = Grid1D(-12, 12, 2401)
        data = InitialData(phi=Profile("bump"), psi=Profile("bump_slope"), epsilon=0.1)
        state = init(grid, LAW, data)
        state, _ = run_until(state, LAW, ZERO, 0.9, 2.0)
        far = np.abs(grid.x) > 1 + 4 * 2.0
        self.assertLessEqual(float(np.max(np.abs(state.r[far]))), 1e-10)
        self.assertLessEqual(float(np.max(np.abs(state.s[far]))), 1e-10)


class RunUntilTests(SimpleTestCase):
    def test_background_reaches_horizon(self):
        grid = Grid1D(-15, 15, 301)
        state = init(grid, LAW, gauss_slope_data(0.0))
        state, series = run_until(state, LAW, SUM22, 0.9, 10.0)
        self.assertEqual(series.stop_cause, StopCause.HORIZON)
        self.assertAlmostEqual(state.t, 10.0)
        for column in ("max_abs_rx", "max_abs_sx", "max_abs_ux", "max_abs_vx"):
            self.assertTrue(np.all(series.column(column) == 0))
        self.assertEqual(list(series.to_frame().columns), list(SERIES_COLUMNS))

    def test_stop_time_must_lie_ahead(self):
        grid = Grid1D(-5, 5, 101)
        state = init(grid, LAW, gauss_slope_data(0.1))
        with self.assertRaises(DomainError):
            run_until(state, LAW, ZERO, 0.9, 0.0)

    def test_undamped_gauss_slope_data_stops_on_gradient(self):
        grid = Grid1D(-14, 14, 5601)
        state = init(grid, LAW, gauss_slope_data(0.2))
        state, series = run_until(state, LAW, ZERO, 1.0, 20.0, Monitors(growth_stop=5.0))
        self.assertEqual(series.stop_cause, StopCause.GRADIENT)
        self.assertTrue(3.0 < state.t < 12.0)
        self.assertGreaterEqual(series.steepness[-1], 5 * series.steepness[0])
        self.assertIs(series.gradient_rule, GradientRule.GROWTH)
        self.assertIn("growth rule", series.stop_message)
        self.assertEqual(series.regime_exits, 0)

    def test_threshold_rule_is_reported(self):
        grid = Grid1D(-5, 5, 1001)
        state = init(grid, LAW, gauss_slope_data(0.1))
        _, series = run_until(state, LAW, ZERO, 0.9, 1.0, Monitors(g_stop=0.05))
        self.assertEqual(series.stop_cause, StopCause.GRADIENT)
        self.assertIs(series.gradient_rule, GradientRule.THRESHOLD)
        self.assertEqual(series.steps, 1)

    def test_growth_rule_ignores_amplitude_decay(self):
        grid = Grid1D(-10, 10, 2001)
        state = init(grid, LAW, gauss_slope_data(0.1))
        decayed = FieldState(grid=grid, t=1.0, r=0.1 * state.r, s=0.1 * state.s).refresh(LAW)
        steeper = FieldState(grid=grid, t=2.0, r=state.r.copy(), s=state.s.copy()).refresh(LAW)
        steeper.sx *= 2.0
        monitors = Monitors(growth_stop=1.5, resolution_fraction=0.0)
        self.assertIsNone(monitors.gradient_fired(decayed, initial_steepness(state)))
        self.assertIs(monitors.gradient_fired(steeper, initial_steepness(state)), GradientRule.GROWTH)
        series = TimeSeries()
        series.record(state)
        series.record(decayed)
        self.assertAlmostEqual(series.steepness[1], series.steepness[0])
        self.assertAlmostEqual(series.gradient[1], 0.1 * series.gradient[0])

    def test_observers_see_every_level(self):
        grid = Grid1D(-10, 10, 201)
        state = init(grid, LAW, gauss_slope_data(0.1))
        seen = []
        _, series = run_until(state, LAW, ZERO, 0.9, 1.0, Monitors(observers=(lambda s: seen.append(s.t),)))
        np.testing.assert_array_equal(seen, series.column("t"))

    @tag("acceptance")
    def test_constant_damping_keeps_small_gradients_bounded(self):
        grid = Grid1D(-260, 260, 52001)
        state = init(grid, LAW, gauss_slope_data(0.01))
        state, series = run_until(state, LAW, DampingSpec("time_power", mu=1.0, lambda1=0.0), 1.0, 200.0)
        self.assertEqual(series.stop_cause, StopCause.HORIZON)
        self.assertAlmostEqual(state.t, 200.0)
        sx = series.column("max_abs_sx")
        self.assertLessEqual(float(np.max(sx)), 1.5 * sx[0])

    def test_step_budget(self):
        grid = Grid1D(-5, 5, 101)
        state = init(grid, LAW, gauss_slope_data(0.01))
        state, series = run_until(state, LAW, ZERO, 0.9, 10.0, Monitors(max_steps=7))
        self.assertEqual(series.stop_cause, StopCause.BUDGET)
        self.assertEqual(series.steps, 7)
        self.assertEqual(len(series.rows), 8)

    def test_errors_carry_the_stopping_cause(self):
        grid = Grid1D(-5, 5, 101)
        state = init(grid, LAW, gauss_slope_data(0.1))
        state.s[50] = np.inf
        with self.assertRaises(InstabilityError) as ctx:
            run_until(state, LAW, ZERO, 0.9, 1.0)
        self.assertEqual(ctx.exception.stop_cause, StopCause.INSTABILITY)
        self.assertEqual(ctx.exception.series.stop_cause, StopCause.INSTABILITY)
        self.assertIs(ctx.exception.state, state)

    def test_resolution_monitor_can_be_disabled(self):
        monitors = Monitors(g_stop=1e4, resolution_fraction=0.0)
        grid = Grid1D(-5, 5, 11)
        state = init(grid, LAW, gauss_slope_data(0.5))
        self.assertFalse(monitors.gradient_fired(state))
        self.assertTrue(Monitors(resolution_fraction=0.25).gradient_fired(state))

    def test_phi_source_is_recorded(self):
        grid = Grid1D(-10, 10, 201)
        state = init(grid, LAW, gauss_slope_data(0.1))
        _, series = run_until(state, LAW, ZERO, 0.9, 1.0, Monitors(phi_source=lambda s: 0.5))
        self.assertTrue(np.all(series.column("phi_region") == 0.5))


class HistoryTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid1D(-10, 10, 201)
        state = init(self.grid, LAW, gauss_slope_data(0.1))
        self.history = FieldHistory(self.grid, stride=3)
        self.final, self.series = run_until(state, LAW, ZERO, 0.9, 1.0, Monitors(history=self.history))

    def test_stride_and_final_level(self):
        times = self.history.times
        self.assertEqual(times[0], 0.0)
        self.assertEqual(times[-1], self.final.t)
        self.assertEqual(len(self.history), len(range(0, self.series.steps + 1, 3))
                         + (self.series.steps % 3 != 0))

    def test_values_at_nodes_and_between_levels(self):
        k = 1
        t = self.history.times[k]
        x = self.grid.x[57]
        self.assertEqual(self.history.value_at("s", t, x), self.history.array("s", k)[57])
        t_mid = 0.5 * (self.history.times[1] + self.history.times[2])
        expected = 0.5 * (self.history.array("u", 1)[57] + self.history.array("u", 2)[57])
        self.assertAlmostEqual(self.history.value_at("u", t_mid, x), expected)

    def test_gradient_at_node_matches_centered_difference(self):
        values = self.history.array("r", 0)
        expected = (values[101] - values[99]) / (2 * self.grid.dx)
        self.assertAlmostEqual(self.history.gradient_at("r", 0.0, self.grid.x[100]), expected)
        self.assertAlmostEqual(float(local_gradient(values, self.grid, self.grid.x[100])), expected)

    def test_level_rebuilds_the_stored_state(self):
        k = len(self.history) - 1
        level = self.history.level(k, LAW)
        self.assertEqual(level.t, self.final.t)
        np.testing.assert_array_equal(level.s, self.final.s)
        np.testing.assert_allclose(level.u, self.final.u)
        np.testing.assert_allclose(level.sx, self.final.sx)


class SupNormTests(SimpleTestCase):
    def test_background_norms_vanish(self):
        state = init(Grid1D(-5, 5, 101), LAW, gauss_slope_data(0.0))
        norms = sup_norms_on_region(state, _Everywhere())
        self.assertEqual((norms.r, norms.s, norms.rx, norms.sx, norms.ux, norms.vx), (0, 0, 0, 0, 0, 0))
        self.assertFalse(norms.empty)

    def test_empty_region_is_flagged(self):
        state = init(Grid1D(-5, 5, 101), LAW, gauss_slope_data(0.1))
        norms = sup_norms_on_region(state, _Nowhere())
        self.assertTrue(norms.empty)
        self.assertEqual(norms.phi, 0.0)

    def test_norms_scale_linearly_with_amplitude(self):
        grid = Grid1D(-10, 10, 2001)
        sums = []
        for epsilon in (0.1, 0.05):
            state, _ = run_until(init(grid, LAW, gauss_slope_data(epsilon)), LAW, SUM22, 0.9, 2.0)
            norms = sup_norms_on_region(state)
            sums.append(norms.r + norms.s)
        self.assertAlmostEqual(sums[0] / sums[1], 2.0, delta=0.4)


class TimeSeriesTests(SimpleTestCase):
    def test_gradient_is_the_larger_invariant_gradient(self):
        series = TimeSeries(rows=[(0.0, 1, 1, 0.5, 0.7, 0, 0, 0), (1.0, 1, 1, 2.0, 0.1, 0, 0, 0)])
        np.testing.assert_array_equal(series.gradient, [0.7, 2.0])
        self.assertEqual(series.t_stop, 1.0)

    def test_steepness_divides_by_the_oscillation(self):
        rows = [(0.0, 1, 1, 0.5, 0.7, 0, 0, 0), (1.0, 1, 1, 2.0, 0.1, 0, 0, 0), (2.0, 1, 1, 0.3, 0, 0, 0, 0)]
        series = TimeSeries(rows=rows, oscillations=[1.4, 0.5, 0.0])
        np.testing.assert_allclose(series.steepness, [0.5, 4.0, 0.3])
        np.testing.assert_array_equal(TimeSeries(rows=rows).steepness, series.gradient)
