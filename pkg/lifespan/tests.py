import math

import numpy as np
from django.test import SimpleTestCase, tag

from euler_lifespan.errors import FitFailure, InsufficientDataError
from oracle.simple_wave import SimpleWaveOracle, simple_wave_T_star
from runs.config import default_config
from solver.fields import StopCause, TimeSeries
from .blowup import (extrapolate_blowup_time, estimate_T_star, localize_blowup, phi_series, richardson_T_star,
                     simulate)
from .serializers import BlowupReportSerializer, ScalingFitSerializer
from .sweep import SweepRow, fit_scaling, is_monotone_nonincreasing, phi_ratio_spread, run_sweep


def rows_from(t_star, epsilons):
    return [SweepRow(epsilon=eps, t_stop=0.9 * t_star(eps), t_star=t_star(eps), stopped_cause="gradient")
            for eps in epsilons]


class ExtrapolationTests(SimpleTestCase):
    def test_reciprocal_fit_recovers_the_pole(self):
        t = np.linspace(0.0, 0.95, 400)
        self.assertAlmostEqual(extrapolate_blowup_time(t, 2.0 / (1.0 - t)), 1.0, places=9)

    def test_estimate_is_never_before_the_stop(self):
        t = np.linspace(0.0, 0.97, 400)
        g = 1.0 / (1.0 - t)
        g[-1] *= 1.5
        self.assertGreaterEqual(extrapolate_blowup_time(t, g), 0.97)

    def test_too_few_hot_samples(self):
        t = np.linspace(0.0, 0.5, 100)
        with self.assertRaisesMessage(FitFailure, "samples exceed"):
            extrapolate_blowup_time(t, 1.0 / (1.0 - t))

    def test_recovering_gradient_is_rejected(self):
        t = np.linspace(0.0, 3.0, 600)
        g = 1.0 / (np.abs(1.0 - t) + 0.05)
        with self.assertRaises(FitFailure):
            extrapolate_blowup_time(t, g)

    def test_zero_initial_gradient_is_rejected(self):
        with self.assertRaises(FitFailure):
            extrapolate_blowup_time([0.0, 1.0], [0.0, 1.0])

    def test_only_gradient_stops_are_extrapolated(self):
        series = TimeSeries(rows=[(0.0, 0, 0, 1.0, 1.0, 0, 0, 0)])
        series.stop(StopCause.HORIZON)
        with self.assertRaises(FitFailure):
            estimate_T_star(series)

    def test_two_grid_estimate_removes_the_first_order_error(self):
        self.assertAlmostEqual(richardson_T_star(13.85, 14.37), 13.33)
        self.assertAlmostEqual(richardson_T_star(13.59, 13.85), 13.33)
        self.assertAlmostEqual(richardson_T_star(10.0, 10.9, ratio=4.0), 9.7)

    def test_two_grid_estimate_needs_agreeing_grids(self):
        with self.assertRaises(FitFailure):
            richardson_T_star(10.0, 14.0)
        with self.assertRaises(FitFailure):
            richardson_T_star(10.0, 10.5, ratio=1.0)

    def test_steepness_drives_the_extrapolation(self):
        t = np.linspace(0.0, 0.95, 400)
        g = 2.0 / (1.0 - t)
        osc = 0.5 * np.exp(-t)
        rows = [(ti, 1, 1, gi * oi, 0, 0, 0, 0) for ti, gi, oi in zip(t, g, osc)]
        series = TimeSeries(rows=rows, oscillations=list(osc))
        series.stop(StopCause.GRADIENT)
        self.assertAlmostEqual(estimate_T_star(series), 1.0, places=9)


class ScalingFitTests(SimpleTestCase):
    def test_power_law_rows(self):
        fit, alternatives = fit_scaling(rows_from(lambda eps: 3.0 / eps, (0.2, 0.1, 0.05, 0.025)))
        self.assertEqual(fit.model, "power")
        self.assertAlmostEqual(fit.exponent_or_rate, -1.0)
        self.assertAlmostEqual(fit.r_squared, 1.0)
        self.assertEqual(fit.rows_used, 4)
        self.assertLess(alternatives["exponential"].r_squared, 1.0)

    def test_exponential_rows(self):
        fit, _ = fit_scaling(rows_from(lambda eps: 2.0 * math.exp(0.5 / eps), (0.5, 0.3, 0.2, 0.1)))
        self.assertEqual(fit.model, "exponential")
        self.assertAlmostEqual(fit.exponent_or_rate, 0.5)

    def test_horizon_rows_are_not_fitted(self):
        rows = rows_from(lambda eps: 1.0 / eps, (0.2, 0.1))
        rows.append(SweepRow(epsilon=0.05, t_stop=50.0, t_star=None, stopped_cause="horizon"))
        with self.assertRaises(InsufficientDataError) as ctx:
            fit_scaling(rows)
        self.assertEqual(ctx.exception.exit_code, 3)

    def test_monotone_and_spread_helpers(self):
        rows = rows_from(lambda eps: 1.0 / eps, (0.2, 0.1, 0.05))
        self.assertTrue(is_monotone_nonincreasing(rows))
        self.assertFalse(is_monotone_nonincreasing(rows_from(lambda eps: eps, (0.2, 0.1))))
        self.assertTrue(math.isnan(phi_ratio_spread(rows)))
        rows = [SweepRow(0.1, 1.0, 2.0, "gradient", phi_max=1.0, phi_max_ratio=r) for r in (1.0, 1.2, 1.5)]
        self.assertAlmostEqual(phi_ratio_spread(rows), 1.5)

    def test_fit_serializer(self):
        fit, _ = fit_scaling(rows_from(lambda eps: 3.0 / eps, (0.2, 0.1, 0.05)))
        data = ScalingFitSerializer(fit).data
        self.assertEqual(data["model"], "power")
        self.assertEqual(data["rows_used"], 3)


class SimulateTests(SimpleTestCase):
    def test_small_data_reach_the_horizon(self):
        config = default_config(initial={"epsilon": 0.05}, solver={"t_max": 1.0},
                                grid={"dx": 0.05, "speed_bound": 1.5})
        result = simulate(config, keep_history=True)
        report = result.report
        self.assertEqual(report.stopped_cause, "horizon")
        self.assertAlmostEqual(report.t_stop, 1.0)
        self.assertIsNone(report.t_star_estimate)
        self.assertIsNone(report.blowup_node_x)
        self.assertEqual(report.region, "omega")
        self.assertAlmostEqual(report.k_measured, 1.0)
        self.assertTrue(report.kk_satisfied)
        self.assertGreater(report.phi_max, 0)
        self.assertEqual(result.history.times[-1], result.state.t)
        data = BlowupReportSerializer(report).data
        self.assertEqual(data["stopped_cause"], "horizon")
        self.assertIsNone(data["t_star_estimate"])

    def test_peak_location_prefers_the_larger_gradient(self):
        config = default_config(initial={"epsilon": 0.05}, solver={"t_max": 0.5},
                                grid={"dx": 0.05, "speed_bound": 1.5})
        result = simulate(config)
        location = localize_blowup(result.state, result.region)
        self.assertIn(location.quantity, ("r_x", "s_x"))
        self.assertTrue(result.state.grid.contains(location.x))

    def test_phi_series_matches_the_followed_column(self):
        config = default_config(initial={"epsilon": 0.05}, solver={"t_max": 1.0},
                                grid={"dx": 0.05, "speed_bound": 1.5})
        result = simulate(config, keep_history=True)
        times, phi = phi_series(result.history, result.region, config.law())
        np.testing.assert_allclose(times, result.series.column("t"))
        np.testing.assert_allclose(phi, result.series.column("phi_region"))
        self.assertAlmostEqual(result.report.phi_max, float(np.max(phi)))

    def test_phi_series_vanishes_for_background_data(self):
        config = default_config(initial={"epsilon": 0.0}, solver={"t_max": 1.0},
                                grid={"dx": 0.05, "speed_bound": 1.5})
        result = simulate(config, keep_history=True)
        _, phi = phi_series(result.history, result.region, config.law())
        np.testing.assert_array_equal(phi, 0.0)
        self.assertIsNone(result.report.phi_max_ratio)

    def test_observers_follow_the_main_run(self):
        config = default_config(initial={"epsilon": 0.05}, solver={"t_max": 0.5},
                                grid={"dx": 0.05, "speed_bound": 1.5})
        times = []
        result = simulate(config, observers=(lambda state: times.append(state.t),))
        np.testing.assert_array_equal(times, result.series.column("t"))

    def test_budget_stop_is_reported_without_a_lifespan(self):
        config = default_config(initial={"epsilon": 0.05}, solver={"t_max": 1.0, "max_steps": 3},
                                grid={"dx": 0.05, "speed_bound": 1.5})
        report = simulate(config).report
        self.assertEqual(report.stopped_cause, "budget")
        self.assertEqual(report.steps, 3)
        self.assertIsNone(report.t_star_estimate)
        self.assertIsNone(report.gradient_rule)
        self.assertEqual(BlowupReportSerializer(report).data["stopped_cause"], "budget")

    @tag("acceptance")
    def test_simple_wave_lifespan_matches_the_oracle(self):
        config = default_config(initial={"epsilon": 0.1, "simple_wave": True},
                                solver={"t_max": 8.0, "cfl": 1.0},
                                grid={"dx": 0.001, "speed_bound": 1.1})
        result = simulate(config)
        report = result.report
        data = config.initial_data()
        expected = simple_wave_T_star(SimpleWaveOracle.from_initial(config.law(), data))
        self.assertAlmostEqual(expected, 6.66, delta=0.05)
        self.assertEqual(report.stopped_cause, "gradient")
        self.assertIsNone(report.fit_error)
        self.assertLess(abs(report.t_star_estimate - expected) / expected, 0.05)
        self.assertEqual(report.peak_quantity, "s_x")
        self.assertAlmostEqual(report.blowup_node_x, report.t_stop, delta=0.1)
        self.assertIsNotNone(report.inside_region)


class SweepTests(SimpleTestCase):
    def test_rows_are_deterministic_across_workers(self):
        config = default_config(solver={"t_max": 0.5}, grid={"dx": 0.05, "speed_bound": 1.5},
                                sweep={"epsilons": (0.05, 0.1, 0.2)})
        outcomes = []
        for workers in (1, 2):
            with self.assertRaises(InsufficientDataError) as ctx:
                run_sweep(config, workers=workers)
            outcomes.append(ctx.exception.rows)
        self.assertEqual(outcomes[0], outcomes[1])
        self.assertEqual([row.epsilon for row in outcomes[0]], [0.2, 0.1, 0.05])
        self.assertTrue(all(row.stopped_cause == "horizon" for row in outcomes[0]))


@tag("acceptance")
class UndampedLifespanTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = default_config("euler_undamped", initial={"epsilon": 0.1}, solver={"t_max": 20.0})
        cls.expected = simple_wave_T_star(SimpleWaveOracle.from_initial(cls.config.law(), cls.config.initial_data()))
        cls.report = simulate(cls.config).report

    def test_velocity_data_lifespan_matches_the_oracle(self):
        self.assertAlmostEqual(self.expected, 13.33, delta=0.05)
        self.assertEqual(self.report.stopped_cause, "gradient")
        self.assertIsNone(self.report.fit_error)
        self.assertIsNotNone(self.report.t_star_coarse)
        self.assertLess(abs(self.report.t_star_estimate - self.expected) / self.expected, 0.05)
        self.assertGreaterEqual(self.report.t_star_estimate, self.report.t_stop)

    def test_lifespan_is_grid_robust(self):
        finer = simulate(default_config("euler_undamped", initial={"epsilon": 0.1}, solver={"t_max": 20.0},
                                        grid={"dx": 0.001})).report
        change = abs(finer.t_star_estimate - self.report.t_star_estimate) / finer.t_star_estimate
        self.assertLess(change, 0.02)

    def test_single_grid_estimate_is_kept_when_disabled(self):
        config = default_config("euler_undamped", initial={"epsilon": 0.1},
                                solver={"t_max": 20.0, "richardson": False}, grid={"dx": 0.004})
        report = simulate(config).report
        self.assertIsNone(report.t_star_coarse)
        self.assertEqual(report.t_star_estimate, report.t_star_fine)
        self.assertGreater(report.t_star_estimate, self.expected)


@tag("acceptance")
class LocalizationTests(SimpleTestCase):
    def test_symmetric_data_blow_up_inside_the_outer_region(self):
        config = default_config("separated_sum", initial={"epsilon": 0.2}, solver={"t_max": 20.0},
                                grid={"dx": 0.005})
        report = simulate(config).report
        self.assertEqual(report.stopped_cause, "gradient")
        self.assertEqual(report.region, "omega")
        self.assertTrue(report.inside_region)

    def test_shifted_data_blow_up_right_of_the_plus_curve(self):
        config = default_config("separated_sum", initial={"epsilon": 0.2, "x0": 2.0}, solver={"t_max": 20.0},
                                grid={"dx": 0.005})
        result = simulate(config)
        report = result.report
        self.assertEqual(report.stopped_cause, "gradient")
        self.assertEqual(report.region, "omega_plus")
        self.assertTrue(report.inside_region)
        self.assertGreater(report.blowup_node_x, 2.0)


@tag("acceptance")
class PresetSweepTests(SimpleTestCase):
    def assertAllStopOnGradient(self, rows):
        self.assertEqual([row.stopped_cause for row in rows], ["gradient"] * len(rows))
        self.assertTrue(all(row.usable for row in rows))

    def test_separated_sum_lifespan_scales_like_one_over_epsilon(self):
        result = run_sweep(default_config("separated_sum"))
        self.assertAllStopOnGradient(result.rows)
        self.assertEqual(result.fit.model, "power")
        self.assertTrue(-1.2 <= result.fit.exponent_or_rate <= -0.8)
        self.assertGreaterEqual(result.fit.r_squared, 0.98)
        self.assertTrue(is_monotone_nonincreasing(result.rows))
        self.assertLess(phi_ratio_spread(result.rows), 2.0)
        for larger, smaller in zip(result.rows[:-1], result.rows[1:]):
            self.assertAlmostEqual(larger.phi_max / smaller.phi_max, 2.0, delta=0.4)

    def test_subcritical_time_decay_scales_like_epsilon_to_minus_two(self):
        result = run_sweep(default_config("time_critical_sub"))
        self.assertAllStopOnGradient(result.rows)
        self.assertTrue(-2.3 <= result.fit.exponent_or_rate <= -1.7)

    def test_critical_time_decay_is_exponential(self):
        result = run_sweep(default_config("time_critical_eq"))
        self.assertAllStopOnGradient(result.rows)
        self.assertEqual(result.fit.model, "exponential")
        self.assertGreaterEqual(result.fit.r_squared, 0.98)

    def test_slow_time_decay_reaches_the_horizon(self):
        result = simulate(default_config("time_global"))
        self.assertEqual(result.report.stopped_cause, "horizon")
        gradient = result.series.gradient
        self.assertLessEqual(float(np.max(gradient)), 2.0 * gradient[0])
