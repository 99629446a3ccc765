import math

import numpy as np
from django.test import SimpleTestCase, tag

from damping.coefficients import DampingSpec
from euler_lifespan.errors import DomainError, PoleError
from gas.thermo import GasLaw
from solver.fields import InitialData
from solver.grid import Grid1D
from solver.profiles import Profile
from .conservative import compare_solvers, lax_friedrichs_run
from .simple_wave import SimpleWaveOracle, riccati_closed_form, simple_wave_T_star

LAW = GasLaw(2)
ZERO = DampingSpec()


def gauss_slope_data(epsilon, **kwargs):
    return InitialData(phi=Profile("zero"), psi=Profile("gauss_slope"), epsilon=epsilon, **kwargs)


class ClosedFormTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(riccati_closed_form(1.0, 1.0, 0.5), 2.0)
        self.assertEqual(riccati_closed_form(-1.0, 1.0, 1.0), -0.5)
        self.assertEqual(riccati_closed_form(0.0, 3.0, 10.0), 0.0)

    def test_pole(self):
        with self.assertRaises(PoleError):
            riccati_closed_form(1.0, 1.0, 1.0)


class SimpleWaveTests(SimpleTestCase):
    def test_flat_or_expanding_profiles_never_break(self):
        flat = SimpleWaveOracle(LAW, s0=np.zeros_like, s0_prime=np.zeros_like, window=(-1.0, 1.0))
        self.assertEqual(simple_wave_T_star(flat), math.inf)
        expanding = SimpleWaveOracle(LAW, s0=lambda x: 0.1 * np.asarray(x),
                                     s0_prime=lambda x: np.full_like(np.asarray(x, dtype=float), 0.1),
                                     window=(-1.0, 1.0))
        self.assertEqual(simple_wave_T_star(expanding), math.inf)

    def test_single_family_data(self):
        oracle = SimpleWaveOracle.from_initial(LAW, gauss_slope_data(0.1, simple_wave=True))
        self.assertAlmostEqual(simple_wave_T_star(oracle), 6.66, delta=0.02)
        self.assertEqual(simple_wave_T_star(oracle, families="r"), math.inf)

    def test_both_families_steepen_for_velocity_data(self):
        oracle = SimpleWaveOracle.from_initial(LAW, gauss_slope_data(0.1))
        self.assertEqual(oracle.families(), ("s", "r"))
        self.assertAlmostEqual(simple_wave_T_star(oracle, families="s"), 13.3, delta=0.05)
        self.assertAlmostEqual(simple_wave_T_star(oracle, families="r"), 13.3, delta=0.05)
        self.assertAlmostEqual(simple_wave_T_star(oracle), 13.3, delta=0.05)

    def test_lifespan_scales_inversely_with_amplitude(self):
        t_small = simple_wave_T_star(SimpleWaveOracle.from_initial(LAW, gauss_slope_data(0.05, simple_wave=True)))
        t_large = simple_wave_T_star(SimpleWaveOracle.from_initial(LAW, gauss_slope_data(0.1, simple_wave=True)))
        self.assertAlmostEqual(t_small / t_large, 2.0, delta=0.02)

    def test_sampling_density_does_not_move_the_estimate(self):
        oracle = SimpleWaveOracle.from_initial(LAW, gauss_slope_data(0.1, simple_wave=True))
        self.assertAlmostEqual(simple_wave_T_star(oracle, samples_per_width=512),
                               simple_wave_T_star(oracle, samples_per_width=8192), places=6)

    def test_damped_data_are_rejected(self):
        with self.assertRaises(DomainError):
            SimpleWaveOracle.from_initial(LAW, gauss_slope_data(0.1), DampingSpec("separated_sum", 1.0, 2, 2))


class ConservativeSolverTests(SimpleTestCase):
    def test_background_is_steady(self):
        grid = Grid1D(-5, 5, 201)
        state = lax_friedrichs_run(grid, LAW, ZERO, gauss_slope_data(0.0), 1.0)
        self.assertAlmostEqual(state.t, 1.0)
        np.testing.assert_array_equal(state.u, 1.0)
        np.testing.assert_array_equal(state.v, 0.0)

    def test_mass_and_momentum_are_conserved_without_damping(self):
        grid = Grid1D(-8, 8, 801)
        data = InitialData(phi=Profile("bump"), psi=Profile("bump_slope"), epsilon=0.1)
        u0, v0 = data.state_variables(LAW, grid.x)
        state = lax_friedrichs_run(grid, LAW, ZERO, data, 2.0)
        self.assertAlmostEqual(float(np.sum(state.u)), float(np.sum(u0)), places=8)
        self.assertAlmostEqual(float(np.sum(state.v)), float(np.sum(v0)), places=8)

    def test_damping_drains_momentum(self):
        grid = Grid1D(-8, 8, 801)
        data = InitialData(phi=Profile("zero"), psi=Profile("gaussian"), epsilon=0.1)
        strong = DampingSpec("time_power", mu=5.0, lambda1=0.0)
        undamped = lax_friedrichs_run(grid, LAW, ZERO, data, 1.0)
        damped = lax_friedrichs_run(grid, LAW, strong, data, 1.0)
        self.assertLess(np.max(np.abs(damped.v)), 0.5 * np.max(np.abs(undamped.v)))

    def test_rejects_nonpositive_horizon(self):
        with self.assertRaises(DomainError):
            lax_friedrichs_run(Grid1D(-1, 1, 21), LAW, ZERO, gauss_slope_data(0.1), 0.0)

    def test_solvers_agree_on_the_background(self):
        self.assertEqual(compare_solvers(Grid1D(-5, 5, 101), LAW, ZERO, gauss_slope_data(0.0), 1.0), (0.0, 0.0))

    def test_solvers_converge_together_under_refinement(self):
        data = gauss_slope_data(0.1)
        spec = DampingSpec("separated_sum", lambda1=2, lambda2=2)
        diffs = [compare_solvers(Grid1D(-8, 8, nx), LAW, spec, data, 1.0)[1] for nx in (801, 1601, 3201)]
        self.assertGreater(diffs[0], diffs[1])
        self.assertGreater(diffs[1], diffs[2])
        self.assertLess(diffs[2], 5e-3)

    @tag("acceptance")
    def test_difference_halves_with_the_grid_spacing(self):
        data = gauss_slope_data(0.1)
        for spec in (ZERO, DampingSpec("separated_sum", lambda1=2, lambda2=2)):
            diffs = [compare_solvers(Grid1D(-8, 8, nx), LAW, spec, data, 0.5)[1] for nx in (2001, 4001, 8001)]
            for coarse, fine in zip(diffs[:-1], diffs[1:]):
                self.assertAlmostEqual(coarse / fine, 2.0, delta=0.5)

    def test_constant_damping_drives_small_velocity_to_rest(self):
        grid = Grid1D(-70, 70, 2801)
        state = lax_friedrichs_run(grid, LAW, DampingSpec("time_power", mu=1.0, lambda1=0.0),
                                   gauss_slope_data(0.01), 50.0)
        self.assertLess(float(np.max(np.abs(state.v))), 0.001)
