import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from euler_lifespan.errors import ConfigError
from .config import default_config, emit_config, load_config, parse_config
from .dispatch import dispatch
from .management.commands.euler import Command as EulerCommand
from .presets import PRESETS
from .reports import emit_report, render_json, sweep_frame

CHEAP = {"solver": {"t_max": 0.5}, "grid": {"dx": 0.05, "speed_bound": 1.5}}


class ParseConfigTests(SimpleTestCase):
    def test_empty_text_gives_the_default_scenario(self):
        config = parse_config("")
        self.assertEqual(config.scenario, "euler_undamped")
        self.assertEqual(config.gas.gamma, 2.0)
        self.assertEqual(config.initial.epsilon, 0.1)
        self.assertEqual(config.damping.family.value, "zero")
        self.assertEqual(config.grid.x_max, 124.0)
        self.assertEqual(config.grid.x_min, -124.0)
        self.assertEqual(config.grid_1d().x[-1], 124.0)

    def test_sections_and_bare_keys(self):
        config = parse_config("gamma = 1.4\nepsilon = 0.05  # bare keys\n\n[damping]\nfamily = time_power\n"
                              "mu = 1.5\nlambda1 = 1\n")
        self.assertEqual(config.gas.gamma, 1.4)
        self.assertEqual(config.initial.epsilon, 0.05)
        self.assertEqual(config.damping.family.value, "time_power")
        self.assertEqual(config.damping.mu, 1.5)

    def test_gamma_must_exceed_one(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("[gas]\ngamma = 0.9\n")
        error = ctx.exception
        self.assertEqual(error.key, "gas.gamma")
        self.assertEqual(error.line, 2)
        self.assertEqual(str(error), "line 2: gas.gamma: gamma must exceed 1")
        self.assertEqual(error.exit_code, 1)

    def test_grid_needs_three_nodes(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("\n[grid]\nnx = 2\n")
        self.assertEqual(ctx.exception.key, "grid.nx")
        self.assertEqual(ctx.exception.line, 3)

    def test_domain_must_hold_the_light_cone(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("[solver]\nt_max = 10\n[grid]\nx_max = 10\n")
        self.assertEqual(ctx.exception.key, "grid.x_max")
        self.assertEqual(ctx.exception.line, 4)

    def test_initial_data_must_stay_away_from_vacuum(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("[initial]\nphi = gauss_slope\nepsilon = 2.2\n")
        self.assertEqual(ctx.exception.key, "initial.epsilon")

    def test_malformed_text_is_reported_with_its_line(self):
        cases = {
            "[bogus]\n": 1,
            "[gas]\ngamma 2\n": 2,
            "[solver]\ncfl = 0.5\ncfl = 0.6\n": 3,
            "mu = 1\n": 1,
            "scenario = nope\n": 1,
            "[solver]\n\nfoo = 1\n": 3,
            "[solver]\ncfl = 1.5\n": 2,
        }
        for text, line in cases.items():
            with self.subTest(text=text):
                with self.assertRaises(ConfigError) as ctx:
                    parse_config(text)
                self.assertEqual(ctx.exception.line, line)

    def test_unknown_key_names_its_section(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("[solver]\nfoo = 1\n")
        self.assertEqual(ctx.exception.key, "solver.foo")

    def test_overrides_replace_the_text(self):
        config = parse_config("[initial]\nepsilon = 0.3\n", {"initial.epsilon": "0.05", "scenario": "separated_sum"})
        self.assertEqual(config.initial.epsilon, 0.05)
        self.assertEqual(config.scenario, "separated_sum")
        self.assertEqual(config.damping.family.value, "separated_sum")
        with self.assertRaises(ConfigError) as ctx:
            parse_config("[gas]\ngamma = 2\n", {"gas.gamma": "0.5"})
        self.assertIsNone(ctx.exception.line)

    def test_explicit_keys_beat_the_preset(self):
        config = parse_config("scenario = time_critical_eq\n[damping]\nmu = 1.0\n")
        self.assertEqual(config.damping.mu, 1.0)
        self.assertEqual(config.damping.lambda1, 1.0)
        self.assertEqual(config.sweep.epsilons, (0.5, 0.4, 0.3))

    def test_every_preset_round_trips(self):
        for name in PRESETS:
            with self.subTest(scenario=name):
                config = parse_config(f"scenario = {name}\n")
                self.assertEqual(parse_config(emit_config(config)), config)

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_config(Path(tmp) / "absent.cfg")
            path = Path(tmp) / "run.cfg"
            path.write_text("scenario = separated_sum\n[initial]\nepsilon = 0.2\n")
            self.assertEqual(load_config(path).initial.epsilon, 0.2)


class ReportTests(SimpleTestCase):
    def test_precision_applies_to_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            emit_report(tmp, {"a.csv": pd.DataFrame({"x": [1.0 / 3.0]})}, precision=4)
            self.assertEqual((Path(tmp) / "a.csv").read_text(), "x\n0.3333\n")

    def test_empty_sweep_writes_the_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            emit_report(tmp, {"sweep.csv": sweep_frame([])})
            self.assertEqual((Path(tmp) / "sweep.csv").read_text(), "epsilon,t_stop,t_star,stopped_cause\n")

    def test_non_finite_values_become_null(self):
        payload = {"a": float("inf"), "b": [1.0, float("nan")], "c": "text"}
        rendered = render_json(payload)
        self.assertTrue(rendered.endswith(b"\n"))
        self.assertEqual(json.loads(rendered), {"a": None, "b": [1.0, None], "c": "text"})

    def test_reports_are_byte_identical_across_runs(self):
        config = default_config(initial={"epsilon": 0.05}, **CHEAP)
        outputs = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                dispatch("simulate", config, out_dir=tmp)
                outputs.append({name: (Path(tmp) / name).read_bytes() for name in ("timeseries.csv", "report.json")})
        self.assertEqual(outputs[0], outputs[1])


class DispatchTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_simulate(self):
        result = dispatch("simulate", default_config(initial={"epsilon": 0.05}, **CHEAP), out_dir=self.out)
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.artifacts, ["report.json", "timeseries.csv"])
        report = json.loads((self.out / "report.json").read_text())
        self.assertEqual(report["stopped_cause"], "horizon")
        self.assertIsNone(report["gradient_rule"])
        self.assertIsNone(report["t_star_coarse"])
        header = (self.out / "timeseries.csv").read_text().splitlines()[0]
        self.assertTrue(header.startswith("t,"))

    def test_trace(self):
        config = default_config(initial={"epsilon": 0.05}, **CHEAP)
        result = dispatch("trace", config, out_dir=self.out, sign="-", x0=0.5, mode="volterra")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.artifacts, ["path.csv", "report.json", "trace.json"])
        summary = json.loads((self.out / "trace.json").read_text())
        self.assertEqual(summary["sign"], "-")
        self.assertEqual(summary["mode"], "volterra")
        self.assertFalse(summary["blowup"])
        self.assertFalse(summary["exited"])
        report = json.loads((self.out / "report.json").read_text())
        self.assertEqual(summary["samples"], report["steps"] + 1)
        self.assertIn("mode_gap", summary)
        path = pd.read_csv(self.out / "path.csv")
        self.assertEqual(list(path.columns), ["t", "x", "u", "c", "r", "s", "a", "A", "Q_or_Y"])
        self.assertAlmostEqual(path["x"].iloc[0], 0.5)

    def test_trace_keeps_no_field_history(self):
        config = default_config(initial={"epsilon": 0.05}, **CHEAP)
        with mock.patch("lifespan.blowup.FieldHistory") as history:
            result = dispatch("trace", config, out_dir=self.out, sign="+", x0=0.0)
        self.assertEqual(result.exit_code, 0)
        history.assert_not_called()

    def test_check_damping(self):
        result = dispatch("check-damping", parse_config("scenario = separated_sum\n"), out_dir=self.out)
        self.assertEqual(result.exit_code, 0)
        payload = json.loads((self.out / "damping.json").read_text())
        self.assertEqual(payload["scenario"], "separated_sum")
        self.assertAlmostEqual(payload["c_a"], 3.0, places=6)
        self.assertEqual(payload["violations"], [])

    def test_sweep_without_enough_blowups_exits_three(self):
        config = default_config(**CHEAP, sweep={"epsilons": (0.1, 0.05, 0.025)})
        result = dispatch("sweep", config, out_dir=self.out, workers=1)
        self.assertEqual(result.exit_code, 3)
        self.assertEqual(result.artifacts, ["sweep.csv"])
        rows = pd.read_csv(self.out / "sweep.csv")
        self.assertEqual(list(rows["epsilon"]), [0.1, 0.05, 0.025])
        self.assertTrue((rows["stopped_cause"] == "horizon").all())

    def test_oracle_compare(self):
        config = default_config(initial={"epsilon": 0.05})
        result = dispatch("oracle-compare", config, out_dir=self.out, t_compare=0.2, grids=(201, 401))
        self.assertEqual(result.exit_code, 0)
        payload = json.loads((self.out / "oracle_compare.json").read_text())
        self.assertEqual(payload["grids"], [201, 401])
        self.assertEqual(len(payload["linf_v"]), 2)


class EulerCommandTests(SimpleTestCase):
    def test_config_errors_exit_with_one(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                call_command("euler", "simulate", "--set", "gas.gamma=0.9", "--out", tmp)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("gamma must exceed 1", str(ctx.exception))

    def test_check_damping_command(self):
        out = StringIO()
        with tempfile.TemporaryDirectory() as tmp:
            call_command("euler", "check-damping", "--scenario", "separated_sum", "--out", tmp, stdout=out)
            self.assertTrue((Path(tmp) / "damping.json").exists())
        self.assertIn("damping.json", out.getvalue())

    def test_failed_runs_carry_their_exit_code(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                call_command("euler", "sweep", "--set", "solver.t_max=0.5", "--set", "grid.dx=0.05",
                             "--set", "grid.speed_bound=1.5", "--epsilons", "0.1,0.05", "--workers", "1",
                             "--out", tmp)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_help_lists_stop_causes_and_exit_codes(self):
        parser = EulerCommand().create_parser("manage.py", "euler")
        subparsers = next(action for action in parser._actions if action.dest == "subcommand")
        text = subparsers.choices["simulate"].format_help()
        for cause in ("gradient", "horizon", "budget", "vacuum", "instability"):
            self.assertIn(cause, text)
        self.assertIn("exit 0 and no T*", text)
