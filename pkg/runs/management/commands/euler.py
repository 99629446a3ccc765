import argparse

from django.core.management.base import BaseCommand, CommandError

from euler_lifespan.errors import ConfigError
from runs.config import load_config, parse_config
from runs.dispatch import SUBCOMMANDS, dispatch


EPILOG = """\
stop causes (report.json stopped_cause):
  gradient     a gradient monitor fired; gradient_rule names it
               (threshold: g >= solver.g_stop, growth: g/osc >= solver.growth_stop
               times its initial value, resolution: g >= solver.resolution_fraction * osc/dx)
  horizon      solver.t_max reached
  budget       solver.max_steps exhausted before t_max; exit 0 and no T*
  vacuum       u fell to the vacuum floor; exit 2
  instability  non-finite field; exit 2

exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 fit failure
"""


def _float_list(text):
    return tuple(float(item) for item in text.split(",") if item.strip())


def _int_list(text):
    return tuple(int(item) for item in text.split(",") if item.strip())


def _assignment(text):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ValueError(text)
    return key.strip(), value.strip()


class Command(BaseCommand):
    help = "Simulate damped p-system runs, trace characteristics, sweep epsilon and check damping assumptions."

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True)
        for name in SUBCOMMANDS:
            sub = subparsers.add_parser(name, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
            sub.add_argument("--config", help="Run configuration file ([section] key = value).")
            sub.add_argument("--scenario", help="Scenario preset, overrides the config file.")
            sub.add_argument("--out", help="Output directory (default: output.dir).")
            sub.add_argument("--set", dest="assignments", action="append", type=_assignment, default=[],
                             metavar="KEY=VALUE", help="Override one config key, e.g. grid.nx=4001.")
            if name == "trace":
                sub.add_argument("--x0", type=float)
                sub.add_argument("--sign", choices=["+", "-"], default="+")
                sub.add_argument("--mode", choices=["differential", "volterra"], default="differential")
                sub.add_argument("--form", choices=["derived", "printed"], default="derived")
            elif name == "sweep":
                sub.add_argument("--epsilons", type=_float_list)
                sub.add_argument("--workers", type=int)
            elif name == "oracle-compare":
                sub.add_argument("--t-compare", dest="t_compare", type=float, default=0.5)
                sub.add_argument("--grids", type=_int_list)

    def handle(self, *args, **options):
        subcommand = options.pop("subcommand")
        overrides = dict(options.pop("assignments") or [])
        if options.get("scenario"):
            overrides["scenario"] = options["scenario"]
        try:
            if options.get("config"):
                config = load_config(options["config"], overrides)
            else:
                config = parse_config("", overrides)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code)

        extra = {key: options.get(key) for key in ("x0", "sign", "mode", "form", "epsilons", "workers",
                                                   "t_compare", "grids")}
        result = dispatch(subcommand, config, out_dir=options.get("out"), **extra)
        if result.exit_code:
            raise CommandError(str(result.error) if result.error else f"{subcommand} finished with "
                               f"exit code {result.exit_code}", returncode=result.exit_code)
        self.stdout.write(self.style.SUCCESS(f"{subcommand}: wrote {', '.join(result.artifacts)}"))
