"""
Run configuration: flat ``[section]`` / ``key = value`` text, parsed with line
numbers, merged over the scenario preset and validated by RunConfigSerializer.
"""
import dataclasses
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from damping.coefficients import DampingSpec
from damping.serializers import DampingSerializer
from euler_lifespan.errors import ConfigError
from gas.thermo import GasLaw
from solver.fields import InitialData
from solver.grid import Grid1D
from solver.profiles import Profile
from .presets import DEFAULT_SCENARIO, get_preset
from .serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

SECTIONS = ("gas", "initial", "damping", "grid", "solver", "sweep", "output")
BARE_KEYS = {"gamma": "gas", "epsilon": "initial"}
_SECTION_RE = re.compile(r"^\[\s*([A-Za-z_]\w*)\s*\]$")


@dataclass(frozen=True)
class GasSection:
    gamma: float = 2.0


@dataclass(frozen=True)
class InitialSection:
    phi: str = "zero"
    psi: str = "gauss_slope"
    width: float = 1.0
    epsilon: float = 0.1
    x0: float = 0.0
    k_report: float = 1.0
    delta0: float = 0.1
    simple_wave: bool = False


@dataclass(frozen=True)
class GridSection:
    x_min: float
    x_max: float
    nx: int
    dx: float = 0.01
    speed_bound: float = 4.0


@dataclass(frozen=True)
class SolverSection:
    cfl: float = 0.9
    g_stop: float = 1e4
    resolution_fraction: float = 0.25
    growth_stop: float = 12.0
    u_floor: float = 1e-6
    t_max: float = 50.0
    max_steps: int = 1_000_000
    history_stride: int = 1
    richardson: bool = True


@dataclass(frozen=True)
class SweepSection:
    epsilons: tuple = (0.2, 0.1, 0.05, 0.025)


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    precision: int = 12


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    gas: GasSection
    initial: InitialSection
    damping: DampingSpec
    grid: GridSection
    solver: SolverSection
    sweep: SweepSection
    output: OutputSection

    @classmethod
    def from_validated(cls, data):
        return cls(
            scenario=data["scenario"],
            gas=GasSection(**data["gas"]),
            initial=InitialSection(**data["initial"]),
            damping=DampingSerializer().to_spec(data["damping"]),
            grid=GridSection(**data["grid"]),
            solver=SolverSection(**data["solver"]),
            sweep=SweepSection(epsilons=tuple(data["sweep"]["epsilons"])),
            output=OutputSection(**data["output"]),
        )

    def law(self) -> GasLaw:
        return GasLaw(self.gas.gamma, self.solver.u_floor)

    def grid_1d(self) -> Grid1D:
        return Grid1D(self.grid.x_min, self.grid.x_max, self.grid.nx)

    def initial_data(self) -> InitialData:
        init = self.initial
        common = {"center": init.x0, "width": init.width}
        return InitialData(phi=Profile(init.phi, **common), psi=Profile(init.psi, **common),
                           epsilon=init.epsilon, x0=init.x0, delta0=init.delta0,
                           k_report=init.k_report, simple_wave=init.simple_wave)

    def with_epsilon(self, epsilon) -> "RunConfig":
        return dataclasses.replace(self, initial=dataclasses.replace(self.initial, epsilon=float(epsilon)))


def _resolve_key(key, section, lineno):
    if "." in key:
        head, name = key.split(".", 1)
        if head not in SECTIONS:
            raise ConfigError(f"unknown section {head!r} in key {key!r}", line=lineno)
        return head, name
    if key == "scenario":
        return None, key
    if section is not None:
        return section, key
    if key in BARE_KEYS:
        return BARE_KEYS[key], key
    raise ConfigError(f"key {key!r} outside any section", line=lineno)


def parse_text(text):
    """
    Split the text into ``{"scenario": ..., section: {key: raw}}`` and a map
    from dotted key to the line it was set on.
    """
    raw = {"scenario": None, **{section: {} for section in SECTIONS}}
    lines = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        header = _SECTION_RE.match(stripped)
        if header:
            section = header.group(1)
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        key, sep, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError("expected 'key = value'", line=lineno)
        target, name = _resolve_key(key, section, lineno)
        path = f"{target}.{name}" if target else name
        if path in lines:
            raise ConfigError(f"{path} already set on line {lines[path]}", line=lineno)
        lines[path] = lineno
        if target is None:
            raw["scenario"] = value
        else:
            raw[target][name] = value
    return raw, lines


def flatten_errors(detail, prefix=""):
    """DRF error detail -> list of (dotted key, message)."""
    flat = []
    if isinstance(detail, dict):
        for key, value in detail.items():
            path = prefix if key == "non_field_errors" else (f"{prefix}.{key}" if prefix else str(key))
            flat.extend(flatten_errors(value, path))
    elif isinstance(detail, (list, tuple)):
        for item in detail:
            flat.extend(flatten_errors(item, prefix))
    else:
        flat.append((prefix, str(detail)))
    return flat


def parse_config(text, overrides=None) -> RunConfig:
    """
    Validated RunConfig from configuration text. ``overrides`` maps dotted keys
    (or ``scenario``) to raw values and replaces whatever the text sets.
    """
    raw, lines = parse_text(text)
    for key, value in (overrides or {}).items():
        target, name = _resolve_key(key, None, None)
        if target is None:
            raw["scenario"] = str(value)
        else:
            raw[target][name] = value
        lines.pop(f"{target}.{name}" if target else name, None)
    scenario = raw["scenario"] or DEFAULT_SCENARIO
    preset = get_preset(scenario, line=lines.get("scenario"))

    fields = RunConfigSerializer().fields
    data = {"scenario": scenario}
    for section in SECTIONS:
        known = fields[section].fields
        for name in raw[section]:
            if name not in known:
                raise ConfigError("unknown key", key=f"{section}.{name}", line=lines.get(f"{section}.{name}"))
        merged = dict(preset.defaults().get(section, {}))
        merged.update(raw[section])
        data[section] = merged

    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        errors = flatten_errors(serializer.errors)
        key, message = errors[0]
        if len(errors) > 1:
            logger.debug("further config errors: %s", errors[1:])
        raise ConfigError(message, key=key, line=lines.get(key))
    return RunConfig.from_validated(serializer.validated_data)


def load_config(path, overrides=None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, overrides)


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_format(float(v)) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def emit_config(config: RunConfig) -> str:
    """Text that parses back to ``config``."""
    out = [f"scenario = {config.scenario}"]
    for section in SECTIONS:
        out.append("")
        out.append(f"[{section}]")
        values = getattr(config, section)
        for f in dataclasses.fields(values):
            out.append(f"{f.name} = {_format(getattr(values, f.name))}")
    return "\n".join(out) + "\n"


def default_config(scenario: Optional[str] = None, **sections) -> RunConfig:
    """
    Build a validated config from keyword sections, for instance
    ``default_config("separated_sum", initial={"epsilon": 0.05})``.
    """
    lines = [f"scenario = {scenario or DEFAULT_SCENARIO}"]
    for section, values in sections.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {_format(value)}" for key, value in values.items())
    return parse_config("\n".join(lines))
