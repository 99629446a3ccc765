"""
Scenario presets: the damping family behind each regime together with the
scaling behaviour a sweep is expected to show. A preset only supplies
defaults; any key set in the run configuration wins.
"""
from dataclasses import dataclass, field
from typing import Optional

from euler_lifespan.errors import ConfigError


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    damping: dict
    expected_model: str
    exponent_window: Optional[tuple] = None
    overrides: dict = field(default_factory=dict)
    description: str = ""

    def defaults(self):
        """Section defaults contributed by the preset."""
        sections = {section: dict(values) for section, values in self.overrides.items()}
        sections.setdefault("damping", {}).update(self.damping)
        return sections


PRESETS = {
    preset.name: preset
    for preset in (
        ScenarioPreset(
            "euler_undamped", {"family": "zero"}, "power", (-1.15, -0.85),
            {"solver": {"t_max": 80.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25, "dx": 0.002}},
            "no damping: T* of order 1/eps",
        ),
        ScenarioPreset(
            "time_power_supercrit", {"family": "time_power", "mu": 1.0, "lambda1": 2.0}, "power", (-1.2, -0.8),
            {"solver": {"t_max": 250.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25, "dx": 0.004}},
            "integrable time decay: damping too weak to prevent blow-up",
        ),
        ScenarioPreset(
            "time_critical_sub", {"family": "time_power", "mu": 1.0, "lambda1": 1.0}, "power", (-2.3, -1.7),
            {"solver": {"t_max": 1000.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25}},
            "critical decay with mu < 2: T* of order eps^(-2/(2-mu))",
        ),
        ScenarioPreset(
            "time_critical_eq", {"family": "time_power", "mu": 2.0, "lambda1": 1.0}, "exponential", None,
            {"solver": {"t_max": 1000.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25},
             "sweep": {"epsilons": (0.5, 0.4, 0.3)}},
            "critical decay with mu = 2: T* of order exp(C/eps)",
        ),
        ScenarioPreset(
            "time_global", {"family": "time_power", "mu": 1.0, "lambda1": 0.5}, "horizon", None,
            {"solver": {"t_max": 200.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25}, "initial": {"epsilon": 0.05}},
            "slow decay: global smooth solutions, runs reach the horizon",
        ),
        ScenarioPreset(
            "separated_sum", {"family": "separated_sum", "lambda1": 2.0, "lambda2": 2.0}, "power", (-1.2, -0.8),
            {"solver": {"t_max": 250.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25, "dx": 0.004}},
            "(1+t)^-2 + (1+|x|)^-2: T* <= C/eps",
        ),
        ScenarioPreset(
            "separated_product", {"family": "separated_product", "lambda1": 0.6, "lambda2": 0.6}, "power", None,
            {"solver": {"t_max": 250.0, "cfl": 1.0}, "grid": {"speed_bound": 1.25, "dx": 0.004}},
            "(1+t)^-0.6 (1+|x|)^-0.6: T* <= C/eps, no lower estimate",
        ),
    )
}

DEFAULT_SCENARIO = "euler_undamped"


def get_preset(name, line=None) -> ScenarioPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose one of {', '.join(PRESETS)}",
                          key="scenario", line=line) from None
