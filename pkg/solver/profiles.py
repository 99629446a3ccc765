"""
Named C^1 initial profiles for phi and psi, each with analytic derivative.

Profiles are functions of z = (x - center) / width scaled by ``amplitude``.
"""
import enum
from dataclasses import dataclass

import numpy as np


class ProfileName(str, enum.Enum):
    ZERO = "zero"
    GAUSSIAN = "gaussian"
    GAUSS_SLOPE = "gauss_slope"
    BUMP = "bump"
    BUMP_SLOPE = "bump_slope"


@dataclass(frozen=True)
class Profile:
    name: ProfileName = ProfileName.ZERO
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "name", ProfileName(self.name))
        if not self.width > 0:
            raise ValueError("profile width must be positive")

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.width

    def __call__(self, x):
        z = self._z(x)
        name = self.name
        if name is ProfileName.ZERO:
            out = np.zeros_like(z)
        elif name is ProfileName.GAUSSIAN:
            out = np.exp(-z * z)
        elif name is ProfileName.GAUSS_SLOPE:
            out = -z * np.exp(-z * z)
        elif name is ProfileName.BUMP:
            out = np.where(np.abs(z) < 1, (1 - z * z) ** 2, 0.0)
        else:
            out = np.where(np.abs(z) < 1, -z * (1 - z * z) ** 2, 0.0)
        return self.amplitude * out

    def derivative(self, x):
        z = self._z(x)
        name = self.name
        if name is ProfileName.ZERO:
            out = np.zeros_like(z)
        elif name is ProfileName.GAUSSIAN:
            out = -2 * z * np.exp(-z * z)
        elif name is ProfileName.GAUSS_SLOPE:
            out = -(1 - 2 * z * z) * np.exp(-z * z)
        elif name is ProfileName.BUMP:
            out = np.where(np.abs(z) < 1, -4 * z * (1 - z * z), 0.0)
        else:
            out = np.where(np.abs(z) < 1, -(1 - z * z) * (1 - 5 * z * z), 0.0)
        return self.amplitude * out / self.width

    @property
    def support_radius(self):
        """Half-width outside which the profile is zero (or below 1e-7 for gaussians)."""
        if self.name is ProfileName.ZERO:
            return 0.0
        if self.name in (ProfileName.BUMP, ProfileName.BUMP_SLOPE):
            return self.width
        return 4.0 * self.width
