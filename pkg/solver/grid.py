from dataclasses import dataclass
from functools import cached_property

import numpy as np

from euler_lifespan.errors import DomainError


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    nx: int

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 3:
            raise DomainError("nx must be an integer >= 3", nx=self.nx)
        if not self.x_min < self.x_max:
            raise DomainError("x_min must be smaller than x_max", x_min=self.x_min, x_max=self.x_max)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @cached_property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    def contains(self, x):
        return self.x_min <= x <= self.x_max

    def coarsened(self, factor=2):
        """Same interval, every ``factor``-th node."""
        if (self.nx - 1) % factor:
            raise DomainError("grid cannot be coarsened by this factor", nx=self.nx, factor=factor)
        return Grid1D(self.x_min, self.x_max, (self.nx - 1) // factor + 1)

    def cell_index(self, x):
        """Index i with x_i <= x <= x_{i+1}, clamped to the interior cells."""
        i = np.floor((np.asarray(x, dtype=float) - self.x_min) / self.dx).astype(int)
        return np.clip(i, 0, self.nx - 2)
