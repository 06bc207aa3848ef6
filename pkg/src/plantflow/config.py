"""Numerical settings shared by the solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and search densities.

    ``tol_x`` is an absolute potential tolerance (MPa); ``tol_f`` is a flow
    tolerance relative to the flow being matched.  ``grid_points`` sets the
    density of residual scans and of the brute-force oracle.
    ``stationary_rtol`` decides when a segment counts as running at its
    capacity.
    """

    tol_x: float = 1e-10
    tol_f: float = 1e-12
    grid_points: int = 1000
    max_iter: int = 200
    flow_floor: float = 1e-9
    stationary_rtol: float = 1e-8

    def __post_init__(self):
        for name in ("tol_x", "tol_f", "flow_floor", "stationary_rtol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        if not self.flow_floor < 1.0:
            raise ConfigError(f"flow_floor must be < 1, got {self.flow_floor!r}")
        if int(self.grid_points) != self.grid_points or self.grid_points < 10:
            raise ConfigError(f"grid_points must be an integer >= 10, got {self.grid_points!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter!r}")


DEFAULT_CONFIG = SolverConfig()
