"""Discretized Brownian cash-balance paths.

The cash balance starts at zero and has unit volatility, so a path is a
standard Brownian motion sampled on a uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from excursion_credit import _rng

#: Largest number of grid points a single grid may hold.
MAX_GRID_POINTS = 200_000_000


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``0, step, 2 step, ..., horizon``.

    Attributes
    ----------
    horizon : float
        Last grid time, equal to ``step * (count - 1)``.
    step : float
        Grid spacing in years.
    count : int
        Number of grid points, at least 2.
    """

    horizon: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.count < 2:
            raise ValueError(f"a grid needs at least 2 points, got {self.count}")

    @property
    def n_steps(self) -> int:
        return self.count - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.count) * self.step


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """A sampled path on ``grid``; ``values[k]`` is the level at ``grid.times[k]``."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)
    seed: int = 0

    def __post_init__(self):
        if self.values.shape != (self.grid.count,):
            raise ValueError(
                f"expected {self.grid.count} values, got shape {self.values.shape}"
            )

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def make_grid(horizon: float, step: float) -> TimeGrid:
    """Build a uniform grid covering ``[0, horizon]``.

    A horizon that is not a whole number of steps is rounded *up* to the next
    multiple of ``step``, so the final date is never truncated. Ratios within
    ``1e-9`` of an integer are treated as exact.
    """
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ValueError(f"horizon must be positive and finite, got {horizon}")
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"step must be positive and finite, got {step}")
    ratio = horizon / step
    n_steps = round(ratio)
    if abs(ratio - n_steps) > 1e-9 * max(1.0, ratio):
        n_steps = math.ceil(ratio)
    n_steps = max(n_steps, 1)
    if n_steps + 1 > MAX_GRID_POINTS:
        raise ValueError(
            f"grid of {n_steps + 1} points exceeds the limit of {MAX_GRID_POINTS}"
        )
    return TimeGrid(horizon=n_steps * step, step=step, count=n_steps + 1)


@njit(cache=True)
def _fill_path(key, sqrt_step, out):
    # out[0] is the starting level; out[1:] is filled in place
    n = out.shape[0] - 1
    z = np.empty(n)
    _rng.fill_normals(key, 0, z)
    x = out[0]
    for k in range(n):
        x = x + sqrt_step * z[k]
        out[k + 1] = x


def simulate_path(grid: TimeGrid, seed: int) -> BrownianPath:
    """Sample a path on ``grid`` from the stream keyed by ``seed``.

    The result is a pure function of ``(grid, seed)``.
    """
    values = np.zeros(grid.count)
    _fill_path(_rng.normal_key(seed), math.sqrt(grid.step), values)
    return BrownianPath(grid=grid, values=values, seed=seed)


def bridge_zero_crossing_probability(x_left: float, x_right: float, step: float) -> float:
    """Probability that a Brownian bridge between two grid values touches zero.

    Returns 1 when the endpoints do not share a strict sign, otherwise
    ``exp(-2 x_left x_right / step)``.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    prod = x_left * x_right
    if prod <= 0:
        return 1.0
    return math.exp(-2.0 * prod / step)
