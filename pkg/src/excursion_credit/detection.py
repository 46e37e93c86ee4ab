"""Zero set, distress time and default time of a cash-balance path.

Zeros between grid points are placed by linear interpolation. With
``bridge_correction`` enabled, a step whose endpoints share a sign is also
given an interior zero (at its midpoint) with the Brownian-bridge probability
``exp(-2 x_left x_right / step)``, drawn from the path's own bridge stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit

from excursion_credit import _kernels, _rng
from excursion_credit.paths import BrownianPath


def distress_trigger(alpha: float) -> float:
    """Excursion age ``alpha**2 / 2`` at which distress starts."""
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    return 0.5 * alpha * alpha


@dataclass(frozen=True, eq=False)
class ZeroTrace:
    """Per-grid-point sign and last zero of a path.

    ``sign`` is +1 where the level is strictly positive and -1 otherwise.
    """

    times: np.ndarray
    sign: np.ndarray
    last_zero: np.ndarray

    @property
    def age(self) -> np.ndarray:
        return self.times - self.last_zero


@dataclass(frozen=True)
class DefaultOutcome:
    """Distress and default times of one path; ``None`` means censored at ``horizon``."""

    tau_alpha: Optional[float]
    level_at_tau_alpha: Optional[float]
    g_bar_at_tau_alpha: Optional[float]
    tau: Optional[float]
    horizon: float

    @property
    def distressed(self) -> bool:
        return self.tau_alpha is not None

    @property
    def defaulted(self) -> bool:
        return self.tau is not None

    @property
    def barrier(self) -> Optional[float]:
        if self.level_at_tau_alpha is None:
            return None
        return 2.0 * self.level_at_tau_alpha


def _bridge_key(path: BrownianPath, bridge_correction: bool) -> np.uint64:
    return _rng.bridge_key(path.seed) if bridge_correction else np.uint64(0)


def _run_scan(path, trigger, bridge_correction, stop_phase, record):
    st = _kernels.new_state()
    n = path.grid.count
    if record:
        sign = np.empty(n, dtype=np.int8)
        gbar = np.empty(n)
        sign[0] = 1 if path.values[0] > 0 else -1
        gbar[0] = 0.0
    else:
        sign = np.empty(0, dtype=np.int8)
        gbar = np.empty(0)
    _kernels.scan(
        path.values, 0, path.grid.step, trigger, bridge_correction,
        _bridge_key(path, bridge_correction), st, stop_phase, sign, gbar,
    )
    return st, sign, gbar


def track_zeros(path: BrownianPath, bridge_correction: bool = False) -> ZeroTrace:
    """Sign and last zero of ``path`` at every grid time.

    Time 0 counts as a zero. A grid value of exactly 0 is a zero with sign -1.
    """
    _, sign, gbar = _run_scan(path, math.inf, bridge_correction, 3, record=True)
    return ZeroTrace(times=path.times, sign=sign, last_zero=gbar)


@njit(cache=True)
def _tau_alpha_from_trace(vals, gbar, h, trigger):
    # mirrors the pre-distress branch of _kernels.scan, reading zeros from the trace
    for k in range(vals.shape[0] - 1):
        t0 = k * h
        t1 = (k + 1) * h
        x0 = vals[k]
        x1 = vals[k + 1]
        g0 = gbar[k]
        zt = gbar[k + 1] if gbar[k + 1] > g0 else -1.0
        neg = x0 < 0.0 or (x0 == 0.0 and x1 < 0.0)
        cand = g0 + trigger
        s = -1.0
        g = g0
        if neg and ((zt >= 0.0 and cand < zt) or (zt < 0.0 and cand <= t1)):
            s = cand
        elif zt >= 0.0 and x1 < 0.0 and zt < t1 and zt + trigger <= t1:
            s = zt + trigger
            g = zt
        if s >= 0.0:
            return s, x0 + (x1 - x0) * ((s - t0) / h), g
    return -1.0, 0.0, 0.0


def detect_tau_alpha(
    trace: ZeroTrace, path: BrownianPath, alpha: float
) -> Optional[Tuple[float, float, float]]:
    """First time a strictly negative excursion reaches age ``alpha**2 / 2``.

    Returns ``(tau_alpha, level, g_bar)`` or ``None`` when censored. The time
    is ``g_bar + alpha**2 / 2`` and the level is interpolated there.
    """
    s, level, g = _tau_alpha_from_trace(
        path.values, trace.last_zero, path.grid.step, distress_trigger(alpha)
    )
    if s < 0:
        return None
    return s, level, g


def _nan_to_none(x: float) -> Optional[float]:
    return None if math.isnan(x) else float(x)


def outcome_from_row(row, horizon: float) -> DefaultOutcome:
    """Wrap one ``(tau_alpha, level, g_bar, tau)`` row, NaN meaning censored."""
    return DefaultOutcome(
        tau_alpha=_nan_to_none(row[0]),
        level_at_tau_alpha=_nan_to_none(row[1]),
        g_bar_at_tau_alpha=_nan_to_none(row[2]),
        tau=_nan_to_none(row[3]),
        horizon=horizon,
    )


def detect_default(
    path: BrownianPath, alpha: float, bridge_correction: bool = False
) -> DefaultOutcome:
    """Distress time and the first later hit of the doubled distress level."""
    st, _, _ = _run_scan(
        path, distress_trigger(alpha), bridge_correction, _kernels.DEFAULTED, record=False
    )
    row = st[[_kernels.TAU_ALPHA, _kernels.LEVEL, _kernels.GBAR_TA, _kernels.TAU]]
    return outcome_from_row(row, path.grid.horizon)


def reflect_to_Y(path: BrownianPath, outcome: DefaultOutcome) -> BrownianPath:
    """The market-observed process: ``X`` before distress, ``2 X_{tau_alpha} - X`` from then on."""
    if not outcome.distressed:
        return BrownianPath(grid=path.grid, values=path.values.copy(), seed=path.seed)
    y = path.values.copy()
    after = path.times >= outcome.tau_alpha
    y[after] = outcome.barrier - path.values[after]
    return BrownianPath(grid=path.grid, values=y, seed=path.seed)
