"""What the market sees: the sign of ``Y``, Azéma's martingale and the default intensity."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from excursion_credit.detection import DefaultOutcome, ZeroTrace
from excursion_credit.paths import BrownianPath

SQRT2 = math.sqrt(2.0)


class Phase(enum.Enum):
    PRE_DISTRESS = "pre-distress"
    DISTRESS = "distress"
    DEFAULTED = "defaulted"


@dataclass(frozen=True)
class MarketState:
    """Market-observable snapshot at time ``t``.

    ``g_bar`` is the last zero of ``Y`` at or before ``t`` and ``age`` is
    ``t - g_bar``. For the intensity the age is read as a left limit: a zero
    exactly at ``t`` does not reset it.
    """

    t: float
    phase: Phase
    g_bar: float
    sign: int = -1

    def __post_init__(self):
        if self.g_bar > self.t:
            raise ValueError(f"last zero {self.g_bar} lies after t={self.t}")
        if self.phase is Phase.DISTRESS and self.sign != -1:
            raise ValueError("a distressed state has negative sign")

    @property
    def age(self) -> float:
        return self.t - self.g_bar


@dataclass(frozen=True, eq=False)
class AzemaPath:
    """Azéma's martingale on a grid plus the jumps it makes at zeros of ``Y``.

    ``jump_sizes[i]`` is ``M_z - M_{z-} = -M_{z-}`` at the zero ``jump_times[i]``.
    """

    times: np.ndarray
    values: np.ndarray
    jump_times: np.ndarray
    jump_sizes: np.ndarray


@dataclass(frozen=True, eq=False)
class IntensityPath:
    times: np.ndarray
    intensity: np.ndarray
    compensator: np.ndarray


def azema_path(y_path: BrownianPath, trace: ZeroTrace) -> AzemaPath:
    """Evaluate ``M_t = sign(Y_t) sqrt(2 (t - g_bar_t))`` on the grid of ``y_path``."""
    times = trace.times
    m = trace.sign * SQRT2 * np.sqrt(np.maximum(trace.age, 0.0))
    lz = trace.last_zero
    # one zero per step at most: the step (t_k, t_k+1] holds a zero iff last_zero moved
    k = np.flatnonzero(lz[1:] > lz[:-1])
    z = lz[k + 1]
    pre_sign = np.where(y_path.values[k] > 0, 1.0, -1.0)
    pre = pre_sign * SQRT2 * np.sqrt(z - lz[k])
    return AzemaPath(times=times, values=m, jump_times=z, jump_sizes=-pre)


def azema_default_times(
    m_path: AzemaPath, alpha: float
) -> Tuple[Optional[float], Optional[float]]:
    """Distress and default times read off Azéma's martingale alone.

    Distress is the first grid time with ``M <= -alpha``; default is the first
    zero where ``M`` jumps up by at least ``alpha``. Returns ``None`` for
    either when it does not occur.
    """
    hit = np.flatnonzero(m_path.values <= -alpha)
    tau_alpha = float(m_path.times[hit[0]]) if hit.size else None
    big = np.flatnonzero(m_path.jump_sizes >= alpha)
    tau = float(m_path.jump_times[big[0]]) if big.size else None
    return tau_alpha, tau


def intensity(state: MarketState) -> float:
    """Default intensity: ``1 / (2 age)`` in distress, 0 otherwise."""
    if state.phase is not Phase.DISTRESS:
        return 0.0
    if not state.age > 0:
        raise ValueError(f"distress requires a positive excursion age, got {state.age}")
    return 0.5 / state.age


def compensator(outcome: DefaultOutcome, upto: float) -> float:
    """Integrated intensity up to ``min(upto, tau)``.

    Uses the exact antiderivative ``0.5 * log(age_end / age_start)`` of the
    distress intensity, where ``age_start`` is the age at distress onset.
    """
    if upto > outcome.horizon * (1 + 1e-12):
        raise ValueError(f"upto={upto} is beyond the horizon {outcome.horizon}")
    if not outcome.distressed or upto <= outcome.tau_alpha:
        return 0.0
    end = upto if outcome.tau is None else min(upto, outcome.tau)
    g = outcome.g_bar_at_tau_alpha
    return 0.5 * math.log((end - g) / (outcome.tau_alpha - g))


def intensity_path(outcome: DefaultOutcome, times: np.ndarray) -> IntensityPath:
    """Intensity and compensator of one outcome sampled at ``times``."""
    times = np.asarray(times, dtype=float)
    lam = np.zeros_like(times)
    comp = np.zeros_like(times)
    if outcome.distressed:
        g = outcome.g_bar_at_tau_alpha
        end = math.inf if outcome.tau is None else outcome.tau
        live = (times > outcome.tau_alpha) & (times <= end)
        lam[live] = 0.5 / (times[live] - g)
        capped = np.minimum(times, end)
        on = times > outcome.tau_alpha
        comp[on] = 0.5 * np.log((capped[on] - g) / (outcome.tau_alpha - g))
    return IntensityPath(times=times, intensity=lam, compensator=comp)


def counting_process(outcome: DefaultOutcome, times: np.ndarray) -> np.ndarray:
    """Default indicator ``1[t >= tau]`` at ``times``."""
    times = np.asarray(times, dtype=float)
    if outcome.tau is None:
        return np.zeros_like(times)
    return (times >= outcome.tau).astype(float)


def structure_equation_residual(m_path: AzemaPath) -> float:
    """Sup over grid times of ``|sum (dM)^2 - t + sum M_- dM|`` with grid increments."""
    m = m_path.values
    dm = np.diff(m)
    lhs = np.concatenate(([0.0], np.cumsum(dm * dm + m[:-1] * dm)))
    return float(np.max(np.abs(lhs - m_path.times)))
