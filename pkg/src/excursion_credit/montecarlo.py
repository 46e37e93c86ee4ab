"""Monte Carlo estimates of the quantities the analytics give in closed form.

Path ``i`` of a run is generated from the seed ``path_seed(master_seed, i)``,
so results do not depend on the number of worker threads. Paths are processed
in fixed chunks, and every reduction is an exactly rounded ``math.fsum`` over
per-path values in path order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from excursion_credit import _kernels, _rng
from excursion_credit.detection import DefaultOutcome, distress_trigger, outcome_from_row
from excursion_credit.paths import TimeGrid

CHUNK_SIZE = 4096
DEFAULT_ALLOWANCE = 0.005
LAPLACE_TRUNCATION = 1e-6


@dataclass(frozen=True)
class McSettings:
    n_paths: int
    grid: TimeGrid
    alpha: float
    master_seed: int = 0
    bridge_correction: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be at least 1, got {self.n_paths}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        distress_trigger(self.alpha)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_effective: int
    censored_fraction: float = 0.0


@dataclass(frozen=True, eq=False)
class SimulatedOutcomes:
    """Per-path distress/default data; NaN marks a censored value.

    Times are measured from the simulation start.
    """

    tau_alpha: np.ndarray
    level: np.ndarray
    g_bar: np.ndarray
    tau: np.ndarray
    horizon: float
    alpha: float
    step: float

    @property
    def n_paths(self) -> int:
        return self.tau_alpha.shape[0]

    def outcome(self, i: int) -> DefaultOutcome:
        row = (self.tau_alpha[i], self.level[i], self.g_bar[i], self.tau[i])
        return outcome_from_row(row, self.horizon)


def start_levels(master_seed: int, start: int, stop: int, sign: int, age: float) -> np.ndarray:
    """Starting levels of paths ``start..stop-1`` inside an excursion of ``sign`` and ``age``.

    Given only sign and age, the level is ``sign * sqrt(age) * R`` with ``R``
    Rayleigh distributed. Age 0 gives level 0.
    """
    if age == 0:
        return np.zeros(stop - start)
    seeds = _rng.path_seeds(master_seed, start, stop)
    u = np.array([_rng.uniform(k, 0) for k in _rng.stream_keys(seeds, _rng._START_SALT)])
    return (1.0 if sign > 0 else -1.0) * math.sqrt(age) * np.sqrt(-2.0 * np.log(u))


def simulate(
    settings: McSettings,
    stop_at: str = "tau",
    start_sign: int = -1,
    start_age: float = 0.0,
) -> SimulatedOutcomes:
    """Run the batch of paths described by ``settings``.

    ``stop_at="tau_alpha"`` stops each path at distress, leaving ``tau``
    censored. A nonzero ``start_age`` starts every path inside an excursion of
    that age and sign: the starting level is ``sign * sqrt(age) * R`` with
    ``R`` Rayleigh, which is the conditional law of the level given only the
    excursion's sign and age.
    """
    if stop_at not in ("tau", "tau_alpha"):
        raise ValueError(f"stop_at must be 'tau' or 'tau_alpha', got {stop_at!r}")
    if start_age < 0:
        raise ValueError("start_age must be nonnegative")
    stop_phase = _kernels.DEFAULTED if stop_at == "tau" else _kernels.DISTRESS
    trigger = distress_trigger(settings.alpha)
    n = settings.n_paths
    out = np.empty((n, 4))
    bounds = [(a, min(a + CHUNK_SIZE, n)) for a in range(0, n, CHUNK_SIZE)]

    def run(bound):
        a, b = bound
        seeds = _rng.path_seeds(settings.master_seed, a, b)
        nk = _rng.stream_keys(seeds, _rng._NORMAL_SALT)
        bk = _rng.stream_keys(seeds, _rng._BRIDGE_SALT)
        x0 = start_levels(settings.master_seed, a, b, start_sign, start_age)
        _kernels.simulate_outcomes(
            nk, bk, x0, -start_age, settings.grid.n_steps, settings.grid.step, trigger,
            settings.bridge_correction, stop_phase, out[a:b],
        )

    if settings.workers == 1:
        for bound in bounds:
            run(bound)
    else:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            list(pool.map(run, bounds))
    return SimulatedOutcomes(
        tau_alpha=out[:, 0].copy(),
        level=out[:, 1].copy(),
        g_bar=out[:, 2].copy(),
        tau=out[:, 3].copy(),
        horizon=settings.grid.horizon,
        alpha=settings.alpha,
        step=settings.grid.step,
    )


def mean_estimate(values: np.ndarray, censored_fraction: float = 0.0) -> McEstimate:
    """Sample mean and its standard error, both reduced with ``math.fsum``."""
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((values - mean) ** 2) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return McEstimate(mean=mean, std_error=se, n_effective=n, censored_fraction=censored_fraction)


@dataclass(frozen=True)
class DefaultStats:
    prob_tau_alpha: McEstimate
    prob_tau: McEstimate
    adjustment: McEstimate
    survival: McEstimate


def _check_T(outcomes: SimulatedOutcomes, T: float):
    if T > outcomes.horizon * (1 + 1e-12):
        raise ValueError(f"T={T} is beyond the simulated horizon {outcomes.horizon}")


def default_stats(outcomes: SimulatedOutcomes, T: float) -> DefaultStats:
    """Indicator means of ``{tau_alpha <= T}``, ``{tau <= T}``, ``{tau > T}`` and the adjustment functional."""
    _check_T(outcomes, T)
    with np.errstate(invalid="ignore"):
        hit_a = outcomes.tau_alpha <= T
        hit = outcomes.tau <= T
    k = outcomes.alpha / math.sqrt(2.0)
    adj = np.zeros(outcomes.n_paths)
    adj[hit_a] = k / np.sqrt(T - outcomes.g_bar[hit_a])
    cens_a = float(np.isnan(outcomes.tau_alpha).mean())
    cens = float(np.isnan(outcomes.tau).mean())
    p_tau = mean_estimate(hit.astype(float), cens)
    survival = McEstimate(1.0 - p_tau.mean, p_tau.std_error, p_tau.n_effective, cens)
    return DefaultStats(
        prob_tau_alpha=mean_estimate(hit_a.astype(float), cens_a),
        prob_tau=p_tau,
        adjustment=mean_estimate(adj, cens_a),
        survival=survival,
    )


def estimate_default_stats(settings: McSettings, T: float) -> DefaultStats:
    return default_stats(simulate(settings), T)


def doob_meyer(outcomes: SimulatedOutcomes, T: float) -> McEstimate:
    """Mean of ``N_{T ^ tau} - A_{T ^ tau}``, the default indicator minus its compensator."""
    _check_T(outcomes, T)
    ta, g, tau = outcomes.tau_alpha, outcomes.g_bar, outcomes.tau
    with np.errstate(invalid="ignore"):
        n_t = (tau <= T).astype(float)
        on = ta < T
    end = np.where(np.isnan(tau), T, np.minimum(tau, T))
    a_t = np.zeros(outcomes.n_paths)
    a_t[on] = 0.5 * np.log((end[on] - g[on]) / (ta[on] - g[on]))
    return mean_estimate(n_t - a_t, float(np.isnan(tau).mean()))


@dataclass(frozen=True)
class LaplaceEstimate:
    estimate: McEstimate
    theta: float
    bias_bracket: Tuple[float, float]


def laplace_estimate(outcomes: SimulatedOutcomes, theta: float) -> LaplaceEstimate:
    """Mean of ``exp(-theta tau_alpha)``, censored paths contributing 0.

    The true value lies in ``bias_bracket``: censored paths could add at most
    ``exp(-theta * horizon)`` each.
    """
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    n = outcomes.n_paths
    if theta == 0:
        return LaplaceEstimate(McEstimate(1.0, 0.0, n, 0.0), 0.0, (1.0, 1.0))
    bound = math.exp(-theta * outcomes.horizon)
    if bound >= LAPLACE_TRUNCATION:
        raise ValueError(
            f"horizon {outcomes.horizon} too short for theta={theta}: "
            f"exp(-theta*horizon)={bound:.3g} >= {LAPLACE_TRUNCATION}"
        )
    cens = np.isnan(outcomes.tau_alpha)
    vals = np.where(cens, 0.0, np.exp(-theta * np.nan_to_num(outcomes.tau_alpha)))
    est = mean_estimate(vals, float(cens.mean()))
    return LaplaceEstimate(est, theta, (est.mean, est.mean + bound * est.censored_fraction))


def estimate_laplace(settings: McSettings, theta: float) -> LaplaceEstimate:
    if theta == 0:
        return LaplaceEstimate(McEstimate(1.0, 0.0, settings.n_paths, 0.0), 0.0, (1.0, 1.0))
    if math.exp(-theta * settings.grid.horizon) >= LAPLACE_TRUNCATION:
        raise ValueError(f"horizon {settings.grid.horizon} too short for theta={theta}")
    return laplace_estimate(simulate(settings, stop_at="tau_alpha"), theta)


@dataclass(frozen=True)
class HazardBin:
    age_lo: float
    age_hi: float
    defaults: int
    exposure: float
    at_risk_samples: float
    rate: float
    std_error: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.age_lo + self.age_hi)

    @property
    def target(self) -> float:
        return 0.5 / self.midpoint

    @property
    def empty(self) -> bool:
        return self.exposure == 0


def hazard_profile(outcomes: SimulatedOutcomes, age_edges: Sequence[float]) -> List[HazardBin]:
    """Defaults per unit of at-risk time, binned by excursion age in distress.

    A distressed path is at risk from age ``tau_alpha - g_bar`` until its age
    at default or at the horizon. ``at_risk_samples`` is the exposure in grid
    steps. Empty bins get NaN rates.
    """
    edges = np.asarray(age_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("age_edges must be strictly increasing with at least 2 entries")
    on = ~np.isnan(outcomes.tau_alpha)
    g = outcomes.g_bar[on]
    start = outcomes.tau_alpha[on] - g
    tau = outcomes.tau[on]
    dflt = ~np.isnan(tau)
    end = np.where(dflt, tau, outcomes.horizon) - g
    age_at_default = (tau - g)[dflt]
    bins = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        exposure = math.fsum(np.clip(np.minimum(end, hi) - np.maximum(start, lo), 0.0, None))
        count = int(np.count_nonzero((age_at_default >= lo) & (age_at_default < hi)))
        rate = count / exposure if exposure > 0 else math.nan
        se = math.sqrt(count) / exposure if exposure > 0 else math.nan
        bins.append(HazardBin(lo, hi, count, exposure, exposure / outcomes.step, rate, se))
    return bins


def geometric_age_edges(alpha: float, horizon: float, n_bins: int) -> np.ndarray:
    """``n_bins`` geometric age bins from the distress trigger to ``horizon``."""
    lo = distress_trigger(alpha)
    if horizon <= lo:
        raise ValueError(f"horizon {horizon} does not exceed the distress trigger {lo}")
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    return np.geomspace(lo, horizon, n_bins + 1)


def estimate_hazard_profile(settings: McSettings, age_bins: Sequence[float]) -> List[HazardBin]:
    return hazard_profile(simulate(settings), age_bins)


def empirical_cdf_distance(law, tau_alpha: np.ndarray, t_lo: float, t_hi: float) -> float:
    """Sup over ``[t_lo, t_hi]`` of the gap between ``law`` and the sample CDF.

    Censored samples (NaN) count as larger than ``t_hi``, which must not
    exceed the simulated horizon.
    """
    n = tau_alpha.size
    x = np.sort(tau_alpha[~np.isnan(tau_alpha)])
    inside = x[(x >= t_lo) & (x <= t_hi)]
    below = np.searchsorted(x, t_lo, side="left")
    pts = np.concatenate(([t_lo], inside, [t_hi]))
    f = law.cdf_at(pts)
    right = np.searchsorted(x, pts, side="right") / n
    left = np.searchsorted(x, pts, side="left") / n
    left[0] = below / n
    return float(max(np.max(np.abs(f - right)), np.max(np.abs(f - left))))


@dataclass(frozen=True)
class Verdict:
    passed: bool
    z: float
    gap: float
    tolerance: float


def compare(analytic: float, mc: McEstimate, discretization_allowance: float = DEFAULT_ALLOWANCE) -> Verdict:
    """PASS iff ``|analytic - mc.mean| <= 3 mc.std_error + discretization_allowance``."""
    gap = analytic - mc.mean
    tol = 3.0 * mc.std_error + discretization_allowance
    if mc.std_error > 0:
        z = gap / mc.std_error
    else:
        z = 0.0 if gap == 0 else math.copysign(math.inf, gap)
    return Verdict(passed=abs(gap) <= tol, z=z, gap=gap, tolerance=tol)
