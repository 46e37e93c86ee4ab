"""The law of the distress time ``tau_alpha``.

``tau_alpha`` has Laplace transform ``E[exp(-theta tau_alpha)] = 1 / Psi(alpha sqrt(theta))``
with ``Psi(z) = int_0^inf x exp(z x - x**2 / 2) dx``. Integrating by parts gives
``Psi(z) = 1 + z sqrt(2 pi) exp(z**2 / 2) Phi(z)``.

The CDF is recovered by Gaver-Stehfest inversion of ``L(theta) / theta``.
Because ``tau_alpha >= alpha**2 / 2`` surely, the inversion is applied to the
shifted variable ``tau_alpha - alpha**2 / 2``, whose transform
``1 / (exp(-z**2/2) + z sqrt(2 pi) Phi(z))`` is bounded and overflow-free.
Inverting the unshifted transform leaves errors of several percent near
``alpha**2 / 2``, where the CDF rises like a square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
from scipy.special import erfcx, ndtr

from excursion_credit.detection import distress_trigger

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Largest argument for which ``psi`` is finite in double precision.
PSI_MAX_ARG = 37.5
#: Below this argument ``psi`` switches to its asymptotic series in ``1/z``.
_PSI_SERIES_ARG = -30.0

DEFAULT_TERMS = 12
#: Term counts above this need ``extended_precision=True``.
MAX_DOUBLE_TERMS = 16
DEFAULT_MAX_NONMONOTONICITY = 1e-3


class InversionError(RuntimeError):
    """Raised when the inverted CDF is too far from monotone to be trusted."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def psi(z):
    """``Psi(z) = int_0^inf x exp(z x - x**2/2) dx``.

    Raises OverflowError for ``z > PSI_MAX_ARG``.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z > PSI_MAX_ARG):
        raise OverflowError(f"psi overflows for z > {PSI_MAX_ARG}")
    out = 1.0 + z * math.sqrt(math.pi / 2) * erfcx(-z / math.sqrt(2.0))
    far = z < _PSI_SERIES_ARG
    if np.any(far):
        # 1/z^2 - 3/z^4 + 15/z^6 - ...: (-1)^n (2n+1)!! / z^(2n+2)
        w = 1.0 / (z[far] * z[far])
        term = w.copy()
        total = term.copy()
        for n in range(1, 8):
            term = -term * (2 * n + 1) * w
            total += term
        out = np.where(far, 0.0, out)
        out[far] = total
    return out if out.ndim else float(out)


def _shifted_transform(theta, alpha):
    # E[exp(-theta (tau_alpha - alpha^2/2))]
    z = alpha * np.sqrt(theta)
    return 1.0 / (np.exp(-0.5 * z * z) + z * SQRT_2PI * ndtr(z))


def laplace_tau_alpha(theta, alpha: float):
    """``E[exp(-theta tau_alpha)] = 1 / psi(alpha sqrt(theta))``.

    Evaluated as ``exp(-theta alpha**2/2)`` times the shifted transform, which
    equals ``1 / psi`` exactly and stays finite where ``psi`` overflows.
    """
    d = distress_trigger(alpha)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    out = np.exp(-theta * d) * _shifted_transform(theta, alpha)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _stehfest_weights_exact(n: int):
    m = n // 2
    weights = []
    for k in range(1, n + 1):
        s = Fraction(0)
        for j in range((k + 1) // 2, min(k, m) + 1):
            s += Fraction(
                j**m * math.factorial(2 * j),
                math.factorial(m - j) * math.factorial(j) * math.factorial(j - 1)
                * math.factorial(k - j) * math.factorial(2 * j - k),
            )
        weights.append((-1) ** (k + m) * s)
    return tuple(weights)


def stehfest_weights(n: int) -> np.ndarray:
    return np.array([float(w) for w in _stehfest_weights_exact(n)])


def _check_terms(terms: int, extended_precision: bool):
    if terms % 2 or not 4 <= terms <= 20:
        raise ValueError(f"terms must be even and in [4, 20], got {terms}")
    if terms > MAX_DOUBLE_TERMS and not extended_precision:
        raise ValueError(
            f"{terms} terms exceed the double-precision limit of {MAX_DOUBLE_TERMS}; "
            "pass extended_precision=True"
        )


def _invert_double(u, alpha, terms):
    w = stehfest_weights(terms)
    k = np.arange(1, terms + 1)
    scale = math.log(2.0) / u
    theta = scale[:, None] * k[None, :]
    return scale * np.sum(w * _shifted_transform(theta, alpha) / theta, axis=1)


def _invert_extended(u, alpha, terms):
    w = _stehfest_weights_exact(terms)
    out = np.empty_like(u)
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        for i, ui in enumerate(u):
            scale = mpmath.log(2) / mpmath.mpf(ui)
            acc = mpmath.mpf(0)
            for k, wk in enumerate(w, start=1):
                th = scale * k
                z = a * mpmath.sqrt(th)
                lt = 1 / (mpmath.exp(-z * z / 2) + z * mpmath.sqrt(2 * mpmath.pi) * mpmath.ncdf(z))
                acc += mpmath.mpf(wk.numerator) / wk.denominator * lt / th
            out[i] = float(scale * acc)
    return out


def raw_cdf(times, alpha: float, terms: int = DEFAULT_TERMS, extended_precision: bool = False):
    """Unrepaired inverted CDF of ``tau_alpha`` at ``times``.

    Times at or below ``alpha**2 / 2`` get 0, the initial value of the shifted
    law (its transform vanishes as ``theta -> inf``).
    """
    _check_terms(terms, extended_precision)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    u = times - distress_trigger(alpha)
    out = np.zeros_like(times)
    pos = u > 0
    if np.any(pos):
        inv = _invert_extended if extended_precision else _invert_double
        out[pos] = inv(u[pos], alpha, terms)
    return out


def _repair(raw):
    drops = np.maximum.accumulate(raw) - raw
    repaired = np.maximum.accumulate(np.clip(raw, 0.0, 1.0))
    return repaired, float(drops.max(initial=0.0))


@dataclass(frozen=True, eq=False)
class TauAlphaLaw:
    """Inverted CDF of ``tau_alpha`` on ``t_grid`` (first point ``alpha**2 / 2``)."""

    alpha: float
    t_grid: np.ndarray
    cdf: np.ndarray
    inversion_terms: int = DEFAULT_TERMS
    extended_precision: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def cdf_at(self, times) -> np.ndarray:
        """Invert directly at ``times`` (not interpolated), then repair monotonicity."""
        times = np.asarray(times, dtype=float)
        order = np.argsort(times, kind="stable")
        raw = raw_cdf(times[order], self.alpha, self.inversion_terms, self.extended_precision)
        out = np.empty_like(raw)
        out[order] = _repair(raw)[0]
        return out

    def with_diagnostic(self, **kw) -> "TauAlphaLaw":
        return replace(self, diagnostics={**self.diagnostics, **kw})


def default_time_grid(alpha: float, t_max: float, n: int = 400) -> np.ndarray:
    """Grid from ``alpha**2 / 2`` to ``t_max`` clustered quadratically near its start."""
    d = distress_trigger(alpha)
    if not t_max > d:
        return np.array([d, d + max(t_max - d, 0.0) + 1e-12 * max(d, 1.0)])
    s = np.linspace(0.0, 1.0, n + 1)
    grid = d + (t_max - d) * s * s
    grid[-1] = t_max
    return grid


def invert_cdf(
    alpha: float,
    t_grid=None,
    terms: int = DEFAULT_TERMS,
    *,
    t_max: float = 10.0,
    extended_precision: bool = False,
    max_nonmonotonicity: float = DEFAULT_MAX_NONMONOTONICITY,
) -> TauAlphaLaw:
    """Build the CDF of ``tau_alpha`` on ``t_grid``.

    ``t_grid`` must start at ``alpha**2 / 2`` and increase; when omitted a
    :func:`default_time_grid` up to ``t_max`` is used. The raw inversion is
    clamped to ``[0, 1]`` and made nondecreasing by a running maximum. The
    largest drop removed by that repair is kept in ``diagnostics`` and an
    :class:`InversionError` is raised if it exceeds ``max_nonmonotonicity``.
    """
    d = distress_trigger(alpha)
    _check_terms(terms, extended_precision)
    if t_grid is None:
        t_grid = default_time_grid(alpha, t_max)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise ValueError("t_grid needs at least two points")
    if abs(t_grid[0] - d) > 1e-12 * max(d, 1.0):
        raise ValueError(f"t_grid must start at alpha**2/2 = {d}, got {t_grid[0]}")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    raw = raw_cdf(t_grid, alpha, terms, extended_precision)
    cdf, drop = _repair(raw)
    cdf[0] = 0.0
    diagnostics = {
        "max_nonmonotonicity": drop,
        "max_raw": float(raw.max()),
        "min_raw": float(raw.min()),
    }
    if drop > max_nonmonotonicity:
        raise InversionError(
            f"inverted CDF drops by {drop:.3g} (> {max_nonmonotonicity:.3g})", diagnostics
        )
    return TauAlphaLaw(
        alpha=alpha,
        t_grid=t_grid,
        cdf=cdf,
        inversion_terms=terms,
        extended_precision=extended_precision,
        diagnostics=diagnostics,
    )


def _check_T(law: TauAlphaLaw, T: float):
    if T > law.t_max * (1 + 1e-12):
        raise ValueError(f"T={T} is beyond the law grid (max {law.t_max})")


def prob_tau_alpha_leq(law: TauAlphaLaw, T: float) -> float:
    """``P(tau_alpha <= T)`` by linear interpolation of the stored CDF.

    Grid points return the stored value. Just above ``alpha**2 / 2`` the CDF
    rises like a square root, so use :meth:`TauAlphaLaw.cdf_at` there.
    """
    _check_T(law, T)
    if T <= law.t_grid[0]:
        return 0.0
    return float(np.interp(T, law.t_grid, law.cdf))


def adjustment_expectation(
    law: TauAlphaLaw, alpha: float, T: float, n_refine: int = 2000
) -> float:
    """``E[(alpha/sqrt 2) / sqrt(T - g_bar) ; tau_alpha <= T]`` with ``g_bar = tau_alpha - alpha**2/2``.

    Midpoint Stieltjes sum of the integrand against CDF increments on a
    uniform refinement of ``[alpha**2/2, T]`` with at least ``n_refine`` cells.
    The integrand lies in ``(0, 1]`` and equals 1 at ``tau_alpha = T``.
    """
    if abs(law.alpha - alpha) > 1e-12 * alpha:
        raise ValueError(f"law was built for alpha={law.alpha}, not {alpha}")
    _check_T(law, T)
    d = distress_trigger(alpha)
    if T <= d:
        return 0.0
    s = np.linspace(d, T, n_refine + 1)
    dF = np.diff(law.cdf_at(s))
    mid = 0.5 * (s[:-1] + s[1:])
    k = alpha / math.sqrt(2.0)
    return float(np.sum(k / np.sqrt(T - mid + d) * dF))
