"""Compiled scanning kernels shared by the per-path API and the Monte Carlo runner.

A scan walks a grid path one step at a time, tracking the market-observed
process ``Y`` (equal to ``X`` before distress, reflected about the distress
level afterwards). The scan state lives in a small float array so a path can
be scanned in blocks without storing it whole.

Bridge draws for step ``k`` use counter ``2k`` of the bridge stream; the
reflected remainder of the step in which distress starts uses ``2k + 1``.

A segment that starts exactly at zero (the path start) has zeros accumulating
at its left end. With the bridge correction on, its last zero is drawn
exactly: reversed in time the segment is a bridge from ``b`` to 0, whose
first hitting time of 0 is ``b^2 dt / (b^2 + dt Z^2)``.
"""

import math

import numpy as np
from numba import njit

from excursion_credit import _rng

# scan state layout
PHASE, GBAR, TAU_ALPHA, LEVEL, GBAR_TA, TAU, BARRIER = range(7)
STATE_SIZE = 7

PRE_DISTRESS, DISTRESS, DEFAULTED = 0, 1, 2

# bridge probabilities below exp(-BRIDGE_CUTOFF) are treated as zero
BRIDGE_CUTOFF = 40.0


def new_state():
    st = np.full(STATE_SIZE, np.nan)
    st[PHASE] = PRE_DISTRESS
    st[GBAR] = 0.0
    return st


@njit(cache=True, inline="always")
def _hidden_zero(a, b, t0, t1, two_over_dt, use_bridge, kb, counter):
    # midpoint of [t0, t1] if a bridge draw says the segment touched zero, else -1
    if not use_bridge:
        return -1.0
    q = a * b * two_over_dt
    if q < BRIDGE_CUTOFF and _rng.uniform(kb, counter) < math.exp(-q):
        return t0 + 0.5 * (t1 - t0)
    return -1.0


@njit(cache=True, inline="always")
def _segment_zero(a, b, t0, t1, two_over_dt, use_bridge, kb, counter):
    # first zero in (t0, t1] of the segment from a to b, or -1
    if b == 0.0:
        return t1
    p = a * b
    if p < 0.0:
        return t0 + (t1 - t0) * (a / (a - b))
    if p > 0.0:
        return _hidden_zero(a, b, t0, t1, two_over_dt, use_bridge, kb, counter)
    if use_bridge:
        dt = t1 - t0
        z = _rng.normal(kb, counter)
        w = dt * z * z
        return t0 + dt * (w / (b * b + w))
    return -1.0


@njit(cache=True)
def _enter_distress(st, s, x0, x1, t0, t1, h, use_bridge, kb, k):
    level = x0 + (x1 - x0) * ((s - t0) / h)
    barrier = 2.0 * level
    st[PHASE] = DISTRESS
    st[TAU_ALPHA] = s
    st[LEVEL] = level
    st[GBAR_TA] = st[GBAR]
    st[BARRIER] = barrier
    # reflected remainder of the step: Y runs from level to barrier - x1
    if s < t1:
        zt = _segment_zero(
            level, barrier - x1, s, t1, 2.0 / (t1 - s), use_bridge, kb, 2 * k + 1
        )
        if zt >= 0.0:
            st[GBAR] = zt
            st[PHASE] = DEFAULTED
            st[TAU] = zt


@njit(cache=True)
def scan(vals, k0, h, trigger, use_bridge, kb, st, stop_phase, sign_out, gbar_out):
    """Advance the scan over ``vals`` (levels at grid indices ``k0, k0 + 1, ...``).

    Returns True as soon as the phase reaches ``stop_phase``. When ``sign_out``
    is non-empty, the sign and last zero of ``Y`` at each grid index ``k0 + i``
    (``i >= 1``) are written to ``sign_out[k0 + i]`` and ``gbar_out[k0 + i]``.
    """
    record = sign_out.shape[0] > 0
    n = vals.shape[0]
    phase = st[PHASE]
    gbar = st[GBAR]
    barrier = st[BARRIER]
    two_over_h = 2.0 / h
    for i in range(n - 1):
        k = k0 + i
        t0 = k * h
        t1 = (k + 1) * h
        x0 = vals[i]
        x1 = vals[i + 1]
        if phase == PRE_DISTRESS:
            zt = _segment_zero(x0, x1, t0, t1, two_over_h, use_bridge, kb, 2 * k)
            neg = x0 < 0.0 or (x0 == 0.0 and x1 < 0.0)
            cand = gbar + trigger
            if neg and ((zt >= 0.0 and cand < zt) or (zt < 0.0 and cand <= t1)):
                _enter_distress(st, cand, x0, x1, t0, t1, h, use_bridge, kb, k)
            elif zt >= 0.0:
                gbar = zt
                st[GBAR] = zt
                # only reachable when the trigger is shorter than one step
                if x1 < 0.0 and zt < t1 and zt + trigger <= t1:
                    _enter_distress(st, zt + trigger, x0, x1, t0, t1, h, use_bridge, kb, k)
            if st[PHASE] != PRE_DISTRESS:
                phase = st[PHASE]
                gbar = st[GBAR]
                barrier = st[BARRIER]
        else:
            zt = _segment_zero(
                barrier - x0, barrier - x1, t0, t1, two_over_h, use_bridge, kb, 2 * k
            )
            if zt >= 0.0:
                gbar = zt
                st[GBAR] = zt
                if phase == DISTRESS:
                    phase = DEFAULTED
                    st[PHASE] = DEFAULTED
                    st[TAU] = zt
        if record:
            y1 = x1 if phase == PRE_DISTRESS else barrier - x1
            sign_out[k + 1] = 1 if y1 > 0.0 else -1
            gbar_out[k + 1] = gbar
        if phase >= stop_phase:
            return True
    return False


_BLOCK = 4096


@njit(cache=True, nogil=True)
def simulate_outcomes(normal_keys, bridge_keys, x_start, gbar0, n_steps, h, trigger,
                      use_bridge, stop_phase, out):
    """Simulate one path per key pair and write ``(tau_alpha, level, gbar_ta, tau)`` rows.

    Path ``p`` starts at level ``x_start[p]`` with its running excursion begun
    at time ``gbar0 <= 0``. Censored quantities are NaN. Paths stop scanning
    once ``stop_phase`` is reached or the grid ends.
    """
    sqrt_h = math.sqrt(h)
    z = np.empty(_BLOCK)
    vals = np.empty(_BLOCK + 1)
    st = np.empty(STATE_SIZE)
    no_sign = np.empty(0, dtype=np.int8)
    no_gbar = np.empty(0)
    for p in range(normal_keys.shape[0]):
        st[:] = np.nan
        st[PHASE] = PRE_DISTRESS
        st[GBAR] = gbar0
        x = x_start[p]
        k0 = 0
        while k0 < n_steps:
            m = min(_BLOCK, n_steps - k0)
            _rng.fill_normals(normal_keys[p], k0, z[:m])
            vals[0] = x
            for j in range(m):
                x = x + sqrt_h * z[j]
                vals[j + 1] = x
            if scan(vals[: m + 1], k0, h, trigger, use_bridge, bridge_keys[p], st,
                    stop_phase, no_sign, no_gbar):
                break
            k0 += m
        out[p, 0] = st[TAU_ALPHA]
        out[p, 1] = st[LEVEL]
        out[p, 2] = st[GBAR_TA]
        out[p, 3] = st[TAU]
