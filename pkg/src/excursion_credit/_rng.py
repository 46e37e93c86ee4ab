"""Counter-based random streams.

Every draw is a pure function of ``(key, counter)``: the counter is mixed with
the SplitMix64 finalizer, so a path's stream never depends on how many other
paths were generated before it or on which thread generated it.

Gaussian variates come from a 128-layer ziggurat (Marsaglia-Tsang layout with
Doornik's independent-bits fix). Normal ``j`` of a stream starts from the raw
64-bit draw at counter ``j``: the low 7 bits pick the layer and the top 53 bits
give the abscissa. The rare rejected or tail draws continue on the sub-stream
keyed by that raw draw. No other sampling method is used, and the layer tables
are built once at import from closed-form recurrences.
"""

import math

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

_NORMAL_SALT = 0x6E6F726D616C5F31  # "normal_1"
_BRIDGE_SALT = 0x6272696467655F31  # "bridge_1"
_MASK64 = (1 << 64) - 1


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def bits(key, counter):
    return mix64(key + (np.uint64(counter) + _ONE) * _GAMMA)


@njit(cache=True, inline="always")
def uniform(key, counter):
    """Uniform on the open interval (0, 1) at position ``counter`` of stream ``key``."""
    z = mix64(key + (np.uint64(counter) + _ONE) * _GAMMA)
    return (float(z >> _S11) + 0.5) * _INV53


def _ziggurat_tables(c=128, r=3.442619855899, v=9.91256303526217e-3):
    x = np.empty(c + 1)
    f = math.exp(-0.5 * r * r)
    x[0] = v / f
    x[1] = r
    x[c] = 0.0
    for i in range(2, c):
        x[i] = math.sqrt(-2.0 * math.log(v / x[i - 1] + f))
        f = math.exp(-0.5 * x[i] * x[i])
    return x, x[1:] / x[:-1]


_ZIG_R = 3.442619855899
_ZIG_X, _ZIG_RATIO = _ziggurat_tables()
_LAYER = np.uint64(0x7F)


@njit(cache=True, inline="always")
def _unit_signed(z):
    return 2.0 * ((float(z >> _S11) + 0.5) * _INV53) - 1.0


@njit(cache=True)
def _normal_slow(z, i, u):
    # rejected first draw: continue on the sub-stream keyed by z
    sub = z
    c = 0
    while True:
        if i == 0:
            while True:
                a = math.log(uniform(sub, c)) / _ZIG_R
                b = math.log(uniform(sub, c + 1))
                c += 2
                if -2.0 * b >= a * a:
                    break
            return a - _ZIG_R if u < 0.0 else _ZIG_R - a
        x = u * _ZIG_X[i]
        f0 = math.exp(-0.5 * (_ZIG_X[i] * _ZIG_X[i] - x * x))
        f1 = math.exp(-0.5 * (_ZIG_X[i + 1] * _ZIG_X[i + 1] - x * x))
        if f1 + uniform(sub, c) * (f0 - f1) < 1.0:
            return x
        w = bits(sub, c + 1)
        c += 2
        i = int(w & _LAYER)
        u = _unit_signed(w)
        if abs(u) < _ZIG_RATIO[i]:
            return u * _ZIG_X[i]


@njit(cache=True, inline="always")
def normal(key, j):
    """Standard normal number ``j`` of stream ``key``."""
    z = bits(key, j)
    i = int(z & _LAYER)
    u = _unit_signed(z)
    if abs(u) < _ZIG_RATIO[i]:
        return u * _ZIG_X[i]
    return _normal_slow(z, i, u)


@njit(cache=True)
def fill_normals(key, start, out):
    """Write normals ``start, start + 1, ...`` of stream ``key`` into ``out``."""
    for i in range(out.shape[0]):
        out[i] = normal(key, start + i)


def _mix64_py(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def path_seed(master_seed: int, path_index: int) -> int:
    """64-bit seed of path ``path_index`` under ``master_seed``."""
    return _mix64_py(_mix64_py(master_seed) + (path_index + 1) * 0x9E3779B97F4A7C15)


def normal_key(seed: int) -> np.uint64:
    return np.uint64(_mix64_py(seed ^ _NORMAL_SALT))


def bridge_key(seed: int) -> np.uint64:
    return np.uint64(_mix64_py(seed ^ _BRIDGE_SALT))


_START_SALT = 0x73746172745F3031  # "start_01"


def start_key(seed: int) -> np.uint64:
    return np.uint64(_mix64_py(seed ^ _START_SALT))


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def path_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Vectorized :func:`path_seed` for indices ``start .. stop - 1``."""
    idx = np.arange(start + 1, stop + 1, dtype=np.uint64)
    base = np.uint64(_mix64_py(master_seed))
    with np.errstate(over="ignore"):
        return _mix64_np(base + idx * np.uint64(0x9E3779B97F4A7C15))


def stream_keys(seeds: np.ndarray, salt: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        return _mix64_np(seeds ^ np.uint64(salt))
