"""Run configuration read from a TOML file.

Schema version 1. Every key is optional; unknown keys are rejected::

    schema_version = 1
    alpha = 0.5               # distress starts after a negative excursion of age alpha**2/2
    horizon = 1.0             # simulation horizon in years
    step = 1e-4               # grid step in years
    n_paths = 200000
    master_seed = 1
    bridge_correction = true
    workers = 1               # threads; results do not depend on it
    inversion_terms = 12      # Gaver-Stehfest terms (even, 4..16)
    maturities = [0.25, 0.5, 1.0]
    laplace_horizon = 30.0    # horizon of the distress-time run used for Laplace checks
    laplace_thetas = [0.5, 1.0, 2.0]
    cdf_check_max = 10.0      # right end of the CDF comparison window
    hazard_bins = 8           # geometric age bins between alpha**2/2 and horizon
    output_dir = "out"        # overridden by $EXCURSION_CREDIT_OUTPUT_DIR

    [curve]
    breakpoints = [0.0]
    rates = [0.0]
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from excursion_credit.law import MAX_DOUBLE_TERMS
from excursion_credit.paths import make_grid
from excursion_credit.pricing import DiscountCurve

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "EXCURSION_CREDIT_OUTPUT_DIR"


class ConfigError(ValueError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"config key {key!r}: {reason}")
        self.key = key
        self.reason = reason


@dataclass(frozen=True)
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    alpha: float = 0.5
    horizon: float = 1.0
    step: float = 1e-4
    n_paths: int = 200_000
    master_seed: int = 1
    bridge_correction: bool = True
    workers: int = 1
    inversion_terms: int = 12
    maturities: Tuple[float, ...] = (0.25, 0.5, 1.0)
    laplace_horizon: float = 30.0
    laplace_thetas: Tuple[float, ...] = (0.5, 1.0, 2.0)
    cdf_check_max: float = 10.0
    hazard_bins: int = 8
    output_dir: str = "out"
    curve_breakpoints: Tuple[float, ...] = (0.0,)
    curve_rates: Tuple[float, ...] = (0.0,)

    def __post_init__(self):
        _validate(self)

    @property
    def curve(self) -> DiscountCurve:
        return DiscountCurve(list(self.curve_breakpoints), list(self.curve_rates))

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)


_TYPES = {
    "schema_version": int, "alpha": float, "horizon": float, "step": float,
    "n_paths": int, "master_seed": int, "bridge_correction": bool, "workers": int,
    "inversion_terms": int, "maturities": list, "laplace_horizon": float,
    "laplace_thetas": list, "cdf_check_max": float, "hazard_bins": int, "output_dir": str,
}
_CURVE_KEYS = {"breakpoints": "curve_breakpoints", "rates": "curve_rates"}


def _coerce(key, value, kind):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if not isinstance(value, list) or not value:
        raise ConfigError(key, f"expected a nonempty list of numbers, got {value!r}")
    return tuple(_coerce(key, v, float) for v in value)


def _validate(cfg: RunConfig):
    def need(cond, key, reason):
        if not cond:
            raise ConfigError(key, reason)

    need(cfg.schema_version == SCHEMA_VERSION, "schema_version",
         f"unsupported version {cfg.schema_version} (expected {SCHEMA_VERSION})")
    for key in ("alpha", "horizon", "step", "laplace_horizon", "cdf_check_max"):
        v = getattr(cfg, key)
        need(v > 0 and math.isfinite(v), key, f"must be positive and finite, got {v}")
    need(cfg.n_paths >= 1, "n_paths", "must be at least 1")
    need(cfg.workers >= 1, "workers", "must be at least 1")
    need(0 <= cfg.master_seed < 2**64, "master_seed", "must fit in 64 unsigned bits")
    need(cfg.inversion_terms % 2 == 0 and 4 <= cfg.inversion_terms <= MAX_DOUBLE_TERMS,
         "inversion_terms", f"must be even and in [4, {MAX_DOUBLE_TERMS}]")
    need(cfg.hazard_bins >= 1, "hazard_bins", "must be at least 1")
    mats = cfg.maturities
    need(all(m > 0 for m in mats), "maturities", "must be positive")
    need(all(b > a for a, b in zip(mats, mats[1:])), "maturities", "must be strictly increasing")
    need(all(t > 0 for t in cfg.laplace_thetas), "laplace_thetas", "must be positive")
    need(len(cfg.curve_breakpoints) == len(cfg.curve_rates), "curve",
         "breakpoints and rates must have equal length")
    try:
        cfg.curve
    except ValueError as exc:
        raise ConfigError("curve", str(exc)) from None
    for key in ("horizon", "laplace_horizon"):
        try:
            make_grid(getattr(cfg, key), cfg.step)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None


def config_from_mapping(data: dict) -> RunConfig:
    kw = {}
    for key, value in data.items():
        if key == "curve":
            if not isinstance(value, dict):
                raise ConfigError("curve", "expected a table with breakpoints and rates")
            for ck, cv in value.items():
                if ck not in _CURVE_KEYS:
                    raise ConfigError(f"curve.{ck}", "unknown key")
                kw[_CURVE_KEYS[ck]] = _coerce(f"curve.{ck}", cv, list)
            continue
        if key not in _TYPES:
            raise ConfigError(key, "unknown key")
        kw[key] = _coerce(key, value, _TYPES[key])
    return RunConfig(**kw)


def load_config(path: Optional[os.PathLike]) -> RunConfig:
    """Read and validate a TOML config; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"invalid TOML: {exc}") from None
    return config_from_mapping(data)
