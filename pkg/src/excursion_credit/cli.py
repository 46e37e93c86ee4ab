"""Command-line entry point ``excursion-credit``.

Every command reads an optional TOML config (see :mod:`excursion_credit.config`)
and writes one CSV into the output directory. Exit codes: 0 success, 1 a
validation verdict failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from excursion_credit import montecarlo, pricing, validation
from excursion_credit.config import ConfigError, RunConfig, load_config
from excursion_credit.law import InversionError

log = logging.getLogger("excursion_credit")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

COMMANDS = ("simulate", "law", "price", "distress-price", "validate", "hazard")

SIMULATE_COLUMNS = ("T", "quantity", "mean", "std_error", "n_effective", "censored_fraction")
OUTCOME_COLUMNS = ("path", "tau_alpha", "level", "g_bar", "tau")
LAW_COLUMNS = ("t", "cdf")
PRICE_COLUMNS = ("T", "discount", "survival", "price", "spread", "method")
DISTRESS_COLUMNS = ("t", "age", "span") + PRICE_COLUMNS
REPORT_COLUMNS = ("quantity", "analytic", "mc_mean", "mc_se", "allowance", "z", "verdict")
HAZARD_COLUMNS = ("age_lo", "age_hi", "midpoint", "target", "defaults", "exposure",
                  "at_risk_samples", "rate", "std_error")


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    return path


def _quote_row(q: pricing.PriceQuote) -> tuple:
    return (q.T, q.discount, q.survival, q.price, q.spread, q.method.value)


def cmd_simulate(cfg: RunConfig, out: Path, write_outcomes: bool = False) -> int:
    outcomes = montecarlo.simulate(validation.settings_for(cfg, cfg.horizon))
    rows = []
    for T in cfg.maturities:
        if T > outcomes.horizon:
            log.warning("maturity %g beyond horizon %g skipped", T, outcomes.horizon)
            continue
        stats = montecarlo.default_stats(outcomes, T)
        named = [("prob_tau_alpha", stats.prob_tau_alpha), ("prob_tau", stats.prob_tau),
                 ("adjustment", stats.adjustment), ("survival", stats.survival),
                 ("doob_meyer", montecarlo.doob_meyer(outcomes, T))]
        for name, e in named:
            rows.append((T, name, e.mean, e.std_error, e.n_effective, e.censored_fraction))
    write_csv(out / "simulate.csv", SIMULATE_COLUMNS, rows)
    if write_outcomes:
        write_csv(out / "outcomes.csv", OUTCOME_COLUMNS,
                  zip(range(outcomes.n_paths), outcomes.tau_alpha.tolist(), outcomes.level.tolist(),
                      outcomes.g_bar.tolist(), outcomes.tau.tolist()))
    return EXIT_OK


def cmd_law(cfg: RunConfig, out: Path) -> int:
    law = validation.build_law(cfg)
    write_csv(out / "law.csv", LAW_COLUMNS, zip(law.t_grid.tolist(), law.cdf.tolist()))
    return EXIT_OK


def cmd_price(cfg: RunConfig, out: Path) -> int:
    law = validation.build_law(cfg)
    quotes = pricing.term_structure(cfg.alpha, cfg.maturities, cfg.curve, law)
    write_csv(out / "term_structure.csv", PRICE_COLUMNS, map(_quote_row, quotes))
    return EXIT_OK


def cmd_distress_price(cfg: RunConfig, out: Path, age: float, span: float,
                       t: Optional[float] = None) -> int:
    q = pricing.price_distress_coordinates(cfg.alpha, age, span, cfg.curve, t)
    write_csv(out / "distress_price.csv", DISTRESS_COLUMNS, [(q.t, age, span) + _quote_row(q)])
    return EXIT_OK


def cmd_validate(cfg: RunConfig, out: Path) -> int:
    rows = validation.run_validation(cfg)
    write_csv(out / "validation.csv", REPORT_COLUMNS,
              [(r.quantity, r.analytic, r.mc_mean, r.mc_se, r.allowance, r.z, r.verdict) for r in rows])
    for r in rows:
        if r.verdict == validation.FAIL:
            log.error("FAIL %s: analytic %.6g, simulated %.6g", r.quantity, r.analytic, r.mc_mean)
    return EXIT_OK if validation.all_passed(rows) else EXIT_FAIL


def cmd_hazard(cfg: RunConfig, out: Path) -> int:
    outcomes = montecarlo.simulate(validation.settings_for(cfg, cfg.horizon))
    edges = montecarlo.geometric_age_edges(cfg.alpha, cfg.horizon, cfg.hazard_bins)
    bins = montecarlo.hazard_profile(outcomes, edges)
    write_csv(out / "hazard.csv", HAZARD_COLUMNS,
              [(b.age_lo, b.age_hi, b.midpoint, b.target, b.defaults, b.exposure,
                b.at_risk_samples, b.rate, b.std_error) for b in bins])
    return EXIT_OK


def run(command: str, config: RunConfig, **options) -> int:
    """Run one command; returns the exit code."""
    handlers = {
        "simulate": cmd_simulate, "law": cmd_law, "price": cmd_price,
        "distress-price": cmd_distress_price, "validate": cmd_validate, "hazard": cmd_hazard,
    }
    if command not in handlers:
        raise ValueError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    return handlers[command](config, config.resolved_output_dir(), **options)


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="excursion-credit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "simulate": "simulate paths and write default statistics",
        "law": "invert the distress-time law and export its CDF",
        "price": "time-0 term structure of zero-recovery bond prices",
        "distress-price": "price in distress from excursion age and span",
        "validate": "compare every closed form with simulation",
        "hazard": "empirical hazard rate by excursion age",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("-c", "--config", type=Path, help="TOML config file (defaults if omitted)")
        if name == "simulate":
            sp.add_argument("--outcomes", action="store_true", help="also write per-path outcomes")
        if name == "distress-price":
            sp.add_argument("--age", type=_finite, required=True, help="excursion age a")
            sp.add_argument("--span", type=_finite, required=True, help="maturity minus last zero, b")
            sp.add_argument("--t", type=_finite, help="valuation time (default: the age)")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    options = {}
    if args.command == "simulate":
        options["write_outcomes"] = args.outcomes
    elif args.command == "distress-price":
        options.update(age=args.age, span=args.span, t=args.t)
    try:
        cfg = load_config(args.config)
        return run(args.command, cfg, **options)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InversionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
