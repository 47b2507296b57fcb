"""Command-line interface: config ingestion, subcommand dispatch, and
bit-stable CSV/JSON emission.

Exit codes: 0 success, 2 config error, 3 refusal (non-unique threshold
or failed certification). Errors print one machine-readable JSON line
to stderr. All numeric output carries 9 significant digits. The
SPECTRUM_AUCTION_WORKERS environment variable sets the default worker
count (results never depend on it).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import multi_lte, oracle, provider, simulation
from .distributions import TypeDistribution
from .equilibrium import MarketConfig, RegimeKind, solve_strategy
from .errors import (
    CertificationFailed,
    InvalidConfig,
    InvalidDistribution,
    NonUniqueThreshold,
    NonUnimodalCurve,
    SpectrumAuctionError,
)
from .multi_lte import MultiExperimentConfig, MultiMarketConfig
from .presets import PRESETS, preset
from .rng import RngStream
from .simulation import ExperimentConfig


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("SPECTRUM_AUCTION_WORKERS", "1")))
    except ValueError:
        return 1


_MARKET_KEYS = {"k", "eta_apo", "delta_lte", "r_lte", "dist"}
_MULTI_KEYS = {"k_s", "k_a", "eta_apo", "delta_lte", "theta_lte", "r_lte", "dist"}
_TOP_KEYS = {
    "market",
    "multi_market",
    "replications",
    "seed",
    "c",
    "c_min",
    "c_max",
    "steps",
    "sweep",
}


def fmt9(x: float) -> str:
    """Fixed 9-significant-digit rendering used for all emitted numbers."""
    if isinstance(x, float) and math.isinf(x):
        return "N"
    return f"{x:.9g}"


def _round9(obj):
    """Recursively round floats for JSON emission."""
    if isinstance(obj, float):
        return float(fmt9(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _emit_json(obj, path: str | None) -> None:
    text = json.dumps(_round9(obj), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidConfig(message)


def load_config(args) -> dict:
    if getattr(args, "preset", None):
        try:
            cfg = preset(args.preset)
        except KeyError:
            raise InvalidConfig(
                f"unknown preset {args.preset!r}; available: {sorted(PRESETS)}"
            )
    elif getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
    else:
        raise InvalidConfig("provide --config PATH or --preset NAME")
    _require(isinstance(cfg, dict), "config root must be an object")
    unknown = set(cfg) - _TOP_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    return cfg


def _parse_block(block: dict, keys: set[str], label: str) -> dict:
    _require(isinstance(block, dict), f"{label} must be an object")
    unknown = set(block) - keys
    _require(not unknown, f"unknown {label} keys: {sorted(unknown)}")
    missing = keys - set(block)
    _require(not missing, f"missing {label} keys: {sorted(missing)}")
    return block


def parse_market(cfg: dict) -> MarketConfig:
    _require("market" in cfg, "config needs a 'market' block")
    block = _parse_block(cfg["market"], _MARKET_KEYS, "market")
    try:
        return MarketConfig(
            k=int(block["k"]),
            dist=TypeDistribution.from_config(block["dist"]),
            eta_apo=float(block["eta_apo"]),
            delta_lte=float(block["delta_lte"]),
            r_lte=float(block["r_lte"]),
        )
    except (InvalidDistribution, ValueError, TypeError) as exc:
        raise InvalidConfig(str(exc))


def parse_multi_market(cfg: dict) -> MultiMarketConfig:
    _require("multi_market" in cfg, "config needs a 'multi_market' block")
    block = _parse_block(cfg["multi_market"], _MULTI_KEYS, "multi_market")
    try:
        return MultiMarketConfig(
            k_s=int(block["k_s"]),
            k_a=int(block["k_a"]),
            dist=TypeDistribution.from_config(block["dist"]),
            eta_apo=float(block["eta_apo"]),
            delta_lte=float(block["delta_lte"]),
            theta_lte=float(block["theta_lte"]),
            r_lte=float(block["r_lte"]),
        )
    except (InvalidDistribution, ValueError, TypeError) as exc:
        raise InvalidConfig(str(exc))


def _regime_name(regime) -> str:
    return regime.kind.value


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_equilibrium(args) -> int:
    cfg = load_config(args)
    market = parse_market(cfg)
    c = args.c if args.c is not None else cfg.get("c")
    _require(c is not None, "equilibrium needs --c or a 'c' config key")
    strat = solve_strategy(market, float(c))
    kind = strat.regime.kind
    breakpoints = [market.dist.r_min]
    if kind is RegimeKind.MID:
        breakpoints.append(strat.r_x)
    elif kind is RegimeKind.STANDARD:
        breakpoints.extend([strat.c, strat.r_t])
    breakpoints.append(market.dist.r_max)
    out = {
        "regime": _regime_name(strat.regime),
        "c": strat.c,
        "breakpoints": breakpoints,
    }
    if strat.r_t is not None:
        out["r_t"] = strat.r_t
    if strat.r_x is not None:
        out["r_x"] = strat.r_x
    _emit_json(out, args.output)
    return 0


def _curve_grid(cfg: dict, args) -> np.ndarray:
    c_min = args.c_min if args.c_min is not None else cfg.get("c_min")
    c_max = args.c_max if args.c_max is not None else cfg.get("c_max")
    steps = args.steps if args.steps is not None else cfg.get("steps", 100)
    _require(c_min is not None and c_max is not None, "payoff-curve needs --c-min and --c-max")
    _require(float(c_min) < float(c_max), "need c_min < c_max")
    _require(int(steps) >= 2, "need steps >= 2")
    return np.linspace(float(c_min), float(c_max), int(steps))


def _write_rows(path: str | None, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_payoff_curve(args) -> int:
    cfg = load_config(args)
    market = parse_market(cfg)
    grid = _curve_grid(cfg, args)
    rows = []
    for c in grid:
        point = provider.curve_point(market, float(c))
        rows.append(
            (
                fmt9(point.c),
                fmt9(point.expected_payoff),
                _regime_name(point.regime),
                fmt9(point.expected_payment),
            )
        )
    _write_rows(args.output, ["c", "expected_payoff", "regime", "expected_payment"], rows)
    return 0


def cmd_optimize(args) -> int:
    cfg = load_config(args)
    market = parse_market(cfg)
    opt = provider.optimize_reserve(market)
    out = {
        "c_star": opt.c_star,
        "expected_payoff": opt.expected_payoff,
        "case": opt.case,
        "interval": list(opt.interval) if opt.interval else None,
    }
    _emit_json(out, args.output)
    return 0


def _summary_dict(summary) -> dict:
    return asdict(summary)


def _replication_rows(market: MarketConfig, reps):
    k = market.k
    header = (
        ["rep"]
        + [f"r_{i+1}" for i in range(k)]
        + [f"bid_{i+1}" for i in range(k)]
        + ["mode", "winner", "r_pay", "pi_a_lte", "pi_b_lte", "pi_a_apo", "pi_b_apo", "w_a", "w_b", "w_max"]
    )
    rows = []
    for r in reps:
        rows.append(
            [str(r.rep)]
            + [fmt9(t) for t in r.types]
            + [fmt9(b) for b in r.bids]
            + [
                r.mode.value,
                "" if r.winner is None else str(r.winner),
                fmt9(r.r_pay),
                fmt9(r.auction_lte),
                fmt9(r.bench_lte),
                fmt9(r.auction_apo_total),
                fmt9(r.bench_apo_total),
                fmt9(r.welfare_auction),
                fmt9(r.welfare_bench),
                fmt9(r.welfare_max),
            ]
        )
    return header, rows


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    market = parse_market(cfg)
    xcfg = ExperimentConfig(
        market=market,
        replications=args.replications or int(cfg.get("replications", 5000)),
        master_seed=args.seed if args.seed is not None else int(cfg.get("seed", 0)),
        sweep=cfg.get("sweep"),
    )
    cells = simulation.sweep_cells(xcfg)
    summaries = []
    for idx, cell in enumerate(cells):
        result = simulation.run_experiment(cell, workers=args.workers)
        summaries.append(
            {
                "params": {
                    "k": cell.market.k,
                    "eta_apo": cell.market.eta_apo,
                    "delta_lte": cell.market.delta_lte,
                    "r_lte": cell.market.r_lte,
                },
                "summary": _summary_dict(result.summary),
            }
        )
        if args.output:
            path = args.output if len(cells) == 1 else f"{args.output}.{idx:03d}"
            header, rows = _replication_rows(cell.market, result.replications)
            _write_rows(path, header, rows)
    _emit_json(summaries if xcfg.sweep else summaries[0], args.summary)
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args)
    market = parse_market(cfg)
    c = args.c if args.c is not None else cfg.get("c")
    _require(c is not None, "verify needs --c or a 'c' config key")
    report = oracle.best_response_check(
        market,
        float(c),
        type_grid=args.type_grid,
        bid_grid=args.bid_grid,
        samples=args.samples,
        rng=RngStream(args.seed if args.seed is not None else 0, 0),
    )
    out = asdict(report)
    out["c"] = float(c)
    _emit_json(out, args.output)
    return 0


def _multi_replication_rows(market: MultiMarketConfig, reps):
    k = market.k_s + market.k_a
    header = (
        ["rep"]
        + [f"r_{i+1}" for i in range(k)]
        + [f"bid_{i+1}" for i in range(k)]
        + [
            "mode",
            "winner",
            "winner_origin",
            "r_pay",
            "virtual_price",
            "pi_a_lte",
            "pi_b_lte",
            "pi_a_apo",
            "pi_b_apo",
            "w_a",
            "w_b",
            "identity_residual",
        ]
    )
    rows = []
    for r in reps:
        rows.append(
            [str(r.rep)]
            + [fmt9(t) for t in r.types]
            + [fmt9(b) for b in r.bids]
            + [
                r.mode.value,
                "" if r.winner is None else str(r.winner),
                "" if r.winner_origin is None else r.winner_origin.value,
                fmt9(r.r_pay),
                fmt9(r.virtual_price),
                fmt9(r.auction_lte),
                fmt9(r.bench_lte),
                fmt9(r.auction_apo_total),
                fmt9(r.bench_apo_total),
                fmt9(r.welfare_auction),
                fmt9(r.welfare_bench),
                fmt9(r.identity_residual),
            ]
        )
    return header, rows


def cmd_multi(args) -> int:
    cfg = load_config(args)
    market = parse_multi_market(cfg)
    if args.action == "optimize":
        opt = multi_lte.optimize_reserve_multi(market, n=args.samples)
        _emit_json(
            {
                "c_star": opt.c_star,
                "expected_payoff": opt.expected_payoff,
                "case": opt.case,
                "interval": list(opt.interval) if opt.interval else None,
            },
            args.output,
        )
        return 0
    if args.action == "payoff-curve":
        grid = _curve_grid(cfg, args)
        rows = []
        for c in grid:
            mean, se = multi_lte.expected_payoff_multi(market, float(c), n=args.samples)
            rows.append((fmt9(float(c)), fmt9(mean), fmt9(se)))
        _write_rows(args.output, ["c", "expected_payoff", "se"], rows)
        return 0
    # simulate
    xcfg = MultiExperimentConfig(
        market=market,
        replications=args.replications or int(cfg.get("replications", 5000)),
        master_seed=args.seed if args.seed is not None else int(cfg.get("seed", 0)),
        reserve=args.reserve,
    )
    result = multi_lte.run_experiment_multi(xcfg, workers=args.workers)
    if args.output:
        header, rows = _multi_replication_rows(market, result.replications)
        _write_rows(args.output, header, rows)
    _emit_json(_summary_dict(result.summary), args.summary)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_config_args(p):
    p.add_argument("--config", help="path to a JSON run config")
    p.add_argument("--preset", help=f"bundled preset name ({', '.join(sorted(PRESETS))})")
    p.add_argument("--output", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectrum-auction",
        description="Reverse-auction engine for buying channel access from Wi-Fi operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", help="bidding-strategy thresholds at a reserve rate")
    _add_config_args(p)
    p.add_argument("--c", type=float, help="reserve rate (Mbps)")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("payoff-curve", help="expected payoff across reserve rates (CSV)")
    _add_config_args(p)
    p.add_argument("--c-min", dest="c_min", type=float)
    p.add_argument("--c-max", dest="c_max", type=float)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_payoff_curve)

    p = sub.add_parser("optimize", help="optimal reserve rate (JSON)")
    _add_config_args(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Monte Carlo experiment vs. the benchmark")
    _add_config_args(p)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--summary", help="summary JSON path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="best-response certification (JSON)")
    _add_config_args(p)
    p.add_argument("--c", type=float)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--type-grid", dest="type_grid", type=int, default=50)
    p.add_argument("--bid-grid", dest="bid_grid", type=int, default=101)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("multi-lte", help="multi-buyer variant")
    p.add_argument("action", choices=["optimize", "simulate", "payoff-curve"])
    _add_config_args(p)
    p.add_argument("--c-min", dest="c_min", type=float)
    p.add_argument("--c-max", dest="c_max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--reserve", type=float, help="force a reserve instead of optimizing")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--summary", help="summary JSON path (default: stdout)")
    p.set_defaults(func=cmd_multi)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        sys.stderr.write(json.dumps({"error": "config", "message": str(exc)}) + "\n")
        return 2
    except (NonUniqueThreshold, CertificationFailed, NonUnimodalCurve) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 3
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return 2
    except SpectrumAuctionError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 3


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
