"""Monte Carlo experiment harness: auction scheme vs. random-coexistence
benchmark, relative gains, and a centralized welfare upper bound.

Replication ``i`` owns stream ``(master_seed, i)`` and consumes draws in
a fixed order: the K type draws, then the auction tie-break (only when
one is needed), then the benchmark channel pick. Aggregation is done on
arrays ordered by replication index, so summaries are identical under
any worker count.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .auction import Mode, _resolve_values, lte_payoff, realized_apo_payoffs
from .equilibrium import MarketConfig, bid_values
from .provider import optimize_reserve
from .rng import RngStream

SWEEP_KEYS = ("r_lte", "k", "delta_lte", "eta_apo")


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment setup; ``reserve`` forces a fixed reserve rate instead
    of optimizing (useful for studying off-optimum play)."""

    market: MarketConfig
    replications: int = 5000
    master_seed: int = 0
    sweep: dict | None = None
    reserve: float | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.sweep:
            unknown = set(self.sweep) - set(SWEEP_KEYS)
            if unknown:
                raise ValueError(f"unknown sweep keys: {sorted(unknown)}")


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    types: tuple[float, ...]
    bids: tuple[float, ...]  # abstention encoded as +inf
    mode: Mode
    winner: int | None
    r_pay: float
    auction_lte: float
    auction_apo_total: float
    bench_lte: float
    bench_apo_total: float
    welfare_auction: float
    welfare_bench: float
    welfare_max: float


@dataclass(frozen=True)
class MetricsSummary:
    replications: int
    c_star: float
    mean_rho_lte: float
    hw_rho_lte: float
    mean_rho_apo: float
    hw_rho_apo: float
    mean_welfare_auction: float
    hw_welfare_auction: float
    mean_welfare_bench: float
    hw_welfare_bench: float
    mean_welfare_max: float
    hw_welfare_max: float


@dataclass(frozen=True)
class ExperimentResult:
    summary: MetricsSummary
    replications: tuple[ReplicationResult, ...]


def run_auction_replication(
    cfg: MarketConfig,
    c_star: float,
    rng: RngStream,
    types: np.ndarray | None = None,
):
    """One auction-scheme replication.

    Samples K types (unless ``types`` forces them), applies the
    equilibrium bids, resolves, and returns
    ``(lte_payoff, apo_payoffs, welfare, types, bids, outcome)``.
    """
    if types is None:
        types = cfg.dist.sample_n(rng, cfg.k)
    else:
        types = np.asarray(types, dtype=float)
    bids = bid_values(cfg, c_star, types)
    outcome = _resolve_values(bids, c_star, rng)
    lte = lte_payoff(outcome, cfg)
    apo = realized_apo_payoffs(outcome, types, cfg)
    welfare = lte + float(apo.sum())
    return lte, apo, welfare, types, bids, outcome


def run_benchmark_replication(cfg: MarketConfig, types, rng: RngStream):
    """One benchmark replication: the buyer coexists on a uniformly
    chosen channel. Returns ``(lte_payoff, apo_payoffs, welfare,
    channel)``."""
    types = np.asarray(types, dtype=float)
    channel = rng.pick(cfg.k)
    lte = cfg.delta_lte * cfg.r_lte
    apo = types.copy()
    apo[channel] *= cfg.eta_apo
    welfare = lte + float(apo.sum())
    return lte, apo, welfare, channel


def social_welfare_max(cfg: MarketConfig, types) -> float:
    """Centralized welfare upper bound for one type realization.

    Best of: (i) all channels to the sellers, (ii) idling one seller so
    the buyer transmits interference-free, (iii) the buyer sharing one
    seller's channel.
    """
    types = np.asarray(types, dtype=float)
    total = float(types.sum())
    best = total
    for k in range(len(types)):
        others = total - float(types[k])
        best = max(best, cfg.r_lte + others)
        best = max(best, cfg.delta_lte * cfg.r_lte + cfg.eta_apo * float(types[k]) + others)
    return best


def _run_replication(cfg: MarketConfig, c_star: float, rep: int, master_seed: int) -> ReplicationResult:
    rng = RngStream(master_seed, rep)
    a_lte, a_apo, w_a, types, bids, outcome = run_auction_replication(cfg, c_star, rng)
    b_lte, b_apo, w_b, _ = run_benchmark_replication(cfg, types, rng)
    w_max = social_welfare_max(cfg, types)
    return ReplicationResult(
        rep=rep,
        types=tuple(float(t) for t in types),
        bids=tuple(float(b) for b in bids),
        mode=outcome.mode,
        winner=outcome.winner,
        r_pay=outcome.r_pay,
        auction_lte=a_lte,
        auction_apo_total=float(a_apo.sum()),
        bench_lte=b_lte,
        bench_apo_total=float(b_apo.sum()),
        welfare_auction=w_a,
        welfare_bench=w_b,
        welfare_max=w_max,
    )


def _run_block(args) -> list[ReplicationResult]:
    cfg, c_star, start, stop, master_seed = args
    return [_run_replication(cfg, c_star, rep, master_seed) for rep in range(start, stop)]


def _half_width(values: np.ndarray) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / np.sqrt(n))


def summarize(reps, c_star: float) -> MetricsSummary:
    """Aggregate per-replication gains; ratios are averaged after being
    formed per replication."""
    a_lte = np.array([r.auction_lte for r in reps])
    b_lte = np.array([r.bench_lte for r in reps])
    a_apo = np.array([r.auction_apo_total for r in reps])
    b_apo = np.array([r.bench_apo_total for r in reps])
    w_a = np.array([r.welfare_auction for r in reps])
    w_b = np.array([r.welfare_bench for r in reps])
    w_m = np.array([r.welfare_max for r in reps])
    rho_lte = (a_lte - b_lte) / b_lte
    rho_apo = (a_apo - b_apo) / b_apo
    return MetricsSummary(
        replications=len(reps),
        c_star=c_star,
        mean_rho_lte=float(rho_lte.mean()),
        hw_rho_lte=_half_width(rho_lte),
        mean_rho_apo=float(rho_apo.mean()),
        hw_rho_apo=_half_width(rho_apo),
        mean_welfare_auction=float(w_a.mean()),
        hw_welfare_auction=_half_width(w_a),
        mean_welfare_bench=float(w_b.mean()),
        hw_welfare_bench=_half_width(w_b),
        mean_welfare_max=float(w_m.mean()),
        hw_welfare_max=_half_width(w_m),
    )


def run_experiment(xcfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run all replications and aggregate.

    The optimal reserve is computed once up front. Deterministic for a
    fixed master seed regardless of ``workers``.
    """
    cfg = xcfg.market
    c_star = xcfg.reserve if xcfg.reserve is not None else optimize_reserve(cfg).c_star
    n = xcfg.replications
    if workers <= 1:
        reps = _run_block((cfg, c_star, 0, n, xcfg.master_seed))
    else:
        block = max(1, -(-n // workers))
        blocks = [
            (cfg, c_star, start, min(start + block, n), xcfg.master_seed)
            for start in range(0, n, block)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_block, blocks))
        reps = [r for chunk in chunks for r in chunk]
    return ExperimentResult(summarize(reps, c_star), tuple(reps))


def sweep_cells(xcfg: ExperimentConfig) -> list[ExperimentConfig]:
    """Expand the cartesian sweep grid into per-cell configs."""
    if not xcfg.sweep:
        return [xcfg]
    keys = [k for k in SWEEP_KEYS if k in xcfg.sweep]
    cells = []
    for combo in itertools.product(*(xcfg.sweep[k] for k in keys)):
        overrides = dict(zip(keys, combo))
        market = replace(xcfg.market, **overrides)
        cells.append(replace(xcfg, market=market, sweep=None))
    return cells


def run_sweep(xcfg: ExperimentConfig, workers: int = 1) -> list[tuple[MarketConfig, ExperimentResult]]:
    return [(cell.market, run_experiment(cell, workers)) for cell in sweep_cells(xcfg)]
