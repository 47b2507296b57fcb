"""Auction variant with several buyers in the system.

One buyer (provider 0) runs the auction. Sellers split into two
populations: ``shared`` sellers already coexist with another buyer on
their channel, ``alone`` sellers occupy a channel by themselves. A
shared seller's raw bid is normalized into a virtual bid by adding the
buyer's interference loss ``(1-theta) * R`` so that bids from the two
populations are comparable; alone sellers' bids pass through
unchanged. Resolution runs on virtual bids; the winner's allocated
rate subtracts the normalization again when the winner is shared.

Competition never touches a shared seller's channel: the fallback
coexistence channel is drawn uniformly among the alone sellers only.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .auction import Mode
from .distributions import TypeDistribution
from .equilibrium import (
    ABSTAIN_VALUE,
    Bid,
    MarketConfig,
    bid_values,
    bid as single_bid,
)
from .errors import InfeasibleBid, InvalidProfile, NonUnimodalCurve
from .numerics import golden_section_max, has_interior_dip
from .provider import OptimalReserve
from .rng import RngStream

GUARD_POINTS = 200
FALLBACK_GRID_POINTS = 400
MC_SAMPLES = 100_000


class Origin(Enum):
    SHARED = "S"
    ALONE = "A"


@dataclass(frozen=True)
class MultiMarketConfig:
    """Two seller populations plus the buyer-on-buyer discount
    ``theta_lte`` applied when provider 0 shares a channel with another
    buyer."""

    k_s: int
    k_a: int
    dist: TypeDistribution
    eta_apo: float
    delta_lte: float
    theta_lte: float
    r_lte: float

    def __post_init__(self):
        if self.k_s < 2 or self.k_a < 2:
            raise ValueError("need k_s >= 2 and k_a >= 2")
        for name in ("eta_apo", "delta_lte", "theta_lte"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.r_lte > 0.0:
            raise ValueError("r_lte must be positive")

    @property
    def shared_offset(self) -> float:
        """(1-theta) * R: the buyer's rate loss on a shared channel,
        added to shared sellers' bids during normalization."""
        return (1.0 - self.theta_lte) * self.r_lte

    def alone_market(self) -> MarketConfig:
        """Single-buyer market over the alone sellers only; their
        equilibrium is the single-buyer one with k = k_a."""
        return MarketConfig(
            k=self.k_a,
            dist=self.dist,
            eta_apo=self.eta_apo,
            delta_lte=self.delta_lte,
            r_lte=self.r_lte,
        )


@dataclass(frozen=True)
class VirtualBid:
    """Normalized bid with the population it came from."""

    rate: float | None
    origin: Origin

    @property
    def is_abstain(self) -> bool:
        return self.rate is None


@dataclass(frozen=True)
class MultiAuctionOutcome:
    mode: Mode
    winner: int | None
    winner_origin: Origin | None
    channel: int
    r_pay: float
    virtual_price: float


def virtual_bid(raw: Bid, origin: Origin, cfg: MultiMarketConfig, c: float) -> VirtualBid:
    """Normalize a raw bid.

    Shared-origin numeric bids must not exceed ``c - (1-theta) R``;
    alone-origin bids must not exceed ``c``.
    """
    if raw.is_abstain:
        return VirtualBid(None, origin)
    if origin is Origin.SHARED:
        cap = c - cfg.shared_offset
        if raw.rate > cap:
            raise InfeasibleBid(f"shared bid {raw.rate} exceeds cap {cap}")
        return VirtualBid(raw.rate + cfg.shared_offset, origin)
    if raw.rate > c:
        raise InfeasibleBid(f"bid {raw.rate} exceeds reserve {c}")
    return VirtualBid(raw.rate, origin)


def shared_participation_cutoff(cfg: MultiMarketConfig, c: float) -> float:
    """Type above which a shared seller abstains: the type whose
    discounted rate equals the best payment it could receive."""
    return (c - cfg.shared_offset) / cfg.eta_apo


def bid_shared(cfg: MultiMarketConfig, c: float, r: float) -> VirtualBid:
    """Equilibrium virtual bid of a shared seller: its discounted rate
    plus the normalization offset, or abstention above the cutoff."""
    if r <= shared_participation_cutoff(cfg, c):
        return VirtualBid(cfg.eta_apo * r + cfg.shared_offset, Origin.SHARED)
    return VirtualBid(None, Origin.SHARED)


def bid_alone(cfg: MultiMarketConfig, c: float, r: float) -> VirtualBid:
    """Equilibrium virtual bid of an alone seller: the single-buyer
    equilibrium over the k_a alone sellers."""
    b = single_bid(cfg.alone_market(), c, r)
    return VirtualBid(b.rate, Origin.ALONE)


def bid_values_shared(cfg: MultiMarketConfig, c: float, types: np.ndarray) -> np.ndarray:
    types = np.asarray(types, dtype=float)
    cutoff = shared_participation_cutoff(cfg, c)
    return np.where(
        types <= cutoff, cfg.eta_apo * types + cfg.shared_offset, ABSTAIN_VALUE
    )


def bid_values_alone(cfg: MultiMarketConfig, c: float, types: np.ndarray) -> np.ndarray:
    return bid_values(cfg.alone_market(), c, types)


def _resolve_virtual_values(
    values: np.ndarray, k_s: int, cfg: MultiMarketConfig, c: float, rng: RngStream
) -> MultiAuctionOutcome:
    """Array-level resolution; the first ``k_s`` columns are shared
    sellers. Tie-breaks and the competition channel pick consume exactly
    one draw each."""
    finite = values[np.isfinite(values)]
    if finite.size and finite.max() > c:
        raise InvalidProfile("virtual bids must not exceed the reserve rate")
    k_total = len(values)
    m = values.min()
    if math.isinf(m):
        channel = k_s + rng.pick(k_total - k_s)
        return MultiAuctionOutcome(Mode.COMPETITION, None, None, channel, 0.0, 0.0)
    tied = np.nonzero(values == m)[0]
    if len(tied) == 1:
        winner = int(tied[0])
        others = np.delete(values, winner)
        price = min(c, float(others.min()))
    else:
        winner = int(tied[rng.pick(len(tied))])
        price = float(m)
    origin = Origin.SHARED if winner < k_s else Origin.ALONE
    r_pay = price - cfg.shared_offset if origin is Origin.SHARED else price
    return MultiAuctionOutcome(Mode.COOPERATION, winner, origin, winner, r_pay, price)


def resolve_multi(
    vbids: list[VirtualBid], cfg: MultiMarketConfig, c: float, rng: RngStream
) -> MultiAuctionOutcome:
    """Resolve one multi-buyer auction from virtual bids (shared sellers
    first, then alone sellers, matching ``vbids`` origins)."""
    k_s = sum(1 for b in vbids if b.origin is Origin.SHARED)
    for i, b in enumerate(vbids):
        expected = Origin.SHARED if i < k_s else Origin.ALONE
        if b.origin is not expected:
            raise InvalidProfile("virtual bids must list shared sellers first")
    values = np.array(
        [ABSTAIN_VALUE if b.is_abstain else b.rate for b in vbids], dtype=float
    )
    return _resolve_virtual_values(values, k_s, cfg, c, rng)


def lte_payoff_multi(outcome: MultiAuctionOutcome, cfg: MultiMarketConfig) -> float:
    """Provider 0's rate. Under cooperation this equals the throughput
    minus the second virtual price for either winner origin: for a
    shared winner, theta*R minus the adjusted payment telescopes to the
    same quantity."""
    if outcome.mode is Mode.COOPERATION:
        return cfg.r_lte - outcome.virtual_price
    return cfg.delta_lte * cfg.r_lte


def apo_payoffs_multi(
    outcome: MultiAuctionOutcome, types, cfg: MultiMarketConfig
) -> np.ndarray:
    """Per-seller rates (shared sellers first).

    A shared non-winner keeps only its discounted rate (its own channel
    stays shared with another buyer); an alone non-winner keeps its full
    rate unless competition lands on its channel.
    """
    types = np.asarray(types, dtype=float)
    out = types.copy()
    out[: cfg.k_s] *= cfg.eta_apo
    if outcome.mode is Mode.COOPERATION:
        out[outcome.winner] = outcome.r_pay
    else:
        out[outcome.channel] = cfg.eta_apo * types[outcome.channel]
    return out


# ---------------------------------------------------------------------------
# Expected payoff and reserve optimization (Monte Carlo; no closed form)
# ---------------------------------------------------------------------------


def _virtual_price_per_row(
    cfg: MultiMarketConfig, c: float, types_s: np.ndarray, types_a: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(cooperation mask, second virtual price) per sampled type row."""
    vals = np.concatenate(
        [bid_values_shared(cfg, c, types_s), bid_values_alone(cfg, c, types_a)],
        axis=1,
    )
    m = vals.min(axis=1)
    second = np.partition(vals, 1, axis=1)[:, 1]
    coop = np.isfinite(m)
    return coop, np.where(coop, np.minimum(c, second), 0.0)


def _lte_payoffs_for_pool(
    cfg: MultiMarketConfig, c: float, types_s: np.ndarray, types_a: np.ndarray
) -> np.ndarray:
    coop, price = _virtual_price_per_row(cfg, c, types_s, types_a)
    return np.where(coop, cfg.r_lte - price, cfg.delta_lte * cfg.r_lte)


@lru_cache(maxsize=8)
def _type_pool(dist: TypeDistribution, k_s: int, k_a: int, n: int, seed: int):
    """Antithetic type pool shared across reserve rates (common random
    numbers keep the Monte Carlo payoff curve smooth in c)."""
    rng = RngStream(seed, 0)
    half = n // 2
    u = rng.uniforms(half, k_s + k_a)
    u = np.concatenate([u, 1.0 - u], axis=0)
    types = np.asarray(dist.inverse_cdf(u), dtype=float)
    return types[:, :k_s], types[:, k_s:]


def expected_payoff_multi(
    cfg: MultiMarketConfig,
    c: float,
    *,
    n: int = MC_SAMPLES,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of provider 0's
    expected payoff at reserve ``c``; antithetic pairing over one pooled
    draw set per (n, seed)."""
    types_s, types_a = _type_pool(cfg.dist, cfg.k_s, cfg.k_a, n, seed)
    pay = _lte_payoffs_for_pool(cfg, c, types_s, types_a)
    half = len(pay) // 2
    pairs = 0.5 * (pay[:half] + pay[half:])
    se = float(pairs.std(ddof=1) / math.sqrt(half)) if half > 1 else 0.0
    return float(pay.mean()), se


def feasible_reserve_bounds(cfg: MultiMarketConfig) -> tuple[float, float]:
    """Search interval for the reserve: below the lower bound every
    seller abstains; above the upper bound either the capacity
    constraint binds or every bid function has saturated, so the payoff
    is constant."""
    alone_floor = cfg.alone_market().low_regime_cap
    shared_floor = cfg.shared_offset + cfg.eta_apo * cfg.dist.r_min
    lo = min(alone_floor, shared_floor)
    saturation = max(cfg.dist.r_max, cfg.shared_offset + cfg.eta_apo * cfg.dist.r_max)
    hi = min(cfg.r_lte, saturation)
    return lo, hi


def optimize_reserve_multi(
    cfg: MultiMarketConfig,
    *,
    n: int = MC_SAMPLES,
    seed: int = 0,
    guard_points: int = GUARD_POINTS,
    strict_unimodal: bool = False,
) -> OptimalReserve:
    """Reserve optimization on the Monte Carlo payoff curve.

    A coarse scan guards the curve's observed unimodality with a
    noise-adjusted tolerance before golden section runs; a failed guard
    falls back to the scan's fine grid (or raises when
    ``strict_unimodal``). A final local grid polish sharpens the golden
    section bracket against residual Monte Carlo jitter.
    """
    lo, hi = feasible_reserve_bounds(cfg)
    baseline = cfg.delta_lte * cfg.r_lte
    if hi <= lo:
        return OptimalReserve(0.0, baseline, 1, (0.0, lo))

    def payoff(c: float) -> float:
        return expected_payoff_multi(cfg, c, n=n, seed=seed)[0]

    grid = np.linspace(lo, hi, guard_points)
    means = []
    ses = []
    for c in grid:
        m, se = expected_payoff_multi(cfg, float(c), n=n, seed=seed)
        means.append(m)
        ses.append(se)
    noise_tol = 1e-4 * cfg.r_lte + 6.0 * float(np.median(ses))
    if has_interior_dip(means, noise_tol):
        if strict_unimodal:
            raise NonUnimodalCurve("Monte Carlo payoff curve failed the unimodality guard")
        fine = np.linspace(lo, hi, FALLBACK_GRID_POINTS)
        fine_vals = [payoff(float(c)) for c in fine]
        best = int(np.argmax(fine_vals))
        c_star, best_val = float(fine[best]), float(fine_vals[best])
    else:
        width = 1e-3 * cfg.dist.r_max
        c_star, best_val = golden_section_max(payoff, lo, hi, width_tol=width)
        polish = np.linspace(
            max(lo, c_star - 5 * width), min(hi, c_star + 5 * width), 11
        )
        for c in polish:
            v = payoff(float(c))
            if v > best_val:
                c_star, best_val = float(c), v
    if baseline >= best_val:
        return OptimalReserve(0.0, baseline, 1, (0.0, lo))
    case = 2 if cfg.r_lte <= cfg.dist.r_max else 3
    return OptimalReserve(c_star, best_val, case)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiExperimentConfig:
    """Experiment setup; ``reserve`` forces a fixed reserve rate instead
    of optimizing (useful for studying off-optimum play)."""

    market: MultiMarketConfig
    replications: int = 5000
    master_seed: int = 0
    reserve: float | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class MultiReplicationResult:
    rep: int
    types: tuple[float, ...]
    bids: tuple[float, ...]  # virtual bids, abstention as +inf
    mode: Mode
    winner: int | None
    winner_origin: Origin | None
    r_pay: float
    virtual_price: float
    auction_lte: float
    auction_apo_total: float
    bench_lte: float
    bench_apo_total: float
    welfare_auction: float
    welfare_bench: float
    # |theta*R - r_pay - (R - virtual_price)| for shared winners, else 0
    identity_residual: float


@dataclass(frozen=True)
class MultiMetricsSummary:
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
    shared_wins: int
    max_identity_residual: float


@dataclass(frozen=True)
class MultiExperimentResult:
    summary: MultiMetricsSummary
    replications: tuple[MultiReplicationResult, ...]


def run_auction_replication_multi(
    cfg: MultiMarketConfig,
    c_star: float,
    rng: RngStream,
    types: np.ndarray | None = None,
):
    """One auction replication: sample shared then alone types (unless
    forced), bid, resolve. Returns ``(lte, apo_payoffs, welfare, types,
    virtual_values, outcome)``."""
    if types is None:
        types = cfg.dist.sample_n(rng, cfg.k_s + cfg.k_a)
    else:
        types = np.asarray(types, dtype=float)
    vals = np.concatenate(
        [
            bid_values_shared(cfg, c_star, types[: cfg.k_s]),
            bid_values_alone(cfg, c_star, types[cfg.k_s :]),
        ]
    )
    outcome = _resolve_virtual_values(vals, cfg.k_s, cfg, c_star, rng)
    lte = lte_payoff_multi(outcome, cfg)
    apo = apo_payoffs_multi(outcome, types, cfg)
    return lte, apo, lte + float(apo.sum()), types, vals, outcome


def run_benchmark_replication_multi(cfg: MultiMarketConfig, types, rng: RngStream):
    """Benchmark: provider 0 coexists on a uniformly chosen alone
    seller's channel; shared sellers keep their discounted rates."""
    types = np.asarray(types, dtype=float)
    channel = cfg.k_s + rng.pick(cfg.k_a)
    lte = cfg.delta_lte * cfg.r_lte
    apo = types.copy()
    apo[: cfg.k_s] *= cfg.eta_apo
    apo[channel] = cfg.eta_apo * types[channel]
    return lte, apo, lte + float(apo.sum()), channel


def _run_replication_multi(
    cfg: MultiMarketConfig, c_star: float, rep: int, master_seed: int
) -> MultiReplicationResult:
    rng = RngStream(master_seed, rep)
    a_lte, a_apo, w_a, types, vals, outcome = run_auction_replication_multi(
        cfg, c_star, rng
    )
    b_lte, b_apo, w_b, _ = run_benchmark_replication_multi(cfg, types, rng)
    residual = 0.0
    if outcome.winner_origin is Origin.SHARED:
        residual = abs(
            cfg.theta_lte * cfg.r_lte
            - outcome.r_pay
            - (cfg.r_lte - outcome.virtual_price)
        )
    return MultiReplicationResult(
        rep=rep,
        types=tuple(float(t) for t in types),
        bids=tuple(float(v) for v in vals),
        mode=outcome.mode,
        winner=outcome.winner,
        winner_origin=outcome.winner_origin,
        r_pay=outcome.r_pay,
        virtual_price=outcome.virtual_price,
        auction_lte=a_lte,
        auction_apo_total=float(a_apo.sum()),
        bench_lte=b_lte,
        bench_apo_total=float(b_apo.sum()),
        welfare_auction=w_a,
        welfare_bench=w_b,
        identity_residual=residual,
    )


def _run_block_multi(args) -> list[MultiReplicationResult]:
    cfg, c_star, start, stop, master_seed = args
    return [
        _run_replication_multi(cfg, c_star, rep, master_seed)
        for rep in range(start, stop)
    ]


def _half_width(values: np.ndarray) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / np.sqrt(n))


def summarize_multi(reps, c_star: float) -> MultiMetricsSummary:
    a_lte = np.array([r.auction_lte for r in reps])
    b_lte = np.array([r.bench_lte for r in reps])
    a_apo = np.array([r.auction_apo_total for r in reps])
    b_apo = np.array([r.bench_apo_total for r in reps])
    w_a = np.array([r.welfare_auction for r in reps])
    w_b = np.array([r.welfare_bench for r in reps])
    rho_lte = (a_lte - b_lte) / b_lte
    rho_apo = (a_apo - b_apo) / b_apo
    shared_wins = sum(1 for r in reps if r.winner_origin is Origin.SHARED)
    return MultiMetricsSummary(
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
        shared_wins=shared_wins,
        max_identity_residual=float(max((r.identity_residual for r in reps), default=0.0)),
    )


def run_experiment_multi(
    xcfg: MultiExperimentConfig, workers: int = 1
) -> MultiExperimentResult:
    """Run all multi-buyer replications; deterministic for a fixed
    master seed regardless of ``workers``."""
    cfg = xcfg.market
    c_star = xcfg.reserve if xcfg.reserve is not None else optimize_reserve_multi(cfg).c_star
    n = xcfg.replications
    if workers <= 1:
        reps = _run_block_multi((cfg, c_star, 0, n, xcfg.master_seed))
    else:
        block = max(1, -(-n // workers))
        blocks = [
            (cfg, c_star, start, min(start + block, n), xcfg.master_seed)
            for start in range(0, n, block)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_block_multi, blocks))
        reps = [r for chunk in chunks for r in chunk]
    return MultiExperimentResult(summarize_multi(reps, c_star), tuple(reps))
