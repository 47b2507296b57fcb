"""Bundled experiment presets.

Each preset is a complete run configuration keyed by a short scenario
id, so the standard parameterizations run as one-liners, e.g.
``spectrum-auction optimize --preset appendixK``. Desk-scale runs can
override the bundled full-scale replication counts with
``--replications``.
"""
from __future__ import annotations

import copy

_TRUNC_NORMAL = {
    "kind": "truncated_normal",
    "r_min": 50.0,
    "r_max": 200.0,
    "mu": 125.0,
    "sigma": 50.0,
}


def _market(k=4, eta=0.3, delta=0.4, r_lte=95.0):
    return {
        "k": k,
        "eta_apo": eta,
        "delta_lte": delta,
        "r_lte": r_lte,
        "dist": copy.deepcopy(_TRUNC_NORMAL),
    }


def _multi_market(k_s, k_a, eta=0.3, delta=0.4, theta=0.5, r_lte=200.0):
    return {
        "k_s": k_s,
        "k_a": k_a,
        "eta_apo": eta,
        "delta_lte": delta,
        "theta_lte": theta,
        "r_lte": r_lte,
        "dist": copy.deepcopy(_TRUNC_NORMAL),
    }


PRESETS: dict[str, dict] = {
    # Expected-payoff curve example (two sellers, large throughput).
    "fig4": {
        "market": _market(k=2, r_lte=300.0),
        "c_min": 40.0,
        "c_max": 200.0,
        "steps": 200,
    },
    # Optimal reserve against the seller count.
    "fig5": {
        "market": _market(r_lte=95.0),
        "sweep": {"k": [2, 3, 4, 5, 6, 7]},
        "replications": 20000,
    },
    # Optimal reserve against the buyer throughput.
    "fig6": {
        "market": _market(r_lte=150.0),
        "sweep": {"r_lte": [10, 30, 50, 70, 90, 110, 130, 150, 170, 190, 210, 230, 250]},
        "replications": 20000,
    },
    # Buyer payoff at the optimum against the seller count.
    "fig7": {
        "market": _market(r_lte=240.0),
        "sweep": {"k": [2, 3, 4, 5, 6, 7], "r_lte": [220, 240, 260]},
        "replications": 20000,
    },
    # Relative buyer gain over the coexistence benchmark.
    "fig8": {
        "market": _market(r_lte=370.0),
        "sweep": {"r_lte": [30, 100, 190, 280, 370]},
        "replications": 20000,
    },
    # Relative seller gain over the coexistence benchmark.
    "fig9": {
        "market": _market(r_lte=370.0),
        "sweep": {"r_lte": [30, 100, 190, 280, 370]},
        "replications": 20000,
    },
    # Welfare comparison against the centralized upper bound.
    "fig10": {
        "market": _market(r_lte=370.0),
        "replications": 20000,
    },
    # Multi-buyer expected-payoff curve example.
    "fig11": {
        "multi_market": _multi_market(k_s=4, k_a=2, r_lte=200.0),
        "c_min": 35.0,
        "c_max": 200.0,
        "steps": 200,
    },
    # Multi-buyer relative gains.
    "fig12": {
        "multi_market": _multi_market(k_s=2, k_a=2, r_lte=370.0),
        "replications": 20000,
    },
    "fig13": {
        "multi_market": _multi_market(k_s=2, k_a=2, r_lte=370.0),
        "replications": 20000,
    },
    # Four-seller worked example with a small buyer throughput.
    "appendixK": {
        "market": _market(r_lte=95.0),
        "replications": 20000,
    },
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(name)
    return copy.deepcopy(PRESETS[name])
