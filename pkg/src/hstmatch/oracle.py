"""Exact offline optimum, turning-point cost decomposition, and bound formulas.

The assignment oracle provides the ratio denominators; the turning-point
profile recovers the optimal cost on a tree combinatorially, and the bound
functions evaluate the harmonic and geometric envelopes that the Monte
Carlo suite tests the randomized matcher against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.optimize import linear_sum_assignment

from .hst import HstTree
from .metric import Instance

__all__ = [
    "harmonic",
    "uniform_bound",
    "OptimalMatching",
    "optimal_matching",
    "TurningPointProfile",
    "turning_point_tau",
    "hst_cost_from_tau",
    "BoundParams",
    "bound_rwgm_hst",
    "expected_moves_bound",
]


@lru_cache(maxsize=None)
def _harmonic_positive(m: int) -> float:
    return math.fsum(1.0 / k for k in range(1, m + 1))


def harmonic(m: int) -> float:
    """m-th harmonic number 1 + 1/2 + ... + 1/m, with value 0 for m <= 0."""
    if m <= 0:
        return 0.0
    return _harmonic_positive(int(m))


def uniform_bound(q: int, delta: int) -> float:
    """Expected-cost envelope H_q + H_{q-1} + ... + H_{q-delta+1}.

    Bounds the mean number of cross-leaf moves on a height-1 tree holding q
    servers when delta requests arrive at server-free leaves.
    """
    if delta < 0 or delta > q:
        raise ValueError(f"delta must satisfy 0 <= delta <= q, got q={q}, delta={delta}")
    return math.fsum(harmonic(q - j) for j in range(delta))


@dataclass(frozen=True)
class OptimalMatching:
    """A minimum-cost perfect matching: (server instance, request index) pairs."""

    pairs: tuple
    cost: float


def optimal_matching(inst: Instance) -> OptimalMatching:
    """Exact minimum-cost matching of server instances to requests.

    Multiset points are expanded into individual instances and the n x n
    distance matrix is solved exactly; the cost is the offline optimum used
    as the competitive-ratio denominator.
    """
    if len(inst.servers) != len(inst.requests):
        raise ValueError("server and request multisets must have equal size")
    srv = np.asarray(inst.servers, dtype=int)
    req = np.asarray(inst.requests, dtype=int)
    cost = inst.metric.dist[np.ix_(srv, req)]
    rows, cols = linear_sum_assignment(cost)
    order = np.argsort(cols)
    pairs = tuple((int(rows[i]), int(cols[i])) for i in order)
    return OptimalMatching(pairs=pairs, cost=float(cost[rows, cols].sum()))


@dataclass(frozen=True)
class TurningPointProfile:
    """Per-node pair counts tau(u) and node heights for one tree instance.

    tau(u) counts the matched pairs whose tree path peaks at u; it is the
    same for every optimal matching, so it is computed directly from the
    per-subtree imbalance between requests and servers.
    """

    tau: dict
    heights: dict
    lam: float
    scale: float


def turning_point_tau(
    t: HstTree,
    request_count: Mapping,
    server_count: Mapping | None = None,
) -> TurningPointProfile:
    """Turning-point counts from leaf tallies of requests and servers.

    For each node v let b(v) be requests minus servers inside v's subtree;
    any optimal matching sends exactly |b(v)| pairs across the edge above v,
    so tau(u) = (sum of |b(child)| - |b(u)|) / 2 at every internal node.
    """
    if server_count is None:
        server_count = t.leaf_multiplicity
    n = t.n_nodes
    b = [0] * n
    for leaf in t.leaves:
        b[leaf] = int(request_count.get(leaf, 0)) - int(server_count.get(leaf, 0))
    for v in range(n - 1, 0, -1):
        b[t.parent[v]] += b[v]
    if b[t.root] != 0:
        raise ValueError("request and server totals differ")
    tau = {}
    heights = {}
    for v in range(n):
        heights[v] = t.level[v]
        if t.is_leaf(v):
            tau[v] = 0
            continue
        spread = sum(abs(b[c]) for c in t.children[v]) - abs(b[v])
        if spread < 0 or spread % 2:
            raise AssertionError(f"imbalance bookkeeping broke at node {v}")
        tau[v] = spread // 2
    return TurningPointProfile(tau=tau, heights=heights, lam=t.lam, scale=t.scale)


def _check_profile_tree(profile: TurningPointProfile, t: HstTree) -> None:
    if profile.lam != t.lam or profile.scale != t.scale:
        raise ValueError("profile was computed for a different tree")


def hst_cost_from_tau(profile: TurningPointProfile, t: HstTree) -> float:
    """Optimal matching cost on the tree: scale * 2 * sum tau(u) * path weights."""
    _check_profile_tree(profile, t)
    csum = _power_prefix(t.lam, t.height, shift=-1)
    total = 0.0
    for u, tau in profile.tau.items():
        if tau:
            total += tau * csum[profile.heights[u]]
    return t.scale * 2.0 * total


def _power_prefix(base: float, height: int, shift: int) -> list:
    """Prefix sums of base**(i+shift) for i = 1..height; index by height."""
    out = [0.0]
    acc = 0.0
    for i in range(1, height + 1):
        acc += base ** (i + shift)
        out.append(acc)
    return out


@dataclass(frozen=True)
class BoundParams:
    """Coefficients of the expected-cost envelope on a tree.

    The sequence c starts at 1/2 and adds (1/2)**t at step t, so it
    increases toward (but never reaches) one.
    """

    lam: float
    n: int
    c: tuple

    @classmethod
    def for_height(cls, lam: float, n: int, height: int) -> "BoundParams":
        coeffs = []
        acc = 0.0
        for t in range(1, height + 1):
            acc += 0.5**t
            coeffs.append(acc)
        return cls(lam=lam, n=n, c=tuple(coeffs))


def bound_rwgm_hst(profile: TurningPointProfile, params: BoundParams) -> float:
    """Envelope for the matcher's expected cost: scale * 2 * sum tau(u) * sum c_i lam^i."""
    if abs(params.lam - profile.lam) > 1e-12 * max(1.0, abs(profile.lam)):
        raise ValueError("params.lam must match the tree's lam")
    max_h = max((profile.heights[u] for u, tau in profile.tau.items() if tau), default=0)
    if max_h > len(params.c):
        raise ValueError(f"need coefficients up to height {max_h}, got {len(params.c)}")
    prefix = [0.0]
    acc = 0.0
    for i in range(1, max_h + 1):
        acc += params.c[i - 1] * params.lam**i
        prefix.append(acc)
    total = 0.0
    for u, tau in profile.tau.items():
        if tau:
            total += tau * prefix[profile.heights[u]]
    return profile.scale * 2.0 * total


def expected_moves_bound(profile: TurningPointProfile, n: int) -> float:
    """Envelope for the expected number of cross-leaf moves.

    Evaluates sum over nodes of tau(u) * sum_{i=1..h(u)} (1 + ln n)^i; the
    move count of an episode is the number of requests served away from
    their own leaf.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    base = 1.0 + math.log(n)
    max_h = max((profile.heights[u] for u, tau in profile.tau.items() if tau), default=0)
    prefix = _power_prefix(base, max_h, shift=0)
    total = 0.0
    for u, tau in profile.tau.items():
        if tau:
            total += tau * prefix[profile.heights[u]]
    return total
