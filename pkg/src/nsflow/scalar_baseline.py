"""Scalar comparison tracker: same cover space, additive edge costs, exact minimum.

Each transition costs ``1 - sim(feature_i, feature_j)``; entering and leaving
cost ``beta``; observation edges are free.  The search engine is the same
branch and bound used for the vector objective, so differences between the
two trackers come from scoring alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bnb import BranchAndBound, SolveResult, SolverConfig, _Structure
from .flowcore import FlowNetwork, PathCover, Solution, flow_from_paths
from .mot_graph import ENTER, EXIT, TRANSITION, TrackingGraph, TrackSet, decode
from .oracle import cover_cost

DEFAULT_BETA = 0.2
SIMILARITIES = ("cosine", "intersection")


def cosine_similarity(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, float(a @ b) / (na * nb)))


def intersection_similarity(a, b) -> float:
    """Histogram intersection, normalised by the larger mass."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    denom = max(a.sum(), b.sum())
    if denom == 0.0:
        return 0.0
    return float(np.minimum(a, b).sum() / denom)


def scalar_costs(graph: TrackingGraph, similarity: str = "cosine",
                 beta: float = DEFAULT_BETA) -> dict[tuple[str, str], float]:
    """Cost for every edge of ``graph``."""
    if similarity not in SIMILARITIES:
        raise ValueError(f"similarity must be one of {SIMILARITIES}, got {similarity!r}")
    sim = cosine_similarity if similarity == "cosine" else intersection_similarity
    feature = {}
    for det in graph.detections:
        feature[graph.exit[det.det_id]] = det.feature
        feature[graph.entry[det.det_id]] = det.feature
    costs = {}
    for (u, v), role in graph.roles.items():
        if role == TRANSITION:
            costs[(u, v)] = 1.0 - sim(feature[u], feature[v])
        elif role in (ENTER, EXIT):
            costs[(u, v)] = float(beta)
        else:
            costs[(u, v)] = 0.0
    return costs


class AdditiveScorer:
    """Engine scorer maximising the negated total edge cost."""

    def __init__(self, net: FlowNetwork, costs: Mapping[tuple[str, str], float]):
        missing = [e for e in net.edges if e not in costs]
        if missing:
            raise ValueError(f"no cost for edges {missing[:3]}")
        if any(costs[e] < 0 for e in net.edges):
            raise ValueError("edge costs must be non-negative")
        self.net = net
        self.costs = costs
        self.structure = st = _Structure(net)
        s, t = net.source, net.sink
        order = st.order
        self.enter_cost = [costs.get((s, v), math.inf) for v in order]
        self.edge_cost = {(st.pos[u], st.pos[v]): c for (u, v), c in costs.items()
                          if u != s and v != t and (u, v) in net.capacities}
        # dense tail -> head transition costs; inf where no edge
        self.trans = np.full((st.n, st.n), np.inf)
        for (i, j), c in self.edge_cost.items():
            self.trans[i, j] = c
        self.enter_col = np.array(self.enter_cost, dtype=float)
        exits = [costs[(v, t)] for v in order if (v, t) in net.capacities]
        self.exit_lb = net.d * min(exits, default=math.inf)

    def open(self, v):
        return None

    def extend(self, payload, u, v):
        return None

    def gain(self, u, v) -> float:
        return -(self.enter_cost[v] if u is None else self.edge_cost[(u, v)])

    def quick_bound(self, state) -> float:
        return state[3]

    def bound(self, pos, tracks, opened, acc) -> float:
        """Negated cost so far plus a min-cost assignment of in-edges.

        Every remaining node takes exactly one in-edge, and no two may share a
        tail (the source offers one slot per unopened track).  Relaxing the
        exit requirement leaves a rectangular assignment problem whose optimum
        bounds the remaining transition and entry costs from below.
        """
        n = self.structure.n
        if pos >= n:
            return acc - self.exit_lb
        free = self.net.d - opened
        tails = [tr.last for tr in tracks] + list(range(pos, n))
        block = self.trans[np.ix_(tails, range(pos, n))].T
        if free:
            enter = np.repeat(self.enter_col[pos:, None], free, axis=1)
            block = np.hstack([enter, block])
        if block.shape[1] < block.shape[0]:
            return -math.inf
        big = 1e9
        r, c = linear_sum_assignment(np.where(np.isfinite(block), block, big))
        picked = block[r, c]
        if not np.all(np.isfinite(picked)):
            return -math.inf
        return acc - float(picked.sum()) - self.exit_lb

    def leaf_value(self, cover: PathCover) -> float:
        return -cover_cost(self.costs, cover)

    def decode(self, cover: PathCover) -> Solution:
        return flow_from_paths(self.net, cover)


@dataclass
class ScalarResult:
    result: SolveResult
    tracks: TrackSet | None

    @property
    def cost(self) -> float | None:
        return None if self.result.value is None else -self.result.value


def solve_scalar(graph: TrackingGraph, costs: Mapping[tuple[str, str], float] | None = None,
                 d: int | None = None, cfg: SolverConfig | None = None) -> ScalarResult:
    """Minimum-cost cover with exactly ``d`` tracks over the tracking graph."""
    net = graph.net if d is None or d == graph.net.d else graph.net.with_d(d)
    costs = scalar_costs(graph) if costs is None else costs
    res = BranchAndBound(net, AdditiveScorer(net, costs), cfg).run()
    tracks = decode(graph, res.cover.paths) if res.cover is not None else None
    return ScalarResult(res, tracks)
