"""Small hand-made and seeded random networks used by tests, demos and the CLI."""

from __future__ import annotations

import numpy as np

from .flowcore import INF, FlowNetwork
from .mot_graph import Detection, GraphParams, TrackingGraph, build_graph


def single_path(caps=((0.5, 0.2),)) -> FlowNetwork:
    """s -> n1 -> ... -> t with finite capacities on the inner edges.

    With one capacity the chain is s->a->t and both edges carry it.
    """
    if len(caps) == 1:
        return FlowNetwork({("s", "a"): caps[0], ("a", "t"): caps[0]}, k=len(caps[0]), d=1)
    nodes = [f"n{i}" for i in range(len(caps) + 1)]
    edges = {("s", nodes[0]): INF, (nodes[-1], "t"): INF}
    for (a, b), c in zip(zip(nodes, nodes[1:]), caps):
        edges[(a, b)] = c
    return FlowNetwork(edges, k=len(caps[0]), d=1)


def two_paths(cap_a=(1.0, 0.0), cap_b=(0.0, 1.0), d: int = 2) -> FlowNetwork:
    """Two parallel s->x->t paths with no edge between a and b."""
    edges = {("s", "a"): cap_a, ("a", "t"): INF, ("s", "b"): cap_b, ("b", "t"): INF}
    return FlowNetwork(edges, k=len(cap_a), d=d)


def random_tracking_instance(rng: np.random.Generator, *, max_dets: int = 10, max_k: int = 4,
                             max_d: int = 3, max_frames: int = 5, dt: int | None = None,
                             edge_prob: float = 0.7, min_dets: int = 1) -> TrackingGraph:
    """Random layered tracking graph with random transition subsets.

    Detections are spread over a few frames; each transition inside the skip
    window is kept with probability ``edge_prob``.  ``d`` is at least the size
    of the busiest frame (capped at ``max_d``), so most draws are feasible.
    """
    n = int(rng.integers(min_dets, max_dets + 1))
    k = int(rng.integers(1, max_k + 1))
    n_frames = int(rng.integers(1, max_frames + 1))
    dt = int(rng.integers(1, 4)) if dt is None else dt
    frames = np.sort(rng.integers(1, n_frames + 1, size=n))
    feats = rng.random((n, k)).round(3)
    dets = [Detection(int(f), i, (10.0 * i, 0.0, 5.0, 5.0), tuple(feats[i]))
            for i, f in enumerate(frames)]
    # d below the busiest frame's size is always infeasible; draw from what can work
    busiest = int(np.bincount(frames).max())
    d = int(rng.integers(min(busiest, max_d, n), min(max_d, n) + 1))
    graph = build_graph(dets, GraphParams(d=d, dt=dt))
    drop = [e for e, role in sorted(graph.roles.items())
            if role == "transition" and rng.random() > edge_prob]
    if drop:
        roles = {e: r for e, r in graph.roles.items() if e not in set(drop)}
        graph = TrackingGraph(graph.net.without_edges(drop), roles, graph.detections,
                              graph.entry, graph.exit, graph.dt)
    return graph


def crossing_pair(f1a=(1.0, 0.0), f1b=(0.0, 1.0), f2a=(0.9, 0.0), f2b=(0.0, 0.9)) -> TrackingGraph:
    """Two frames with two detections each, all transitions present, d=2."""
    dets = [Detection(1, 1, (0, 0, 10, 10), f1a, gt_id=1),
            Detection(1, 2, (100, 0, 10, 10), f1b, gt_id=2),
            Detection(2, 3, (0, 0, 10, 10), f2a, gt_id=1),
            Detection(2, 4, (100, 0, 10, 10), f2b, gt_id=2)]
    return build_graph(dets, GraphParams(d=2, dt=1))
