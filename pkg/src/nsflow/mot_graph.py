"""Tracking graphs: detections become observation edges carrying their features.

Every detection ``i`` contributes two nodes, an entry node and an exit node,
joined by an observation edge whose capacity is the detection's feature
vector.  The source feeds every entry node and every exit node drains into
the sink, so tracks may start and stop anywhere.  Transition edges link the
exit node of a detection to the entry node of every detection 1..dt frames
later.  Enter, exit and transition edges have infinite capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .flowcore import INF, Finite, FlowNetwork, Solution, StructuralError

SOURCE = "s"
SINK = "t"

OBSERVATION = "observation"
TRANSITION = "transition"
ENTER = "enter"
EXIT = "exit"


@dataclass(frozen=True)
class Detection:
    frame: int
    det_id: int
    box: tuple[float, float, float, float]  # left, top, width, height (px)
    feature: tuple[float, ...] = ()
    gt_id: int | None = None

    def __post_init__(self):
        if int(self.frame) != self.frame or self.frame < 1:
            raise StructuralError(f"frame must be a positive integer, got {self.frame!r}")
        box = tuple(float(x) for x in self.box)
        if len(box) != 4 or box[2] <= 0 or box[3] <= 0:
            raise StructuralError(f"detection {self.det_id}: box needs positive width and height")
        feat = tuple(float(x) for x in self.feature)
        if any(not math.isfinite(x) or x < 0 for x in feat):
            raise StructuralError(f"detection {self.det_id}: features must be finite and >= 0")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "feature", feat)

    @property
    def center(self) -> tuple[float, float]:
        left, top, w, h = self.box
        return left + w / 2.0, top + h / 2.0


@dataclass(frozen=True)
class GraphParams:
    d: int
    dt: int = 3
    gate: float | None = None
    batch: int | None = None

    def __post_init__(self):
        if self.dt < 1:
            raise ValueError("dt must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.gate is not None and self.gate < 0:
            raise ValueError("gate must be >= 0")
        if self.batch is not None and self.batch <= self.dt:
            raise ValueError("batch width must exceed dt")


@dataclass(frozen=True)
class TrackSet:
    """Assignment of detection ids to dense track ids ``1..n``."""

    assignment: Mapping[int, int]

    @property
    def n_tracks(self) -> int:
        return len(set(self.assignment.values()))

    def tracks(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for det, trk in sorted(self.assignment.items()):
            out.setdefault(trk, []).append(det)
        return out


@dataclass(frozen=True)
class TrackingGraph:
    net: FlowNetwork
    roles: Mapping[tuple[str, str], str]
    detections: tuple[Detection, ...]
    entry: Mapping[int, str] = field(repr=False)
    exit: Mapping[int, str] = field(repr=False)
    dt: int = 3

    def node_detection(self) -> dict[str, int]:
        return {node: det for det, node in self.entry.items()}


def canonical_order(dets: Sequence[Detection]) -> list[Detection]:
    ids = [d.det_id for d in dets]
    if len(set(ids)) != len(ids):
        raise StructuralError("detection ids must be unique")
    return sorted(dets, key=lambda d: (d.frame, d.det_id))


def build_graph(dets: Sequence[Detection], p: GraphParams) -> TrackingGraph:
    """Tracking network for ``dets``; node ids follow the (frame, id) order."""
    dets = canonical_order(dets)
    if not dets:
        raise StructuralError("no detections")
    k = len(dets[0].feature)
    if k == 0 or any(len(d.feature) != k for d in dets):
        raise StructuralError("every detection needs a feature vector of the same length")
    width = len(str(len(dets)))
    entry, exit_ = {}, {}
    edges, roles, layers = {}, {}, {}
    for n, det in enumerate(dets):
        a, b = f"d{n:0{width}d}a", f"d{n:0{width}d}b"
        entry[det.det_id], exit_[det.det_id] = a, b
        layers[a] = layers[b] = det.frame
        for e, cap, role in (((SOURCE, a), INF, ENTER), ((a, b), Finite(det.feature), OBSERVATION),
                             ((b, SINK), INF, EXIT)):
            edges[e] = cap
            roles[e] = role
    for i, di in enumerate(dets):
        for dj in dets[i + 1:]:
            gap = dj.frame - di.frame
            if gap > p.dt:
                break
            if gap >= 1:
                e = (exit_[di.det_id], entry[dj.det_id])
                edges[e] = INF
                roles[e] = TRANSITION
    net = FlowNetwork(edges, SOURCE, SINK, k=k, d=p.d, layers=layers)
    graph = TrackingGraph(net, roles, tuple(dets), entry, exit_, p.dt)
    if p.gate is not None:
        graph = prune(graph, p.gate)
    return graph


def prune(graph: TrackingGraph, gate: float) -> TrackingGraph:
    """Drop transitions whose box centres move farther than ``gate`` px per frame."""
    if gate < 0:
        raise ValueError("gate must be >= 0")
    if math.isinf(gate):
        return graph
    by_node = {graph.exit[d.det_id]: d for d in graph.detections}
    by_node.update({graph.entry[d.det_id]: d for d in graph.detections})
    removed = []
    for (u, v), role in graph.roles.items():
        if role != TRANSITION:
            continue
        a, b = by_node[u], by_node[v]
        dist = math.dist(a.center, b.center)
        # a zero gate forbids every transition, even between coincident boxes
        if gate == 0 or dist > gate * (b.frame - a.frame):
            removed.append((u, v))
    if not removed:
        return graph
    drop = set(removed)
    roles = {e: r for e, r in graph.roles.items() if e not in drop}
    return TrackingGraph(graph.net.without_edges(drop), roles, graph.detections,
                         graph.entry, graph.exit, graph.dt)


def decode(graph: TrackingGraph, sol: Solution | Sequence[Sequence[str]]) -> TrackSet:
    """Track ids (1..d, in canonical path order) from a solution's active paths."""
    paths = sol.paths if isinstance(sol, Solution) else sol
    if paths is None:
        raise StructuralError("solution carries no path cover")
    lookup = graph.node_detection()
    assignment = {}
    for trk, path in enumerate(sorted(tuple(p) for p in paths), start=1):
        for node in path:
            if node in lookup:
                assignment[lookup[node]] = trk
    return TrackSet(assignment)


def split_batches(dets: Sequence[Detection], p: GraphParams) -> list[list[Detection]]:
    """Consecutive, disjoint windows of ``p.batch`` frames; empty windows skipped."""
    dets = canonical_order(dets)
    if not dets:
        return []
    if p.batch is None:
        return [dets]
    first = dets[0].frame
    batches: dict[int, list[Detection]] = {}
    for det in dets:
        batches.setdefault((det.frame - first) // p.batch, []).append(det)
    return [batches[i] for i in sorted(batches)]


def batch_d(batch: Sequence[Detection], p: GraphParams) -> int:
    """Track count for one batch: distinct GT identities if all are known."""
    if batch and all(d.gt_id is not None for d in batch):
        return len({d.gt_id for d in batch})
    return p.d


def _cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def stitch(batches: Sequence[Sequence[Detection]], tracksets: Sequence[TrackSet]) -> TrackSet:
    """Join per-batch tracks into global tracks.

    Each track of batch m+1 is linked to a track of batch m by greedy matching
    on the cosine similarity between the earlier track's last feature and the
    later track's first feature, taken in descending order.  Unmatched tracks
    get fresh ids.  This is a heuristic with no optimality guarantee.
    """
    if len(batches) != len(tracksets):
        raise ValueError("one track set per batch required")
    assignment: dict[int, int] = {}
    next_id = 1
    prev_ends: dict[int, Detection] = {}  # global id -> last detection in previous batch
    for batch, ts in zip(batches, tracksets):
        if not batch:
            continue
        by_id = {d.det_id: d for d in batch}
        local = ts.tracks()
        firsts = {trk: min((by_id[i] for i in ids), key=lambda d: (d.frame, d.det_id))
                  for trk, ids in local.items()}
        lasts = {trk: max((by_id[i] for i in ids), key=lambda d: (d.frame, d.det_id))
                 for trk, ids in local.items()}
        pairs = sorted(((-_cosine(prev_ends[g].feature, firsts[l].feature), g, l)
                        for g in prev_ends for l in local), key=lambda x: x)
        mapping: dict[int, int] = {}
        used_prev = set()
        for _, g, l in pairs:
            if g in used_prev or l in mapping:
                continue
            mapping[l] = g
            used_prev.add(g)
        for l in sorted(local):
            if l not in mapping:
                mapping[l] = next_id
                next_id += 1
        for l, ids in local.items():
            for i in ids:
                assignment[i] = mapping[l]
        prev_ends = {mapping[l]: lasts[l] for l in local}
    return TrackSet(_densify(assignment))


def _densify(assignment: Mapping[int, int]) -> dict[int, int]:
    """Relabel track ids to 1..n in order of first appearance by detection id."""
    relabel: dict[int, int] = {}
    for det in sorted(assignment):
        relabel.setdefault(assignment[det], len(relabel) + 1)
    return {det: relabel[trk] for det, trk in assignment.items()}
