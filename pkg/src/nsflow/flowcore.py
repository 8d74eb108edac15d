"""Graph, capacity and flow types for non-separable vector-valued max flow.

A network carries a k-dimensional capacity on every edge.  A feasible flow
activates exactly ``d`` node-disjoint source-sink paths that together visit
every intermediate node, and each path carries one k-vector that cannot be
split across edges.  For a fixed set of active paths the best flow on a path
is the elementwise minimum of its capacities, so every objective in this
package reduces to sums of such minima.

All objective values are accumulated with :func:`math.fsum`, which returns
the correctly rounded sum independent of term order.  Two routes that reach
the same set of path minima therefore produce bit-identical objectives.
"""

from __future__ import annotations

import graphlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

EPS_FEAS = 1e-9

Edge = tuple[str, str]


class FlowError(Exception):
    """Base class for errors raised by this package."""


class StructuralError(FlowError, ValueError):
    """Input does not describe a well-formed network, cover or solution."""


class UnboundedError(FlowError):
    """A source-sink path crosses no finite capacity."""


@dataclass(frozen=True)
class Finite:
    """Finite, non-negative capacity vector."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        if not vals:
            raise StructuralError("capacity vector must have at least one entry")
        for x in vals:
            if not math.isfinite(x) or x < 0:
                raise StructuralError(f"capacity entries must be finite and >= 0, got {x!r}")
        object.__setattr__(self, "values", vals)

    @property
    def is_infinite(self) -> bool:
        return False

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.values, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Infinite:
    """Unbounded capacity; the edge limits flow only through its activation."""

    @property
    def is_infinite(self) -> bool:
        return True

    def __repr__(self):
        return "INF"


INF = Infinite()
CapVec = Finite | Infinite


def as_capvec(value) -> CapVec:
    """Coerce ``value`` into a capacity.

    Accepts an existing capacity, the strings ``"inf"``/``"infinite"``,
    ``None`` (infinite), or a sequence of reals.
    """
    if isinstance(value, (Finite, Infinite)):
        return value
    if value is None:
        return INF
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinite", "infinity"):
            return INF
        raise StructuralError(f"unknown capacity literal {value!r}")
    return Finite(tuple(np.asarray(value, dtype=np.float64).ravel()))


class FlowNetwork:
    """Immutable DAG with vector capacities, a source, a sink and a path count.

    ``edges`` maps ``(u, v)`` to a capacity (anything :func:`as_capvec`
    accepts) or is an iterable of ``(u, v, capacity)`` triples.  Node ids are
    strings; their natural sort order defines the canonical order used for
    tie-breaking between equally good solutions.

    ``layers`` is an optional ``node -> int`` hint (e.g. the frame number of
    a detection) that the branch-and-bound solver uses to group nodes which
    cannot share a path.
    """

    def __init__(self, edges, source: str = "s", sink: str = "t", *, k: int, d: int,
                 nodes: Iterable[str] | None = None, layers: Mapping[str, int] | None = None):
        if isinstance(edges, Mapping):
            items = [(u, v, c) for (u, v), c in edges.items()]
        else:
            items = [tuple(e) for e in edges]
        if int(k) != k or k < 1:
            raise StructuralError(f"k must be a positive integer, got {k!r}")
        if int(d) != d or d < 1:
            raise StructuralError(f"d must be a positive integer, got {d!r}")
        self._k = int(k)
        self._d = int(d)
        self._source = source
        self._sink = sink

        caps: dict[Edge, CapVec] = {}
        node_set = {source, sink}
        if nodes is not None:
            node_set.update(nodes)
        for item in items:
            if len(item) != 3:
                raise StructuralError(f"edge entries must be (u, v, capacity), got {item!r}")
            u, v, c = item
            if (u, v) in caps:
                raise StructuralError(f"duplicate edge {u}->{v}")
            cap = as_capvec(c)
            if isinstance(cap, Finite) and len(cap) != self._k:
                raise StructuralError(f"edge {u}->{v} has {len(cap)} dims, network has k={self._k}")
            caps[(u, v)] = cap
            node_set.update((u, v))
        for n in node_set:
            if not isinstance(n, str):
                raise StructuralError(f"node ids must be strings, got {n!r}")

        for u, v in caps:
            if u == v:
                raise StructuralError(f"self-loop at {u}")
            if v == source:
                raise StructuralError(f"source {source} has incoming edge from {u}")
            if u == sink:
                raise StructuralError(f"sink {sink} has outgoing edge to {v}")
            if u == source and v == sink:
                raise StructuralError("direct source-sink edge is not allowed")

        succ: dict[str, list[str]] = {n: [] for n in node_set}
        pred: dict[str, list[str]] = {n: [] for n in node_set}
        for u, v in caps:
            succ[u].append(v)
            pred[v].append(u)
        ts = graphlib.TopologicalSorter({n: pred[n] for n in node_set})
        try:
            ts.prepare()
        except graphlib.CycleError as exc:
            raise StructuralError(f"network has a cycle: {exc.args[1]}") from None

        self._nodes = tuple(sorted(node_set))
        self._edges = tuple(sorted(caps))
        self._caps = MappingProxyType({e: caps[e] for e in self._edges})
        self._succ = MappingProxyType({n: tuple(sorted(vs)) for n, vs in succ.items()})
        self._pred = MappingProxyType({n: tuple(sorted(us)) for n, us in pred.items()})
        self._layers = MappingProxyType(dict(layers)) if layers is not None else None

    # read-only views -----------------------------------------------------
    source = property(lambda self: self._source)
    sink = property(lambda self: self._sink)
    k = property(lambda self: self._k)
    d = property(lambda self: self._d)
    nodes = property(lambda self: self._nodes)
    edges = property(lambda self: self._edges)
    capacities = property(lambda self: self._caps)
    layers = property(lambda self: self._layers)

    @property
    def intermediate(self) -> tuple[str, ...]:
        return tuple(n for n in self._nodes if n not in (self._source, self._sink))

    def succ(self, node: str) -> tuple[str, ...]:
        return self._succ[node]

    def pred(self, node: str) -> tuple[str, ...]:
        return self._pred[node]

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self._caps

    def capacity(self, u: str, v: str) -> CapVec:
        return self._caps[(u, v)]

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Topological order of all nodes; ties resolved by smallest node id."""
        import heapq

        indeg = {n: len(self._pred[n]) for n in self._nodes}
        heap = [n for n, deg in indeg.items() if deg == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            n = heapq.heappop(heap)
            order.append(n)
            for v in self._succ[n]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(heap, v)
        return tuple(order)

    def with_d(self, d: int) -> "FlowNetwork":
        return FlowNetwork(self._caps, self._source, self._sink, k=self._k, d=d,
                           nodes=self._nodes, layers=self._layers)

    def scaled(self, factor: float) -> "FlowNetwork":
        """Copy with every finite capacity multiplied by ``factor``."""
        caps = {e: (Finite(tuple(factor * x for x in c.values)) if isinstance(c, Finite) else c)
                for e, c in self._caps.items()}
        return FlowNetwork(caps, self._source, self._sink, k=self._k, d=self._d,
                           nodes=self._nodes, layers=self._layers)

    def without_edges(self, removed: Iterable[Edge]) -> "FlowNetwork":
        drop = set(removed)
        caps = {e: c for e, c in self._caps.items() if e not in drop}
        return FlowNetwork(caps, self._source, self._sink, k=self._k, d=self._d,
                           nodes=self._nodes, layers=self._layers)

    def __repr__(self):
        return (f"FlowNetwork(nodes={len(self._nodes)}, edges={len(self._edges)}, "
                f"k={self._k}, d={self._d})")


@dataclass(frozen=True)
class PathCover:
    """``d`` node-disjoint source-sink paths that visit every intermediate node.

    Paths are stored in canonical order (sorted by their node sequence, which
    amounts to sorting by first intermediate node).  Covers compare by
    :attr:`key`.
    """

    paths: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(sorted(tuple(p) for p in self.paths)))

    @property
    def key(self) -> tuple[tuple[str, ...], ...]:
        return self.paths

    def edges(self) -> list[Edge]:
        return [(p[i], p[i + 1]) for p in self.paths for i in range(len(p) - 1)]

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def cover_problems(net: FlowNetwork, paths: Iterable[Sequence[str]]) -> list[str]:
    """Return human-readable reasons why ``paths`` is not a valid cover."""
    problems = []
    paths = [tuple(p) for p in paths]
    if len(paths) != net.d:
        problems.append(f"expected {net.d} paths, got {len(paths)}")
    seen: dict[str, int] = {}
    for i, p in enumerate(paths):
        if len(p) < 3 or p[0] != net.source or p[-1] != net.sink:
            problems.append(f"path {i} must run from {net.source} to {net.sink} through >=1 node")
        for a, b in zip(p, p[1:]):
            if not net.has_edge(a, b):
                problems.append(f"path {i} uses missing edge {a}->{b}")
        for n in p[1:-1]:
            if n in (net.source, net.sink):
                problems.append(f"path {i} revisits a terminal")
            elif n in seen:
                problems.append(f"node {n} on paths {seen[n]} and {i}")
            else:
                seen[n] = i
    missing = [n for n in net.intermediate if n not in seen]
    if missing:
        problems.append(f"uncovered nodes: {', '.join(missing)}")
    return problems


def path_minimum(net: FlowNetwork, path: Sequence[str]) -> np.ndarray:
    """Elementwise minimum over the finite capacities along ``path``."""
    best = None
    for a, b in zip(path, path[1:]):
        cap = net.capacity(a, b)
        if isinstance(cap, Finite):
            best = cap.array.copy() if best is None else np.minimum(best, cap.array)
    if best is None:
        raise UnboundedError(f"path {' -> '.join(path)} has no finite capacity")
    return best


def cover_value(net: FlowNetwork, paths: Iterable[Sequence[str]]) -> float:
    """Objective of the optimal flow on a fixed cover, without building a Solution."""
    return math.fsum(float(x) for p in paths for x in path_minimum(net, p))


@dataclass(frozen=True)
class Solution:
    """Per-edge flow vectors and activations plus the objective value."""

    flows: Mapping[Edge, np.ndarray]
    active: Mapping[Edge, bool]
    objective: float
    source: str = "s"
    paths: tuple[tuple[str, ...], ...] | None = field(default=None, compare=False)


def objective(sol: Solution) -> float:
    """Sum of all flow components leaving the source."""
    return math.fsum(float(x) for (u, _), f in sol.flows.items() if u == sol.source for x in f)


@dataclass(frozen=True)
class Violation:
    constraint: str
    location: object
    detail: str


def validate(net: FlowNetwork, sol: Solution, eps: float = EPS_FEAS) -> list[Violation]:
    """Check ``sol`` against every constraint family; empty list means feasible."""
    if set(sol.flows) != set(net.edges) or set(sol.active) != set(net.edges):
        raise StructuralError("solution does not cover exactly the network's edges")
    flows = {}
    for e in net.edges:
        f = np.asarray(sol.flows[e], dtype=np.float64)
        if f.shape != (net.k,):
            raise StructuralError(f"flow on {e} has shape {f.shape}, expected ({net.k},)")
        flows[e] = f

    out: list[Violation] = []
    for e in net.edges:
        f, on, cap = flows[e], bool(sol.active[e]), net.capacities[e]
        if not on:
            if np.any(np.abs(f) > eps):
                out.append(Violation("capacity", e, "non-zero flow on inactive edge"))
        elif isinstance(cap, Finite) and np.any(f > cap.array + eps):
            dims = np.flatnonzero(f > cap.array + eps).tolist()
            out.append(Violation("capacity", e, f"flow exceeds capacity in dims {dims}"))

    for v in net.intermediate:
        inflow = sum((flows[(u, v)] for u in net.pred(v)), np.zeros(net.k))
        outflow = sum((flows[(v, w)] for w in net.succ(v)), np.zeros(net.k))
        if np.any(np.abs(inflow - outflow) > eps):
            out.append(Violation("flow conservation", v, "inflow != outflow"))

    for v in net.intermediate:
        n_in = sum(bool(sol.active[(u, v)]) for u in net.pred(v))
        n_out = sum(bool(sol.active[(v, w)]) for w in net.succ(v))
        if n_in != 1 or n_out != 1:
            out.append(Violation("node count", v, f"{n_in} active in-edges, {n_out} active out-edges"))

    n_src = sum(bool(sol.active[(net.source, v)]) for v in net.succ(net.source))
    n_snk = sum(bool(sol.active[(u, net.sink)]) for u in net.pred(net.sink))
    if n_src != net.d:
        out.append(Violation("total count", net.source, f"{n_src} active edges, expected {net.d}"))
    if n_snk != net.d:
        out.append(Violation("total count", net.sink, f"{n_snk} active edges, expected {net.d}"))

    for e in net.edges:
        if np.any(flows[e] < -eps):
            out.append(Violation("non-negativity", e, "negative flow component"))

    expected = objective(sol)
    if abs(sol.objective - expected) > eps * max(1.0, abs(expected)):
        out.append(Violation("objective", net.source,
                             f"reported {sol.objective!r}, source outflow sums to {expected!r}"))
    return out


def flow_from_paths(net: FlowNetwork, cover: PathCover | Iterable[Sequence[str]]) -> Solution:
    """Optimal flow for a fixed activation pattern given as a path cover."""
    cover = cover if isinstance(cover, PathCover) else PathCover(tuple(tuple(p) for p in cover))
    problems = cover_problems(net, cover.paths)
    if problems:
        raise StructuralError("invalid path cover: " + "; ".join(problems))
    flows = {e: np.zeros(net.k) for e in net.edges}
    active = dict.fromkeys(net.edges, False)
    for p in cover.paths:
        m = path_minimum(net, p)
        for e in zip(p, p[1:]):
            flows[e] = m.copy()
            active[e] = True
    sol = Solution(MappingProxyType(flows), MappingProxyType(active), 0.0, net.source, cover.paths)
    return Solution(sol.flows, sol.active, objective(sol), net.source, cover.paths)
