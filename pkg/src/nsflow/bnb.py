"""Exact branch and bound over path covers.

Intermediate nodes are visited in topological order (for tracking graphs:
by frame, then detection).  Each node either extends one of the open tracks
or opens a new one; a track ends implicitly at its last node.  The search
keeps an incumbent and prunes a subtree when its upper bound falls strictly
below the incumbent value.  Leaves are scored with the same fsum-based
routine the exhaustive oracle uses, and ties are resolved by the canonical
cover order, so results match the oracle bit for bit.

Scoring lives in a small scorer object, which lets the scalar baseline reuse
the engine with an additive objective.
"""

from __future__ import annotations

import enum
import itertools
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .flowcore import (Finite, FlowNetwork, PathCover, Solution, as_capvec, cover_value,
                       flow_from_paths)

# Bounds are inflated by this relative amount before comparison so that
# rounding in vectorised sums can never make an admissible bound look smaller
# than an exactly summed leaf.
BOUND_SLACK = 1e-10


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    TIME_LIMIT = "time_limit"
    NODE_LIMIT = "node_limit"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float = 60.0
    node_limit: int | None = None
    greedy_only: bool = False
    tie_break: str = "canonical"

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.tie_break != "canonical":
            raise ValueError(f"unsupported tie_break rule {self.tie_break!r}")


@dataclass
class SolveResult:
    status: Status
    solution: Solution | None
    cover: PathCover | None
    value: float | None
    bound: float | None
    nodes: int = 0
    history: list[float] = field(default_factory=list)

    @property
    def objective(self) -> float | None:
        return None if self.solution is None else self.solution.objective

    @property
    def gap(self) -> float | None:
        if self.value is None or self.bound is None:
            return None
        return max(0.0, self.bound - self.value)


@dataclass(frozen=True)
class SearchNode:
    """Partial assignment as seen by :func:`upper_bound`."""

    running_mins: tuple[np.ndarray, ...]
    assigned: frozenset = frozenset()
    opened: int = 0
    d: int = 1

    def __post_init__(self):
        if self.opened > self.d:
            raise ValueError("more tracks opened than d")


def upper_bound(node: SearchNode, remaining: Iterable) -> float:
    """Value of the open tracks plus ``d - opened`` copies of the best new track.

    ``remaining`` holds the capacities of the detections that could still
    start a track.
    """
    open_part = math.fsum(float(x) for rm in node.running_mins for x in np.asarray(rm))
    free = node.d - node.opened
    if free == 0:
        return open_part
    sums = [math.fsum(as_capvec(c).values) for c in remaining]
    if not sums:
        return -math.inf
    return open_part + free * max(sums)


@dataclass(frozen=True)
class _Track:
    last: int
    nodes: tuple[int, ...]
    payload: object = None


class _Structure:
    """Index-based view of a network in search order."""

    def __init__(self, net: FlowNetwork):
        self.net = net
        s, t = net.source, net.sink
        self.order = [v for v in net.topological_order if v not in (s, t)]
        self.n = n = len(self.order)
        self.pos = {v: i for i, v in enumerate(self.order)}
        self.enter = [net.has_edge(s, v) for v in self.order]
        self.exit = [net.has_edge(v, t) for v in self.order]
        self.preds = [[self.pos[u] for u in net.pred(v) if u != s] for v in self.order]
        self.succs = [[self.pos[w] for w in net.succ(v) if w != t] for v in self.order]
        self.last_succ = [max(ss, default=-1) for ss in self.succs]
        must_open = [not p for p in self.preds]
        self.must_open_suffix = list(itertools.accumulate(reversed(must_open), initial=0))[::-1]
        reach = [0] * n
        for i in range(n - 1, -1, -1):
            r = 0
            for j in self.succs[i]:
                r |= (1 << j) | reach[j]
            reach[i] = r
        self.reach = reach


class BranchAndBound:
    """Depth-first branch and bound over the tracks of a path cover."""

    def __init__(self, net: FlowNetwork, scorer, cfg: SolverConfig | None = None):
        self.net = net
        self.cfg = cfg or SolverConfig()
        self.st = scorer.structure
        self.scorer = scorer
        self.d = net.d

    # -- helpers shared with tests -------------------------------------------
    def root(self):
        return (0, (), 0, 0.0)

    def is_leaf(self, state) -> bool:
        return state[0] == self.st.n

    def children(self, state):
        """Child states in branching order (best immediate bound first)."""
        pos, tracks, opened, acc = state
        st, sc = self.st, self.scorer
        if pos >= st.n:
            return []
        if st.n - pos < self.d - opened or st.must_open_suffix[pos] > self.d - opened:
            return []
        for tr in tracks:
            if not st.exit[tr.last] and st.last_succ[tr.last] < pos:
                return []
        v = pos
        out = []
        for j, tr in enumerate(tracks):
            if v in st.succs[tr.last]:
                new_tr = _Track(v, tr.nodes + (v,), sc.extend(tr.payload, tr.last, v))
                child = (pos + 1, tracks[:j] + (new_tr,) + tracks[j + 1:], opened,
                         acc + sc.gain(tr.last, v))
                out.append((j, child))
        if st.enter[v] and opened < self.d:
            new_tr = _Track(v, (v,), sc.open(v))
            child = (pos + 1, tracks + (new_tr,), opened + 1, acc + sc.gain(None, v))
            out.append((len(tracks), child))
        keyed = [(-sc.quick_bound(c), j, c) for j, c in out]
        keyed.sort(key=lambda x: (x[0], x[1]))
        return [c for _, _, c in keyed]

    def bound(self, state) -> float:
        pos, tracks, opened, acc = state
        b = self.scorer.bound(pos, tracks, opened, acc)
        if not math.isfinite(b):
            return b
        return b + BOUND_SLACK * max(1.0, abs(b))

    def leaf_paths(self, state):
        _, tracks, opened, _ = state
        if opened != self.d or any(not self.st.exit[tr.last] for tr in tracks):
            return None
        s, t = self.net.source, self.net.sink
        order = self.st.order
        return PathCover(tuple((s,) + tuple(order[i] for i in tr.nodes) + (t,) for tr in tracks))

    # -- search --------------------------------------------------------------
    def greedy(self):
        """Follow the best child at every level without backtracking."""
        state = self.root()
        while not self.is_leaf(state):
            kids = self.children(state)
            if not kids:
                return None
            state = kids[0]
        cover = self.leaf_paths(state)
        if cover is None:
            return None
        return self.scorer.leaf_value(cover), cover

    def run(self) -> SolveResult:
        cfg = self.cfg
        self.nodes = 0
        self.best = None
        self.history = []
        self.stop = None
        self.t0 = time.perf_counter()
        root = self.root()
        root_bound = self.bound(root) if self.st.n else -math.inf

        seed = self.greedy()
        if seed is not None:
            self._offer(*seed)
        if cfg.greedy_only:
            status = Status.TIME_LIMIT if seed is not None else Status.INFEASIBLE
            return self._result(status, root_bound)

        limit = sys.getrecursionlimit()
        if limit < 4 * self.st.n + 200:
            sys.setrecursionlimit(4 * self.st.n + 200)
        try:
            self._dfs(root)
        finally:
            sys.setrecursionlimit(limit)
        if self.stop is not None:
            return self._result(self.stop, root_bound)
        if self.best is None:
            return self._result(Status.INFEASIBLE, None)
        return self._result(Status.OPTIMAL, self.best[0])

    def _result(self, status, bound):
        if self.best is None:
            return SolveResult(status, None, None, None, bound, self.nodes, self.history)
        value, cover = self.best
        sol = self.scorer.decode(cover)
        return SolveResult(status, sol, cover, value, bound, self.nodes, self.history)

    def _offer(self, value, cover):
        best = self.best
        if best is None or value > best[0] or (value == best[0] and cover.key < best[1].key):
            self.best = (value, cover)
            self.history.append(value)

    def _dfs(self, state):
        if self.stop is not None:
            return
        self.nodes += 1
        cfg = self.cfg
        if cfg.node_limit is not None and self.nodes > cfg.node_limit:
            self.stop = Status.NODE_LIMIT
            return
        if self.nodes % 256 == 0 and time.perf_counter() - self.t0 > cfg.time_limit:
            self.stop = Status.TIME_LIMIT
            return
        if self.is_leaf(state):
            cover = self.leaf_paths(state)
            if cover is not None:
                self._offer(self.scorer.leaf_value(cover), cover)
            return
        if self.best is not None and self.bound(state) < self.best[0]:
            return
        for child in self.children(state):
            self._dfs(child)


class BottleneckScorer:
    """Vector objective: per track, the component sum of its capacity minimum."""

    def __init__(self, net: FlowNetwork):
        self.net = net
        self.structure = st = _Structure(net)
        s, t = net.source, net.sink
        order = st.order
        k = net.k

        def arr(u, v):
            cap = net.capacity(u, v)
            return cap.array if isinstance(cap, Finite) else None

        self.enter_cap = [arr(s, v) if st.enter[i] else None for i, v in enumerate(order)]
        self.exit_cap = [arr(v, t) if st.exit[i] else None for i, v in enumerate(order)]
        self.edge_cap = {(st.pos[u], st.pos[v]): arr(u, v)
                         for u, v in net.edges if u != s and v != t}

        # best bottleneck (scalar capacity sum) on any path from a node to the sink
        def csum(a):
            return math.inf if a is None else float(a.sum())

        g = [math.inf] * st.n
        for i in range(st.n - 1, -1, -1):
            best = csum(self.exit_cap[i]) if st.exit[i] else -math.inf
            for j in st.succs[i]:
                best = max(best, min(csum(self.edge_cap[(i, j)]), g[j]))
            g[i] = best
        self.g = g
        new_val = [min(csum(self.enter_cap[i]), g[i]) if st.enter[i] else -math.inf
                   for i in range(st.n)]
        self.max_new = list(itertools.accumulate(reversed(new_val), max, initial=-math.inf))[::-1]

        # capacity every path through a node is forced to take
        forced: list[np.ndarray | None] = [None] * st.n
        for i in range(st.n):
            if len(st.succs[i]) == 1 and not st.exit[i]:
                forced[i] = self.edge_cap[(i, st.succs[i][0])]
        self.forced = forced
        mandatory = dict(enumerate(forced))
        for i in range(st.n):
            if mandatory.get(i) is None and len(st.preds[i]) == 1 and not st.enter[i]:
                p = st.preds[i][0]
                if forced[p] is None:
                    mandatory[i] = self.edge_cap[(p, i)]
        self._build_groups({i: a for i, a in mandatory.items() if a is not None}, k)

    def _build_groups(self, mandatory: dict[int, np.ndarray], k: int):
        st, net = self.structure, self.net
        if net.layers is not None:
            level = {i: net.layers.get(v, 0) for i, v in enumerate(st.order)}
        else:
            level = [0] * st.n
            for i in range(st.n):
                for j in st.succs[i]:
                    level[j] = max(level[j], level[i] + 1)
            level = dict(enumerate(level))
        by_level: dict[int, list[int]] = {}
        for i in sorted(mandatory):
            by_level.setdefault(level[i], []).append(i)
        groups = []
        for members in by_level.values():
            # split into antichains: no member may reach another
            chains: list[list[int]] = []
            for i in members:
                for grp in chains:
                    if all(not (st.reach[i] >> j) & 1 and not (st.reach[j] >> i) & 1 for j in grp):
                        grp.append(i)
                        break
                else:
                    chains.append([i])
            groups.extend(g for g in chains if len(g) > 1)
        groups.sort(key=lambda g: min(g))
        self.groups = [(min(g), np.array(g), np.stack([mandatory[i] for i in g]),
                        np.array([mandatory[i].sum() for i in g])) for g in groups]
        self.group_starts = [g[0] for g in self.groups]

    # engine hooks -----------------------------------------------------------
    def open(self, v):
        return self.enter_cap[v]

    def extend(self, payload, u, v):
        cap = self.edge_cap[(u, v)]
        if cap is None:
            return payload
        return cap if payload is None else np.minimum(payload, cap)

    def gain(self, u, v):
        return 0.0

    def leaf_value(self, cover: PathCover) -> float:
        return cover_value(self.net, cover.paths)

    def decode(self, cover: PathCover) -> Solution:
        return flow_from_paths(self.net, cover)

    def _effective(self, tracks):
        rms, vals = [], []
        for tr in tracks:
            rm = tr.payload
            # a node with a single way forward commits the track to that capacity
            ends_here = not self.structure.succs[tr.last]
            for extra in (self.forced[tr.last], self.exit_cap[tr.last] if ends_here else None):
                if extra is not None:
                    rm = extra if rm is None else np.minimum(rm, extra)
            rms.append(rm)
            vals.append(self.g[tr.last] if rm is None else float(rm.sum()))
        return rms, vals

    def quick_bound(self, state) -> float:
        pos, tracks, opened, _ = state
        _, vals = self._effective(tracks)
        free = self.net.d - opened
        new = self.max_new[pos] if pos < len(self.max_new) else -math.inf
        if free and new == -math.inf:
            return -math.inf
        return sum(vals) + free * (new if free else 0.0)

    def bound(self, pos, tracks, opened, acc) -> float:
        rms, vals = self._effective(tracks)
        free = self.net.d - opened
        new = self.max_new[pos]
        if free and new == -math.inf:
            return -math.inf
        base = sum(vals) + (free * new if free else 0.0)
        best = base
        st = self.structure
        first = np.searchsorted(self.group_starts, pos)
        n_tr = len(tracks)
        for start, members, caps, sums in self.groups[first:]:
            m = len(members)
            if m > n_tr + free:
                return -math.inf
            n_new = min(free, m)
            gain = np.full((m, n_tr + n_new), -np.inf)
            for j, tr in enumerate(tracks):
                ok = np.array([(st.reach[tr.last] >> int(i)) & 1 for i in members], dtype=bool)
                if not ok.any():
                    continue
                if rms[j] is None:
                    col = np.minimum(vals[j], sums) - vals[j]
                else:
                    col = np.minimum(rms[j], caps).sum(axis=1) - vals[j]
                gain[ok, j] = col[ok]
            if n_new:
                gain[:, n_tr:] = (np.minimum(new, sums) - new)[:, None]
            g = _best_assignment(gain)
            if g == -math.inf:
                return -math.inf
            if base + g < best:
                best = base + g
        return best


def _best_assignment(gain: np.ndarray) -> float:
    """Maximum total gain assigning every row to a distinct column."""
    m, c = gain.shape
    if m <= 3 and c <= 4:
        best = -math.inf
        rows = gain.tolist()
        for cols in itertools.permutations(range(c), m):
            total = 0.0
            for r, col in enumerate(cols):
                total += rows[r][col]
            if total > best:
                best = total
        return best
    finite = np.where(np.isfinite(gain), gain, -1e18)
    r, cidx = linear_sum_assignment(finite, maximize=True)
    if len(r) < m or np.any(~np.isfinite(gain[r, cidx])):
        return -math.inf
    return float(gain[r, cidx].sum())


def solve(net: FlowNetwork, cfg: SolverConfig | None = None) -> SolveResult:
    """Exact solve of the non-separable vector max-flow problem on ``net``."""
    return BranchAndBound(net, BottleneckScorer(net), cfg).run()


def greedy_solve(net: FlowNetwork) -> Solution | None:
    """One greedy dive of the search; a feasible but not necessarily optimal flow."""
    scorer = BottleneckScorer(net)
    found = BranchAndBound(net, scorer).greedy()
    return None if found is None else scorer.decode(found[1])
