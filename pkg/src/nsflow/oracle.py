"""Exhaustive reference solver for tiny networks.

Enumerates every path cover in canonical order and scores each one.  Used as
ground truth for the branch-and-bound solver and the scalar baseline.
"""

from __future__ import annotations

import math
from typing import Callable, Iterator, Sequence

from .flowcore import FlowError, FlowNetwork, PathCover, Solution, cover_value, flow_from_paths

DEFAULT_MAX_NODES = 14


class EnumerationLimitError(FlowError):
    pass


def enumerate_covers(net: FlowNetwork, max_nodes: int = DEFAULT_MAX_NODES) -> Iterator[PathCover]:
    """Yield every path cover of ``net`` exactly once, in canonical order.

    Covers are ordered lexicographically by their sorted path lists.  Paths
    are generated by depth-first search over sorted successor lists, which
    emits them in lexicographic order because no source-sink path is a
    prefix of another.
    """
    inner = net.intermediate
    if len(inner) > max_nodes:
        raise EnumerationLimitError(
            f"{len(inner)} intermediate nodes exceeds enumeration limit {max_nodes}")
    s, t, d = net.source, net.sink, net.d
    n_inner = len(inner)

    def paths_from(first: str, blocked: set[str]) -> Iterator[tuple[str, ...]]:
        # acyclic, so the current path can never revisit its own nodes
        stack = [s, first]

        def rec():
            for w in net.succ(stack[-1]):
                if w == t:
                    yield tuple(stack) + (t,)
                elif w not in blocked:
                    stack.append(w)
                    yield from rec()
                    stack.pop()

        yield from rec()

    def covers(chosen: list[tuple[str, ...]], used: set[str], after: str | None):
        if len(chosen) == d:
            if len(used) == n_inner:
                yield PathCover(tuple(chosen))
            return
        for first in net.succ(s):
            if first == t or first in used or (after is not None and first <= after):
                continue
            for p in paths_from(first, used):
                new = set(p[1:-1])
                chosen.append(p)
                yield from covers(chosen, used | new, first)
                chosen.pop()

    yield from covers([], set(), None)


def brute_force_best(net: FlowNetwork, score: Callable[[PathCover], float], *,
                     maximize: bool = True, max_nodes: int = DEFAULT_MAX_NODES):
    """Best ``(value, cover)`` under ``score``; first in canonical order wins ties.

    Returns ``None`` when the network has no cover.
    """
    best = None
    for cover in enumerate_covers(net, max_nodes):
        value = score(cover)
        if best is None or (value > best[0] if maximize else value < best[0]):
            best = (value, cover)
    return best


def brute_force_solve(net: FlowNetwork, max_nodes: int = DEFAULT_MAX_NODES) -> Solution | None:
    """Globally optimal solution by enumeration, or ``None`` if infeasible."""
    best = brute_force_best(net, lambda c: cover_value(net, c.paths), max_nodes=max_nodes)
    if best is None:
        return None
    return flow_from_paths(net, best[1])


def count_covers(net: FlowNetwork, max_nodes: int = DEFAULT_MAX_NODES) -> int:
    return sum(1 for _ in enumerate_covers(net, max_nodes))


def cover_cost(costs, cover: PathCover | Sequence[Sequence[str]]) -> float:
    """Additive cost of a cover under per-edge scalar ``costs``."""
    paths = cover.paths if isinstance(cover, PathCover) else cover
    return math.fsum(costs[(a, b)] for p in paths for a, b in zip(p, p[1:]))
