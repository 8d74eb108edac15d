"""Instance generators shared by several test modules."""

import numpy as np

from nsflow.instances import random_tracking_instance


def random_instances(count, seed0=0, **kw):
    """``count`` random tracking graphs drawn from consecutive seeds."""
    return [random_tracking_instance(np.random.default_rng(seed0 + i), **kw) for i in range(count)]


def feasible_instances(count, seed0=0, **kw):
    """Random graphs re-targeted to d = largest frame size, which is usually feasible."""
    out = []
    for g in random_instances(count, seed0, **kw):
        frames = [d.frame for d in g.detections]
        d = max(frames.count(f) for f in set(frames))
        out.append(g if d == g.net.d else replace_d(g, d))
    return out


def replace_d(graph, d):
    from nsflow.mot_graph import TrackingGraph

    return TrackingGraph(graph.net.with_d(d), graph.roles, graph.detections, graph.entry,
                         graph.exit, graph.dt)


# criterion number -> (passed, detail); filled by test_acceptance, printed by conftest
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def acceptance_lines():
    return [f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
            for n, (ok, detail) in sorted(ACCEPTANCE.items())]
