import random

import numpy as np
import pytest

from nsflow.bnb import solve
from nsflow.flowcore import Finite, StructuralError
from nsflow.mot_graph import (ENTER, EXIT, OBSERVATION, TRANSITION, Detection, GraphParams,
                              TrackSet, batch_d, build_graph, decode, prune, split_batches, stitch)
from nsflow.oracle import brute_force_solve

from helpers import feasible_instances


def det(frame, i, x=0.0, feat=(1.0,), gt=None):
    return Detection(frame, i, (x, 0.0, 10.0, 10.0), feat, gt)


def transitions(g):
    nd = {}
    for d in g.detections:
        nd[g.exit[d.det_id]] = d.det_id
        nd[g.entry[d.det_id]] = d.det_id
    return sorted((nd[u], nd[v]) for (u, v), r in g.roles.items() if r == TRANSITION)


class TestBuild:
    def test_two_frames(self):
        g = build_graph([det(1, 1), det(2, 2)], GraphParams(d=1, dt=1))
        assert len(g.net.nodes) == 6
        roles = sorted(g.roles.values())
        assert roles.count(TRANSITION) == 1
        assert roles.count(OBSERVATION) == 2
        assert roles.count(ENTER) == roles.count(EXIT) == 2

    def test_skip_window(self):
        g = build_graph([det(1, 1), det(2, 2), det(3, 3)], GraphParams(d=1, dt=2))
        assert transitions(g) == [(1, 2), (1, 3), (2, 3)]
        g1 = build_graph([det(1, 1), det(2, 2), det(3, 3)], GraphParams(d=1, dt=1))
        assert transitions(g1) == [(1, 2), (2, 3)]

    def test_capacities(self):
        g = build_graph([det(1, 7, feat=(0.25, 0.5))], GraphParams(d=1))
        a, b = g.entry[7], g.exit[7]
        assert g.net.capacity(a, b) == Finite((0.25, 0.5))
        assert g.net.capacity("s", a).is_infinite and g.net.capacity(b, "t").is_infinite

    def test_gate_zero(self):
        dets = [det(f, 10 * f + j, x=0.0) for f in (1, 2) for j in (0, 1)]
        g = build_graph(dets, GraphParams(d=2, dt=1, gate=0.0))
        assert transitions(g) == []
        assert solve(g.net).solution is None
        ok = solve(g.net.with_d(4))
        assert ok.solution is not None and len(ok.cover) == 4

    def test_permutation_invariant(self):
        dets = [det(f, 10 * f + j, x=5.0 * j, feat=(j + 1.0, f)) for f in (1, 2, 3) for j in (0, 1)]
        ref = build_graph(dets, GraphParams(d=2))
        rng = random.Random(0)
        for _ in range(5):
            shuffled = dets[:]
            rng.shuffle(shuffled)
            g = build_graph(shuffled, GraphParams(d=2))
            assert g.net.capacities == ref.net.capacities and g.roles == ref.roles

    def test_every_path_crosses_observation(self):
        for g in feasible_instances(30, seed0=10):
            # entry nodes have the observation edge as their only way out
            for v in g.entry.values():
                (w,) = g.net.succ(v)
                assert g.roles[(v, w)] == OBSERVATION
    def test_errors(self):
        with pytest.raises(StructuralError):
            build_graph([], GraphParams(d=1))
        with pytest.raises(StructuralError):
            build_graph([det(1, 1), det(2, 1)], GraphParams(d=1))
        with pytest.raises(StructuralError):
            build_graph([det(1, 1, feat=(1.0,)), det(2, 2, feat=(1.0, 2.0))], GraphParams(d=1))
        with pytest.raises(StructuralError):
            Detection(1, 1, (0, 0, 0, 5), (1.0,))
        with pytest.raises(StructuralError):
            Detection(1, 1, (0, 0, 5, 5), (-1.0,))
        with pytest.raises(ValueError):
            GraphParams(d=1, dt=3, batch=3)


class TestPrune:
    def test_infinite_gate_identity(self):
        g = build_graph([det(1, 1), det(2, 2, x=900)], GraphParams(d=1, dt=1))
        assert prune(g, float("inf")) is g

    def test_far_objects_cut(self):
        dets = [det(f, 10 * f + j, x=500.0 * j) for f in (1, 2) for j in (0, 1)]
        g = prune(build_graph(dets, GraphParams(d=2, dt=1)), 100.0)
        assert transitions(g) == [(10, 20), (11, 21)]
        assert sorted(g.roles.values()).count(OBSERVATION) == 4

    def test_gate_scales_with_gap(self):
        dets = [det(1, 1, x=0.0), det(3, 2, x=150.0)]
        assert transitions(build_graph(dets, GraphParams(d=1, dt=2, gate=100.0))) == [(1, 2)]
        assert transitions(build_graph(dets, GraphParams(d=1, dt=2, gate=70.0))) == []

    def test_prune_then_solve(self):
        rng = np.random.default_rng(3)
        checked = 0
        for g in feasible_instances(80, seed0=400):
            if not g.detections:
                continue
            dets = [Detection(d.frame, d.det_id, (float(rng.uniform(0, 300)), 0, 5, 5),
                              d.feature) for d in g.detections]
            full = build_graph(dets, GraphParams(d=g.net.d, dt=g.dt))
            ref = brute_force_solve(full.net, max_nodes=20)
            if ref is None:
                continue
            used = {e for p in ref.paths for e in zip(p, p[1:])}
            lengths = [np.hypot(*np.subtract(
                [d for d in dets if full.exit[d.det_id] == u][0].center,
                [d for d in dets if full.entry[d.det_id] == v][0].center))
                for (u, v) in used if full.roles[(u, v)] == TRANSITION]
            gate = max(lengths, default=0.0) + 1.0
            pruned = prune(full, gate)
            if all(e in pruned.net.capacities for e in used):
                res = solve(pruned.net)
                assert res.value == ref.objective
                checked += 1
        assert checked >= 20


class TestBatches:
    def test_single_batch(self):
        dets = [det(f, f) for f in range(1, 6)]
        batches = split_batches(dets, GraphParams(d=1, dt=1, batch=10))
        assert len(batches) == 1
        ts = TrackSet({i: 1 for i in range(1, 6)})
        assert stitch(batches, [ts]).assignment == ts.assignment

    def test_windows_and_empty(self):
        dets = [det(f, f) for f in (1, 2, 3, 9, 10)]
        batches = split_batches(dets, GraphParams(d=1, dt=1, batch=3))
        assert [[d.frame for d in b] for b in batches] == [[1, 2, 3], [9], [10]]

    def test_orthogonal_identities_preserved(self):
        a, b = (1.0, 0.0), (0.0, 1.0)
        dets = [det(f, 10 * f + j, feat=(a, b)[j], gt=j + 1) for f in range(1, 7) for j in (0, 1)]
        p = GraphParams(d=2, dt=1, batch=3)
        batches = split_batches(dets, p)
        # label the second batch in swapped order on purpose
        ts = [TrackSet({d.det_id: d.det_id % 10 + 1 for d in batches[0]}),
              TrackSet({d.det_id: 2 - d.det_id % 10 for d in batches[1]})]
        out = stitch(batches, ts)
        for j in (0, 1):
            assert len({out.assignment[10 * f + j] for f in range(1, 7)}) == 1
        assert out.n_tracks == 2

    def test_fresh_ids_for_unmatched(self):
        dets = [det(1, 1, feat=(1.0, 0.0)), det(5, 2, feat=(1.0, 0.0)), det(5, 3, feat=(0.0, 1.0))]
        batches = split_batches(dets, GraphParams(d=1, dt=1, batch=4))
        out = stitch(batches, [TrackSet({1: 1}), TrackSet({2: 1, 3: 2})])
        assert out.assignment == {1: 1, 2: 1, 3: 2}

    def test_batch_d(self):
        p = GraphParams(d=5)
        assert batch_d([det(1, 1, gt=3), det(2, 2, gt=3), det(2, 3, gt=4)], p) == 2
        assert batch_d([det(1, 1, gt=3), det(2, 2)], p) == 5


def test_decoded_tracks_respect_window():
    for g in feasible_instances(60, seed0=800):
        res = solve(g.net)
        if res.solution is None:
            continue
        ts = decode(g, res.solution)
        frame = {d.det_id: d.frame for d in g.detections}
        assert set(ts.assignment) == set(frame)
        assert sorted(set(ts.assignment.values())) == list(range(1, g.net.d + 1))
        for ids in ts.tracks().values():
            fr = sorted(frame[i] for i in ids)
            assert all(1 <= b - a <= g.dt for a, b in zip(fr, fr[1:]))
