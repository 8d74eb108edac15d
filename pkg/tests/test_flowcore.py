import math

import numpy as np
import pytest

from nsflow.flowcore import (INF, Finite, FlowNetwork, PathCover, Solution, StructuralError,
                             UnboundedError, as_capvec, cover_value, flow_from_paths, objective,
                             validate)
from nsflow.instances import single_path, two_paths
from nsflow.oracle import enumerate_covers

from helpers import random_instances


def _manual(net, flows, active):
    flows = {e: np.asarray(flows.get(e, np.zeros(net.k)), dtype=float) for e in net.edges}
    active = {e: active.get(e, False) for e in net.edges}
    sol = Solution(flows, active, 0.0)
    return Solution(flows, active, objective(sol))


class TestCapacities:
    def test_finite_rejects_negative_and_nan(self):
        with pytest.raises(StructuralError):
            Finite((0.1, -0.2))
        with pytest.raises(StructuralError):
            Finite((math.nan,))
        with pytest.raises(StructuralError):
            Finite(())

    def test_as_capvec(self):
        assert as_capvec("inf") is INF
        assert as_capvec(None) is INF
        assert as_capvec([1, 2]) == Finite((1.0, 2.0))
        with pytest.raises(StructuralError):
            as_capvec("big")


class TestNetwork:
    def test_rejects_cycle(self):
        with pytest.raises(StructuralError):
            FlowNetwork({("s", "a"): (1,), ("a", "b"): INF, ("b", "a"): INF, ("b", "t"): INF},
                        k=1, d=1)

    @pytest.mark.parametrize("edges", [
        {("s", "t"): (1,)},
        {("s", "a"): (1,), ("a", "a"): INF, ("a", "t"): INF},
        {("s", "a"): (1,), ("a", "t"): INF, ("a", "s"): INF},
        {("s", "a"): (1,), ("a", "t"): INF, ("t", "b"): INF},
    ])
    def test_structural_rules(self, edges):
        with pytest.raises(StructuralError):
            FlowNetwork(edges, k=1, d=1)

    def test_mixed_k_rejected(self):
        with pytest.raises(StructuralError):
            FlowNetwork({("s", "a"): (1, 2), ("a", "t"): (1,)}, k=2, d=1)

    def test_bad_k_d(self):
        with pytest.raises(StructuralError):
            FlowNetwork({("s", "a"): (1,), ("a", "t"): INF}, k=0, d=1)
        with pytest.raises(StructuralError):
            FlowNetwork({("s", "a"): (1,), ("a", "t"): INF}, k=1, d=0)

    def test_topological_order_is_deterministic(self):
        net = two_paths()
        assert net.topological_order[0] == "s" and net.topological_order[-1] == "t"
        assert list(net.topological_order) == list(two_paths().topological_order)


class TestValidate:
    def setup_method(self):
        self.net = single_path(((0.5, 0.2),))
        self.e1, self.e2 = ("s", "a"), ("a", "t")

    def test_saturated_single_path_is_feasible(self):
        f = (0.5, 0.2)
        sol = _manual(self.net, {self.e1: f, self.e2: f}, {self.e1: True, self.e2: True})
        assert validate(self.net, sol) == []

    def test_capacity_violation(self):
        sol = _manual(self.net, {self.e1: (0.6, 0.2), self.e2: (0.5, 0.2)},
                      {self.e1: True, self.e2: True})
        out = validate(self.net, sol)
        assert [(v.constraint, v.location) for v in out if v.constraint == "capacity"] == \
            [("capacity", self.e1)]

    def test_flow_on_inactive_edge(self):
        f = (0.5, 0.2)
        sol = _manual(self.net, {self.e1: f, self.e2: f}, {self.e1: True, self.e2: False})
        out = validate(self.net, sol)
        assert ("capacity", self.e2) in [(v.constraint, v.location) for v in out]

    def test_each_family_reported(self):
        net = two_paths()
        sol = _manual(net, {("s", "a"): (-0.1, 0.0), ("a", "t"): (0.5, 0.0)},
                      {("s", "a"): True, ("a", "t"): True})
        kinds = {v.constraint for v in validate(net, sol)}
        assert {"flow conservation", "node count", "total count", "non-negativity"} <= kinds

    def test_objective_mismatch(self):
        sol = flow_from_paths(self.net, [("s", "a", "t")])
        bad = Solution(sol.flows, sol.active, sol.objective + 1.0)
        assert [v.constraint for v in validate(self.net, bad)] == ["objective"]

    def test_shape_mismatch_is_structural(self):
        sol = flow_from_paths(self.net, [("s", "a", "t")])
        flows = dict(sol.flows)
        flows[self.e1] = np.zeros(3)
        with pytest.raises(StructuralError):
            validate(self.net, Solution(flows, sol.active, sol.objective))
        with pytest.raises(StructuralError):
            validate(self.net, Solution({self.e1: np.zeros(2)}, {self.e1: True}, 0.0))


class TestFlowFromPaths:
    def test_single_bottleneck(self):
        sol = flow_from_paths(single_path(((0.5, 0.2),)), [("s", "a", "t")])
        assert sol.objective == pytest.approx(0.7, abs=1e-15)
        np.testing.assert_array_equal(sol.flows[("s", "a")], [0.5, 0.2])

    def test_non_separable(self):
        net = single_path(((0.5, 0.2), (0.1, 0.9)))
        sol = flow_from_paths(net, [("s", "n0", "n1", "n2", "t")])
        np.testing.assert_array_equal(sol.flows[("n0", "n1")], [0.1, 0.2])
        assert sol.objective == pytest.approx(0.3, abs=1e-15)
        assert validate(net, sol) == []

    def test_two_paths(self):
        net = two_paths()
        sol = flow_from_paths(net, [("s", "a", "t"), ("s", "b", "t")])
        assert sol.objective == 2.0
        assert validate(net, sol) == []

    def test_unbounded(self):
        net = FlowNetwork({("s", "a"): INF, ("a", "t"): INF, ("s", "b"): (1,), ("b", "t"): INF},
                          k=1, d=2)
        with pytest.raises(UnboundedError):
            flow_from_paths(net, [("s", "a", "t"), ("s", "b", "t")])

    def test_invalid_cover(self):
        with pytest.raises(StructuralError):
            flow_from_paths(two_paths(), [("s", "a", "t")])

    def test_all_covers_validate_clean(self):
        for g in random_instances(60, seed0=100):
            for cover in enumerate_covers(g.net, max_nodes=20):
                assert validate(g.net, flow_from_paths(g.net, cover)) == []

    def test_scaling_and_permutation(self):
        rng = np.random.default_rng(5)
        for g in random_instances(40, seed0=300):
            net = g.net
            perm = rng.permutation(net.k)
            permuted = FlowNetwork(
                {e: (c if c is INF else Finite(tuple(np.asarray(c.values)[perm])))
                 for e, c in net.capacities.items()}, k=net.k, d=net.d)
            for cover in enumerate_covers(net, max_nodes=20):
                v = cover_value(net, cover)
                assert cover_value(net.scaled(2.0), cover) == pytest.approx(2 * v, rel=1e-12)
                assert cover_value(permuted, cover) == pytest.approx(v, rel=1e-12)

    def test_monotone_in_capacity(self):
        for g in random_instances(30, seed0=500):
            net = g.net
            covers = list(enumerate_covers(net, max_nodes=20))
            if not covers:
                continue
            e = next(e for e, c in sorted(net.capacities.items()) if c is not INF)
            caps = dict(net.capacities)
            vals = list(caps[e].values)
            vals[0] += 0.25
            caps[e] = Finite(tuple(vals))
            raised = FlowNetwork(caps, k=net.k, d=net.d)
            for cover in covers:
                assert cover_value(raised, cover) >= cover_value(net, cover)


def test_objective_examples():
    net = two_paths()
    zero = _manual(net, {}, {})
    assert objective(zero) == 0
    one = _manual(single_path(((0.5, 0.2),)), {("s", "a"): (0.5, 0.2)}, {})
    assert objective(one) == pytest.approx(0.7)
    two = _manual(net, {("s", "a"): (1, 0), ("s", "b"): (0, 1)}, {})
    assert objective(two) == 2.0


def test_path_cover_canonical():
    a = PathCover((("s", "b", "t"), ("s", "a", "t")))
    b = PathCover((("s", "a", "t"), ("s", "b", "t")))
    assert a.key == b.key and a.paths[0] == ("s", "a", "t")
