"""Rebuild every file in this directory from code.

    python3 fixtures/regenerate.py

Objectives in expected.json come from the branch-and-bound solver and are
checked against HiGHS by tests/test_lp_export.py.
"""

import json
from pathlib import Path

import numpy as np

from nsflow import solve
from nsflow.features import crossing_scenario, generate_synthetic
from nsflow.formats import atomic_write, detections_csv, features_csv, network_to_json
from nsflow.instances import crossing_pair, random_tracking_instance, single_path, two_paths
from nsflow.lp_export import export_lp

HERE = Path(__file__).resolve().parent


def random_instance():
    # first seed whose random graph has d >= 2 and a feasible cover
    for seed in range(1000):
        g = random_tracking_instance(np.random.default_rng(seed), max_dets=8, max_k=3)
        if g.net.d >= 2 and len(g.detections) >= 6 and solve(g.net).solution is not None:
            return seed, g.net
    raise RuntimeError("no suitable instance")


def main():
    atomic_write(HERE / "two_paths.json", network_to_json(two_paths()))

    seed, rnd = random_instance()
    nets = {
        "nonseparable": single_path(((0.5, 0.2), (0.1, 0.9))),
        "crossing_pair": crossing_pair().net,
        "random_tracking": rnd,
    }
    expected = {}
    for name, net in nets.items():
        atomic_write(HERE / "lp" / f"{name}.json", network_to_json(net))
        atomic_write(HERE / "lp" / f"{name}.lp", export_lp(net))
        expected[name] = solve(net).value
    expected["random_tracking_seed"] = seed
    atomic_write(HERE / "lp" / "expected.json", json.dumps(expected, indent=2) + "\n")

    dets = generate_synthetic(crossing_scenario(0, 0.0))
    atomic_write(HERE / "crossing" / "dets.csv", detections_csv(dets))
    atomic_write(HERE / "crossing" / "features.csv", features_csv(dets))
    atomic_write(HERE / "crossing" / "spec.json",
                 json.dumps({"scenario": "crossing", "n_objects": 3, "n_frames": 12, "k": 24,
                             "n_stable": 6, "dt": 3}, indent=2) + "\n")


if __name__ == "__main__":
    main()
