import dataclasses

import pytest

from nsflow.bnb import Status
from nsflow.features import crossing_scenario, generate_synthetic
from nsflow.metrics import idsw_norm
from nsflow.mot_graph import Detection, GraphParams, TrackSet
from nsflow.pipeline import (InfeasibleError, SweepConfig, TrackOptions, feature_selection_hits,
                             run_cell, run_sweep, track)


@pytest.mark.parametrize("method", ["vector", "scalar"])
def test_clean_crossing(method):
    dets = generate_synthetic(crossing_scenario(1))
    tracks, statuses = track(dets, GraphParams(d=3), TrackOptions(method))
    assert statuses == [Status.OPTIMAL]
    assert idsw_norm(dets, tracks).idsw_norm == 0.0


def test_batches_and_jobs_agree():
    dets = generate_synthetic(crossing_scenario(2, 0.3))
    p = GraphParams(d=3, dt=2, batch=4)
    one, _ = track(dets, p, TrackOptions("vector"), jobs=1)
    two, st = track(dets, p, TrackOptions("vector"), jobs=2)
    assert one == two and len(st) == 3


def test_infeasible():
    dets = [Detection(1, 1, (0, 0, 5, 5), (1.0,)), Detection(1, 2, (0, 0, 5, 5), (1.0,))]
    with pytest.raises(InfeasibleError):
        track(dets, GraphParams(d=1), d_from_gt=False)


def test_bad_method():
    with pytest.raises(ValueError):
        TrackOptions("magic")


def test_feature_selection_hits():
    spec = crossing_scenario(0, 0.0)
    dets = generate_synthetic(spec)
    perfect = TrackSet({d.det_id: d.gt_id for d in dets})
    assert feature_selection_hits(dets, perfect, spec) == (3, 3)
    # crediting each object with another object's stable dimensions: no hits
    rotated = dataclasses.replace(spec, stable_dims=spec.stable_dims[1:] + spec.stable_dims[:1])
    assert feature_selection_hits(dets, perfect, rotated) == (0, 3)


def test_run_cell_and_sweep():
    cfg = SweepConfig()
    cells = run_cell(cfg, 0.0, 3)
    assert [c.method for c in cells] == ["scalar", "vector"]
    assert all(c.idsw_norm == 0.0 and c.gt_boxes == 36 for c in cells)
    cells, rows = run_sweep(cfg, [0.0, 0.1], [0, 1])
    assert [(r.method, r.sigma, r.seeds) for r in rows] == [
        ("scalar", 0.0, 2), ("scalar", 0.1, 2), ("vector", 0.0, 2), ("vector", 0.1, 2)]


def test_sweep_config():
    assert SweepConfig.from_dict({"scenario": "crossing", "k": 30}).k == 30
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"scenario": "spiral"})
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"colour": 3})
    explicit = SweepConfig.from_dict({
        "scenario": "explicit", "gt_features": [[0.9, 0.1], [0.1, 0.9]],
        "starts": [[0, 0], [100, 0]], "velocities": [[10, 0], [-10, 0]], "n_frames": 4,
        "stable_dims": [[0], [1]], "dt": 1})
    spec = explicit.spec(5, 0.2)
    assert spec.seed == 5 and spec.sigma == 0.2 and spec.stable_dims == ((0,), (1,))
    cells = run_cell(explicit, 0.0, 0)
    assert all(c.idsw_norm == 0.0 for c in cells)
