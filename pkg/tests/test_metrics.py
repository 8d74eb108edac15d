import csv
import io
import json
import random

import pytest

from nsflow.metrics import SWEEP_COLUMNS, idsw_norm, lookup_rows, sweep_csv, sweep_json, sweep_report
from nsflow.mot_graph import Detection, TrackSet


def gt_track(frames, gt_id=1, start=1):
    return [Detection(f, start + i, (0, 0, 5, 5), (), gt_id) for i, f in enumerate(frames)]


def test_one_switch():
    gt = gt_track([1, 2, 3])
    rep = idsw_norm(gt, TrackSet({1: 1, 2: 2, 3: 2}))
    assert rep.idsw_norm == pytest.approx(1 / 3)
    assert rep.switches == 1 and rep.gt_boxes == 3
    assert rep.idsw_per_frame == {1: 0, 2: 1, 3: 0}


def test_perfect():
    gt = gt_track([1, 2, 3]) + gt_track([1, 2, 3], gt_id=2, start=10)
    pred = TrackSet({d.det_id: d.gt_id for d in gt})
    rep = idsw_norm(gt, pred)
    assert rep.idsw_norm == 0 and rep.total_tracks == 2 and rep.n_identities == 2


def test_alternating():
    gt = gt_track([1, 2, 3, 4])
    assert idsw_norm(gt, TrackSet({1: 1, 2: 2, 3: 1, 4: 2})).idsw_norm == 0.75


def test_errors():
    gt = gt_track([1, 2])
    with pytest.raises(ValueError):
        idsw_norm(gt, TrackSet({1: 1, 2: 1, 99: 1}))
    with pytest.raises(ValueError):
        idsw_norm(gt, TrackSet({1: 1}))
    with pytest.raises(ValueError):
        idsw_norm([Detection(1, 1, (0, 0, 5, 5))], TrackSet({1: 1}))


def test_relabel_invariant_and_bounded():
    rng = random.Random(0)
    for _ in range(100):
        gt = []
        for obj in range(1, 4):
            frames = sorted(rng.sample(range(1, 10), rng.randint(1, 6)))
            gt += gt_track(frames, obj, start=100 * obj)
        pred = {d.det_id: rng.randint(1, 4) for d in gt}
        perm = dict(zip(range(1, 5), rng.sample(range(1, 5), 4)))
        a = idsw_norm(gt, TrackSet(pred))
        b = idsw_norm(gt, TrackSet({i: perm[t] for i, t in pred.items()}))
        assert a.idsw_norm == b.idsw_norm
        total = len(gt)
        assert 0 <= a.idsw_norm <= (total - a.n_identities) / total


def test_report_json():
    rep = idsw_norm(gt_track([1, 2]), TrackSet({1: 1, 2: 2}))
    data = json.loads(rep.to_json())
    assert data["idsw_norm"] == 0.5 and data["idsw_per_frame"] == {"1": 0, "2": 1}


class TestSweep:
    def test_single_seed_std_zero(self):
        rows = sweep_report([("vector", 0.1, 0, 0.25)])
        assert rows[0].std == 0 and rows[0].seeds == 1

    def test_sorted_rows(self):
        recs = [(m, s, seed, 0.1 * seed) for m in ("vector", "scalar") for s in (0.4, 0.0)
                for seed in (2, 0, 1)]
        rows = sweep_report(recs)
        assert [(r.method, r.sigma) for r in rows] == [
            ("scalar", 0.0), ("scalar", 0.4), ("vector", 0.0), ("vector", 0.4)]
        assert rows[0].mean_idsw_norm == pytest.approx(0.1)
        assert rows[0].std == pytest.approx((2 / 3) ** 0.5 * 0.1)
        assert lookup_rows(rows)[("vector", 0.4)].seeds == 3

    def test_zero_grid(self):
        rows = sweep_report([(m, 0, s, 0.0) for m in ("scalar", "vector") for s in range(3)])
        assert [r.mean_idsw_norm for r in rows] == [0.0, 0.0]

    def test_duplicate_seed(self):
        with pytest.raises(ValueError):
            sweep_report([("vector", 0.0, 1, 0.0), ("vector", 0.0, 1, 0.1)])

    def test_formats(self):
        rows = sweep_report([("vector", 0.2, 0, 0.1), ("vector", 0.2, 1, 0.3)])
        table = list(csv.reader(io.StringIO(sweep_csv(rows))))
        assert tuple(table[0]) == SWEEP_COLUMNS
        assert table[1][0] == "vector" and float(table[1][2]) == pytest.approx(0.2)
        assert json.loads(sweep_json(rows))[0]["seeds"] == 2
