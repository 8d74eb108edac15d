"""Identity-switch evaluation for tracks built on ground-truth boxes."""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .mot_graph import Detection, TrackSet

SWEEP_COLUMNS = ("method", "sigma", "mean_idsw_norm", "std", "seeds")


@dataclass
class MetricsReport:
    idsw_per_frame: dict[int, int]
    gt_per_frame: dict[int, int]
    idsw_norm: float
    total_tracks: int
    n_identities: int
    switches: int = field(init=False)
    gt_boxes: int = field(init=False)

    def __post_init__(self):
        self.switches = sum(self.idsw_per_frame.values())
        self.gt_boxes = sum(self.gt_per_frame.values())

    def to_json(self) -> str:
        data = asdict(self)
        data["idsw_per_frame"] = {str(f): c for f, c in sorted(self.idsw_per_frame.items())}
        data["gt_per_frame"] = {str(f): c for f, c in sorted(self.gt_per_frame.items())}
        return json.dumps(data, indent=2, sort_keys=True)


def idsw_norm(gt: Sequence[Detection], pred: TrackSet) -> MetricsReport:
    """Identity switches over all frames divided by the number of GT boxes.

    Detections are the GT boxes themselves, so matching is the identity map.
    For every GT identity, a switch is counted at a frame when its predicted
    track differs from the one at its previous appearance; first appearances
    never count.
    """
    by_id = {d.det_id: d for d in gt}
    if len(by_id) != len(gt):
        raise ValueError("duplicate detection ids in ground truth")
    unknown = sorted(set(pred.assignment) - set(by_id))
    if unknown:
        raise ValueError(f"predicted detections absent from ground truth: {unknown[:5]}")
    missing = sorted(set(by_id) - set(pred.assignment))
    if missing:
        raise ValueError(f"ground-truth detections without a track: {missing[:5]}")
    if any(d.gt_id is None for d in gt):
        raise ValueError("every ground-truth detection needs an identity")

    gt_per_frame: dict[int, int] = {}
    sw_per_frame: dict[int, int] = {}
    last_track: dict[int, int] = {}
    for det in sorted(gt, key=lambda d: (d.frame, d.det_id)):
        gt_per_frame[det.frame] = gt_per_frame.get(det.frame, 0) + 1
        sw_per_frame.setdefault(det.frame, 0)
        trk = pred.assignment[det.det_id]
        prev = last_track.get(det.gt_id)
        if prev is not None and prev != trk:
            sw_per_frame[det.frame] += 1
        last_track[det.gt_id] = trk
    total = sum(gt_per_frame.values())
    switches = sum(sw_per_frame.values())
    return MetricsReport(sw_per_frame, gt_per_frame, switches / total if total else 0.0,
                         pred.n_tracks, len(last_track))


@dataclass(frozen=True)
class SweepRow:
    method: str
    sigma: float
    mean_idsw_norm: float
    std: float
    seeds: int


def sweep_report(results: Iterable[tuple[str, float, int, float]]) -> list[SweepRow]:
    """Aggregate ``(method, sigma, seed, idsw_norm)`` records, one row per (method, sigma).

    ``std`` is the population standard deviation over seeds.
    """
    cells: dict[tuple[str, float], dict[int, float]] = {}
    for method, sigma, seed, value in results:
        cell = cells.setdefault((method, float(sigma)), {})
        if seed in cell:
            raise ValueError(f"duplicate seed {seed} for {method} at sigma={sigma}")
        cell[seed] = float(value)
    rows = []
    for (method, sigma), by_seed in sorted(cells.items()):
        vals = [by_seed[s] for s in sorted(by_seed)]
        rows.append(SweepRow(method, sigma, statistics.fmean(vals), statistics.pstdev(vals),
                             len(vals)))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([r.method, repr(r.sigma), repr(r.mean_idsw_norm), repr(r.std), r.seeds])
    return buf.getvalue()


def sweep_json(rows: Sequence[SweepRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2)


def lookup_rows(rows: Sequence[SweepRow]) -> Mapping[tuple[str, float], SweepRow]:
    return {(r.method, r.sigma): r for r in rows}
