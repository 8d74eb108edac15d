"""End-to-end tracking and noise sweeps built from the other modules."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bnb import SolverConfig, Status, solve
from .features import SyntheticSpec, crossing_scenario, generate_synthetic
from .flowcore import FlowError, validate
from .metrics import idsw_norm, sweep_report
from .mot_graph import (Detection, GraphParams, TrackSet, batch_d, build_graph, decode,
                        split_batches, stitch)
from .scalar_baseline import DEFAULT_BETA, scalar_costs, solve_scalar

METHODS = ("scalar", "vector")


class InfeasibleError(FlowError):
    pass


@dataclass(frozen=True)
class TrackOptions:
    method: str = "vector"
    similarity: str = "cosine"
    beta: float = DEFAULT_BETA
    time_limit: float = 60.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")


def _solve_batch(args):
    batch, params, opts = args
    graph = build_graph(batch, params)
    cfg = SolverConfig(time_limit=opts.time_limit)
    if opts.method == "vector":
        res = solve(graph.net, cfg)
    else:
        res = solve_scalar(graph, scalar_costs(graph, opts.similarity, opts.beta), cfg=cfg).result
    if res.solution is None:
        raise InfeasibleError(f"no feasible cover for frames {batch[0].frame}-{batch[-1].frame} "
                              f"with d={params.d}")
    problems = validate(graph.net, res.solution)
    if problems:
        raise FlowError(f"solver returned an infeasible solution: {problems[:3]}")
    return decode(graph, res.solution), res.status


def track(dets: Sequence[Detection], params: GraphParams, opts: TrackOptions = TrackOptions(),
          jobs: int = 1, d_from_gt: bool = True) -> tuple[TrackSet, list[Status]]:
    """Track ``dets`` batch by batch and stitch the batches together.

    With ``d_from_gt`` each batch uses its number of ground-truth identities
    as the track count when every detection carries one; otherwise ``params.d``.
    Returns the global track set and the solver status of every batch.
    """
    batches = split_batches(dets, params)
    tasks = [(b, dataclasses.replace(params, d=batch_d(b, params)) if d_from_gt else params, opts)
             for b in batches]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_batch, tasks))
    else:
        results = [_solve_batch(t) for t in tasks]
    tracks = stitch(batches, [r[0] for r in results])
    return tracks, [r[1] for r in results]


def feature_selection_hits(dets: Sequence[Detection], tracks: TrackSet, spec: SyntheticSpec,
                           ) -> tuple[int, int]:
    """Count tracks whose largest per-dimension minimum sits on a stable dimension
    of the ground-truth object most of the track belongs to."""
    by_id = {d.det_id: d for d in dets}
    ids = spec.object_ids or tuple(range(1, spec.n_objects + 1))
    hits = 0
    members = tracks.tracks()
    if not spec.stable_dims:
        return 0, len(members)
    for det_ids in members.values():
        feats = np.array([by_id[i].feature for i in det_ids])
        best_dim = int(np.argmax(feats.min(axis=0)))
        gts = [by_id[i].gt_id for i in det_ids]
        owner = max(set(gts), key=lambda g: (gts.count(g), -g))
        if best_dim in spec.stable_dims[ids.index(owner)]:
            hits += 1
    return hits, len(members)


@dataclass(frozen=True)
class SweepConfig:
    """Scenario and tracker settings for a noise sweep."""

    scenario: str = "crossing"
    n_objects: int = 3
    n_frames: int = 12
    k: int = 24
    n_stable: int = 6
    stable_scale: float = 0.1
    speed: float = 20.0
    dt: int = 3
    gate: float | None = None
    batch: int | None = None
    similarity: str = "cosine"
    beta: float = DEFAULT_BETA
    time_limit: float = 60.0
    explicit: dict | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        scenario = data.pop("scenario", "crossing")
        if scenario == "explicit":
            known = {f.name for f in dataclasses.fields(cls)}
            explicit = {k: data.pop(k) for k in list(data) if k not in known}
            return cls(scenario=scenario, explicit=explicit, **data)
        if scenario != "crossing":
            raise ValueError(f"unknown scenario {scenario!r}")
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown sweep settings: {sorted(unknown)}")
        return cls(scenario=scenario, **data)

    def spec(self, seed: int, sigma: float) -> SyntheticSpec:
        if self.scenario == "crossing":
            return crossing_scenario(seed, sigma, n_objects=self.n_objects,
                                     n_frames=self.n_frames, k=self.k, n_stable=self.n_stable,
                                     stable_scale=self.stable_scale, speed=self.speed)
        ex = dict(self.explicit or {})
        for key in ("gt_features", "starts", "velocities", "stable_dims"):
            if key in ex:
                ex[key] = tuple(tuple(x) for x in ex[key])
        for key in ("box_size", "object_ids"):
            if key in ex and ex[key] is not None:
                ex[key] = tuple(ex[key])
        return SyntheticSpec(**{**ex, "n_frames": self.n_frames, "stable_scale": self.stable_scale,
                                "seed": seed, "sigma": sigma})


@dataclass(frozen=True)
class CellResult:
    method: str
    sigma: float
    seed: int
    idsw_norm: float
    switches: int
    gt_boxes: int
    statuses: tuple[str, ...]
    fs_hits: int = 0
    fs_tracks: int = 0


def run_cell(cfg: SweepConfig, sigma: float, seed: int) -> list[CellResult]:
    spec = cfg.spec(seed, sigma)
    dets = generate_synthetic(spec)
    params = GraphParams(d=spec.n_objects, dt=cfg.dt, gate=cfg.gate, batch=cfg.batch)
    out = []
    for method in METHODS:
        opts = TrackOptions(method, cfg.similarity, cfg.beta, cfg.time_limit)
        tracks, statuses = track(dets, params, opts)
        rep = idsw_norm(dets, tracks)
        hits, total = feature_selection_hits(dets, tracks, spec) if method == "vector" else (0, 0)
        out.append(CellResult(method, float(sigma), seed, rep.idsw_norm, rep.switches,
                              rep.gt_boxes, tuple(s.value for s in statuses), hits, total))
    return out


def _cell(args):
    return run_cell(*args)


def run_sweep(cfg: SweepConfig, sigmas: Sequence[float], seeds: Sequence[int], jobs: int = 1):
    """All (sigma, seed) cells for both methods, plus the aggregate table."""
    tasks = [(cfg, float(s), int(seed)) for s in sigmas for seed in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = [r for rs in pool.map(_cell, tasks) for r in rs]
    else:
        cells = [r for t in tasks for r in _cell(t)]
    cells.sort(key=lambda c: (c.method, c.sigma, c.seed))
    rows = sweep_report((c.method, c.sigma, c.seed, c.idsw_norm) for c in cells)
    return cells, rows
