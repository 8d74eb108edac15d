"""Readers and writers for the on-disk formats.

* detections: MOT ground-truth CSV ``frame,id,bb_left,bb_top,bb_width,bb_height,conf,class,visibility``
* features: ``frame,id,f_1,...,f_k`` keyed by the detection row's ``id`` column
* tracks: ``frame,track_id,det_id`` with a header row
* networks: JSON ``{"source", "sink", "k", "d", "nodes", "edges": [{"u", "v", "capacity"}]}``
  where ``capacity`` is a list of reals or the string ``"inf"``
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .flowcore import Finite, FlowNetwork, Solution, StructuralError
from .mot_graph import Detection, TrackSet


class InputError(ValueError):
    """Malformed input file; the message names the file and line."""


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows(path) -> Iterable[tuple[int, list[str]]]:
    """Non-empty CSV rows with their 1-based line numbers; a leading header is skipped."""
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [c.strip() for c in row]
            if not row or all(not c for c in row):
                continue
            if lineno == 1 and row[0] and not _is_number(row[0]):
                continue
            yield lineno, row


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_detections(path, mot_filter: bool = False) -> list[Detection]:
    """Detections from a MOT-style CSV.

    ``det_id`` is the 1-based index of the data row; the ``id`` column becomes
    the ground-truth identity (negative values mean unknown).  With
    ``mot_filter`` rows whose ``conf`` is 0 or whose ``class`` is not 1 are
    dropped, as in MOT16 evaluation.
    """
    dets = []
    for n, (lineno, row) in enumerate(_rows(path), start=1):
        if len(row) < 6:
            raise InputError(f"{path}:{lineno}: expected at least 6 columns, got {len(row)}")
        try:
            frame = int(float(row[0]))
            ident = int(float(row[1]))
            box = tuple(float(x) for x in row[2:6])
            conf = float(row[6]) if len(row) > 6 else 1.0
            cls = int(float(row[7])) if len(row) > 7 else 1
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if mot_filter and (conf == 0 or cls != 1):
            continue
        try:
            dets.append(Detection(frame, n, box, (), ident if ident >= 0 else None))
        except StructuralError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    return dets


def read_features(path) -> dict[tuple[int, int], tuple[float, ...]]:
    out = {}
    k = None
    for lineno, row in _rows(path):
        if len(row) < 3:
            raise InputError(f"{path}:{lineno}: expected frame,id,f_1,...")
        try:
            key = (int(float(row[0])), int(float(row[1])))
            feat = tuple(float(x) for x in row[2:])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if k is None:
            k = len(feat)
        elif len(feat) != k:
            raise InputError(f"{path}:{lineno}: {len(feat)} features, earlier rows have {k}")
        if any(x < 0 or not np.isfinite(x) for x in feat):
            raise InputError(f"{path}:{lineno}: features must be finite and >= 0")
        if key in out:
            raise InputError(f"{path}:{lineno}: duplicate (frame, id) {key}")
        out[key] = feat
    return out


def attach_features(dets: Sequence[Detection], feats: Mapping[tuple[int, int], Sequence[float]],
                    ) -> list[Detection]:
    out = []
    for d in dets:
        key = (d.frame, d.gt_id)
        if d.gt_id is None or key not in feats:
            raise InputError(f"no feature row for detection {d.det_id} (frame {d.frame}, id {d.gt_id})")
        out.append(Detection(d.frame, d.det_id, d.box, tuple(feats[key]), d.gt_id))
    return out


def detections_csv(dets: Sequence[Detection]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for d in sorted(dets, key=lambda d: d.det_id):
        w.writerow([d.frame, -1 if d.gt_id is None else d.gt_id, *map(repr, d.box), 1, 1, 1])
    return buf.getvalue()


def features_csv(dets: Sequence[Detection]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for d in sorted(dets, key=lambda d: d.det_id):
        w.writerow([d.frame, d.gt_id, *map(repr, d.feature)])
    return buf.getvalue()


def tracks_csv(dets: Sequence[Detection], tracks: TrackSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["frame", "track_id", "det_id"])
    for d in sorted(dets, key=lambda d: (d.frame, d.det_id)):
        w.writerow([d.frame, tracks.assignment[d.det_id], d.det_id])
    return buf.getvalue()


def read_tracks(path) -> TrackSet:
    assignment = {}
    for lineno, row in _rows(path):
        if len(row) != 3:
            raise InputError(f"{path}:{lineno}: expected frame,track_id,det_id")
        try:
            det, trk = int(row[2]), int(row[1])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if det in assignment:
            raise InputError(f"{path}:{lineno}: detection {det} listed twice")
        assignment[det] = trk
    return TrackSet(assignment)


def network_to_json(net: FlowNetwork) -> str:
    edges = []
    for u, v in net.edges:
        cap = net.capacity(u, v)
        edges.append({"u": u, "v": v,
                      "capacity": list(cap.values) if isinstance(cap, Finite) else "inf"})
    return json.dumps({"source": net.source, "sink": net.sink, "k": net.k, "d": net.d,
                       "nodes": list(net.nodes), "edges": edges}, indent=2) + "\n"


def network_from_json(text: str, where: str = "<graph>") -> FlowNetwork:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}:{exc.lineno}: {exc.msg}") from None
    try:
        edges = [(e["u"], e["v"], e["capacity"]) for e in data["edges"]]
        return FlowNetwork(edges, data.get("source", "s"), data.get("sink", "t"),
                           k=data["k"], d=data["d"], nodes=data.get("nodes"),
                           layers=data.get("layers"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"{where}: missing or malformed field {exc}") from None
    except StructuralError as exc:
        raise InputError(f"{where}: {exc}") from None


def solution_to_dict(sol: Solution) -> dict:
    edges = []
    for (u, v) in sorted(sol.flows):
        edges.append({"u": u, "v": v, "active": bool(sol.active[(u, v)]),
                      "flow": [float(x) for x in sol.flows[(u, v)]]})
    return {"objective": sol.objective,
            "paths": [list(p) for p in sol.paths] if sol.paths is not None else None,
            "edges": edges}
