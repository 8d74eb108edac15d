"""Command-line front end.

Exit codes: 0 success, 1 infeasible instance, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bnb import SolverConfig, Status, solve
from .features import DEFAULT_BINS, add_noise, color_histogram, crop, read_image
from .flowcore import FlowError, validate
from .formats import (InputError, atomic_write, attach_features, network_from_json, read_detections,
                      read_features, read_tracks, solution_to_dict, tracks_csv)
from .lp_export import export_lp
from .metrics import idsw_norm, sweep_csv, sweep_json
from .mot_graph import Detection, GraphParams
from .pipeline import METHODS, InfeasibleError, SweepConfig, TrackOptions, run_sweep, track
from .scalar_baseline import DEFAULT_BETA, SIMILARITIES

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT = 0, 1, 2


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _cmd_solve(args) -> int:
    net = network_from_json(_read_text(args.graph), str(args.graph))
    res = solve(net, SolverConfig(time_limit=args.time_limit))
    if res.solution is None:
        print(f"status: {res.status.value}")
        print("no feasible path cover")
        return EXIT_INFEASIBLE
    problems = validate(net, res.solution)
    print(f"status: {res.status.value}")
    print(f"objective: {res.value!r}")
    for path in res.cover.paths:
        print("path: " + " -> ".join(path))
    print(f"nodes explored: {res.nodes}")
    print("validation: " + ("clean" if not problems else f"{len(problems)} violations"))
    for p in problems:
        print(f"  {p.constraint} at {p.location}: {p.detail}")
    if args.out:
        data = {"status": res.status.value, **solution_to_dict(res.solution),
                "violations": len(problems)}
        atomic_write(args.out, json.dumps(data, indent=2) + "\n")
    return EXIT_OK if not problems else EXIT_INFEASIBLE


def _image_features(dets, image_dir: Path, pattern: str, bins: int, sigma: float, seed: int):
    out = []
    cache: dict[int, object] = {}
    for det in dets:
        if det.frame not in cache:
            path = image_dir / pattern.format(frame=det.frame)
            if not path.exists():
                raise InputError(f"missing frame image {path}")
            img = read_image(path)
            if sigma > 0:
                img = add_noise(img, sigma, [seed, det.frame], mode="image")
            cache[det.frame] = img
        region = crop(cache[det.frame], det.box)
        if region.size == 0:
            raise InputError(f"detection {det.det_id} lies outside frame {det.frame}")
        out.append(Detection(det.frame, det.det_id, det.box, tuple(color_histogram(region, bins)),
                             det.gt_id))
    return out


def _cmd_track(args) -> int:
    dets = read_detections(args.dets, mot_filter=args.mot_filter)
    if not dets:
        raise InputError(f"{args.dets}: no detections")
    if args.features and args.images:
        raise InputError("--features and --images are mutually exclusive")
    if args.features:
        dets = attach_features(dets, read_features(args.features))
        if args.sigma > 0:
            dets = [Detection(d.frame, d.det_id, d.box,
                              tuple(add_noise(d.feature, args.sigma, [args.seed, d.det_id])), d.gt_id)
                    for d in dets]
    elif args.images:
        dets = _image_features(dets, Path(args.images), args.image_pattern, args.bins,
                               args.sigma, args.seed)
    else:
        raise InputError("track needs --features or --images")
    d = args.d if args.d is not None else len({x.gt_id for x in dets if x.gt_id is not None}) or 1
    params = GraphParams(d=d, dt=args.dt, gate=args.gate, batch=args.batch)
    opts = TrackOptions(args.method, args.similarity, args.beta, args.time_limit)
    tracks, statuses = track(dets, params, opts, jobs=args.jobs, d_from_gt=args.d is None)
    atomic_write(args.out, tracks_csv(dets, tracks))
    hit_limit = [s.value for s in statuses if s is not Status.OPTIMAL]
    print(f"{tracks.n_tracks} tracks over {len(dets)} detections -> {args.out}"
          + (f" (batches stopped early: {', '.join(hit_limit)})" if hit_limit else ""))
    return EXIT_OK


def _cmd_eval(args) -> int:
    gt = read_detections(args.gt, mot_filter=args.mot_filter)
    pred = read_tracks(args.tracks)
    try:
        rep = idsw_norm(gt, pred)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = rep.to_json() + "\n"
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        data = json.loads(_read_text(args.spec))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.spec}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{args.spec}: expected a JSON object")
    try:
        cfg = SweepConfig.from_dict(data)
        cfg.spec(args.seed, 0.0)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{args.spec}: {exc}") from None
    sigmas = _float_list(args.sigma_grid)
    seeds = list(range(args.seed, args.seed + args.seeds))
    cells, rows = run_sweep(cfg, sigmas, seeds, jobs=args.jobs)
    out = Path(args.out)
    atomic_write(out / "sweep.csv", sweep_csv(rows))
    atomic_write(out / "sweep.json", sweep_json(rows) + "\n")
    lines = ["method,sigma,seed,idsw_norm,switches,gt_boxes,fs_hits,fs_tracks,status"]
    for c in cells:
        lines.append(f"{c.method},{c.sigma!r},{c.seed},{c.idsw_norm!r},{c.switches},"
                     f"{c.gt_boxes},{c.fs_hits},{c.fs_tracks},{'|'.join(c.statuses)}")
    atomic_write(out / "runs.csv", "\n".join(lines) + "\n")
    for r in rows:
        print(f"{r.method:>6}  sigma={r.sigma:<5g} idsw_norm={r.mean_idsw_norm:.4f} "
              f"(std {r.std:.4f}, {r.seeds} seeds)")
    return EXIT_OK


def _cmd_export_lp(args) -> int:
    net = network_from_json(_read_text(args.graph), str(args.graph))
    atomic_write(args.out, export_lp(net))
    print(f"wrote {args.out}")
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad number list {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise InputError(f"need a non-empty list of non-negative numbers, got {text!r}")
    return vals


def _gate(text: str) -> float | None:
    if text.lower() in ("none", "off", "inf"):
        return None
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsflow", description="Tracking with non-separable vector flows.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
        p.add_argument("--time-limit", type=float, default=60.0,
                       help="solver time limit per graph in seconds (default 60)")

    p = sub.add_parser("solve", help="solve a flow network given as JSON")
    common(p)
    p.add_argument("--graph", help="network JSON file")
    p.add_argument("--out", help="also write the solution as JSON here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("track", help="track detections and write a tracks CSV")
    common(p)
    p.add_argument("--dets", help="MOT-style detections CSV")
    p.add_argument("--features", help="feature CSV: frame,id,f_1..f_k")
    p.add_argument("--images", help="directory of frame images; colour histograms become features")
    p.add_argument("--image-pattern", default="{frame:06d}.png",
                   help="frame file name pattern (default {frame:06d}.png)")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="histogram bins per channel")
    p.add_argument("--sigma", type=float, default=0.0,
                   help="Gaussian noise added to features (or pixels with --images)")
    p.add_argument("--dt", type=int, default=3, help="maximum frame gap of a transition")
    p.add_argument("--gate", type=_gate, default=None,
                   help="max centre distance per frame of gap; 'none' disables pruning")
    p.add_argument("--batch", type=int, default=None, help="batch width in frames")
    p.add_argument("--d", type=int, default=None,
                   help="number of tracks (default: distinct ids in the detections)")
    p.add_argument("--method", choices=METHODS, default="vector")
    p.add_argument("--similarity", choices=SIMILARITIES, default="cosine",
                   help="scalar method only")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA,
                   help="scalar method entry/exit cost")
    p.add_argument("--mot-filter", action="store_true",
                   help="drop rows with conf 0 or class != 1")
    p.add_argument("--jobs", type=int, default=1, help="parallel batch solves")
    p.add_argument("--out", help="tracks CSV to write")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("eval", help="identity switches of a tracks CSV against ground truth")
    common(p)
    p.add_argument("--gt", help="ground-truth CSV")
    p.add_argument("--tracks", help="tracks CSV from `track`")
    p.add_argument("--mot-filter", action="store_true")
    p.add_argument("--out", help="also write the report JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("synth", help="noise sweep on synthetic sequences, both methods")
    common(p)
    p.add_argument("--spec", help="scenario JSON")
    p.add_argument("--sigma-grid", default="0,0.05,0.1,0.2,0.4", help="comma-separated sigmas")
    p.add_argument("--seeds", type=int, default=20, help="seeds per sigma, starting at --seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep cells")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("export-lp", help="write the MILP of a network in LP format")
    common(p)
    p.add_argument("--graph", help="network JSON file")
    p.add_argument("--out", help="LP file to write")
    p.set_defaults(func=_cmd_export_lp)
    return parser


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment, quotes around values are stripped."""
    out = {}
    for lineno, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.replace("-", "_")] = value
    return out


_REQUIRED = {"solve": ("graph",), "track": ("dets", "out"), "eval": ("gt", "tracks"),
             "synth": ("spec", "out"), "export-lp": ("graph", "out")}


def _parse(parser: argparse.ArgumentParser, argv: list[str]):
    """Parse ``argv``; settings from ``--config`` fill in whatever the flags leave unset."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in read_config(args.config).items():
            action = actions.get(key)
            if action is None or key in ("config", "help"):
                raise InputError(f"{args.config}: unknown setting {key!r} for {args.command}")
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
                continue
            try:
                defaults[key] = action.type(value) if action.type else value
            except (TypeError, ValueError):
                raise InputError(f"{args.config}: bad value for {key}: {value!r}") from None
            if action.choices and defaults[key] not in action.choices:
                raise InputError(f"{args.config}: {key} must be one of {list(action.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    missing = [k for k in _REQUIRED[args.command] if getattr(args, k) is None]
    if missing:
        raise InputError(f"{args.command}: missing " + ", ".join("--" + m for m in missing))
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        if getattr(args, "jobs", 1) < 1:
            raise InputError("--jobs must be >= 1")
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        # unreadable inputs or unwritable outputs
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except FlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
