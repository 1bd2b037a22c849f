"""Command-line front end.

Subcommands: ``simulate``, ``refine``, ``eval``, ``project``. Every
subcommand is deterministic given its flags; outputs are versioned text
files (see :mod:`posefocal.records`).

Exit codes: 0 success, 2 configuration/usage/parse error, 3 I/O error,
4 numeric error (point behind the camera, degenerate update, scene that
cannot be sampled).
"""

import argparse
import contextlib
import sys

import numpy as np

from . import __version__
from .config import PROFILES, ConfigError, load_scene_config, profile_config
from .geometry import CameraIntrinsics, DegenerateRotationError, ProjectionError, project_points
from .mesh import BUILTIN_MESHES, MeshError, builtin_mesh, load_mesh, sample_mesh_points
from .metrics import ERROR_FIELDS, REPORT_COLUMNS, aggregate, evaluate, report_row
from .records import FORMATS, RecordError, StateRecord, read_states, write_states, write_table
from .refine import PREDICTOR_KINDS, PredictorSpec, generate_scenes, refine_scene, reports_by_iteration
from .scene import SceneConfig, SceneSample, SceneSamplingError, scene_points
from .update import Detection2D

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

DEFAULT_K = 15
ROTATION_SWEEP_DEG = np.arange(0.0, 30.0 + 1e-9, 1.0)
REPROJECTION_SWEEP = np.round(np.arange(0.0, 0.1 + 1e-12, 0.005), 6)


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# shared option handling


def _add_common(p, scenes=True):
    p.add_argument("--config", help="scene configuration YAML file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mesh", help="triangle mesh file (v/f text format)")
    g.add_argument("--builtin", choices=sorted(BUILTIN_MESHES), help="builtin mesh (default: cube)")
    p.add_argument("--profile", choices=sorted(PROFILES), help="dataset profile (sets K, depth range, image size)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    if scenes:
        p.add_argument("--scenes", type=_positive_int, default=100, help="number of scenes")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _mesh(args):
    if args.mesh:
        try:
            return load_mesh(args.mesh)
        except FileNotFoundError:
            raise CliError(f"mesh file not found: {args.mesh}", EXIT_IO) from None
        except OSError as exc:
            raise CliError(f"cannot read mesh file {args.mesh}: {exc.strerror}", EXIT_IO) from None
        except MeshError as exc:
            raise CliError(f"{args.mesh}: {exc}", EXIT_CONFIG) from None
    return builtin_mesh(args.builtin or "cube")


def _scene_config(args):
    cfg, K = SceneConfig(), DEFAULT_K
    if args.profile:
        cfg, K = profile_config(args.profile, cfg)
    if args.config:
        try:
            cfg = load_scene_config(args.config, cfg)
        except FileNotFoundError:
            raise CliError(f"config file not found: {args.config}", EXIT_IO) from None
    return cfg, K


@contextlib.contextmanager
def _output(path):
    if path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None
    with fh:
        yield fh


def _read_state_file(path):
    try:
        with open(path, newline="") as fh:
            return read_states(fh, source=path)
    except FileNotFoundError:
        raise CliError(f"file not found: {path}", EXIT_IO) from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    cfg, _ = _scene_config(args)
    mesh = _mesh(args)
    scenes = generate_scenes(cfg, args.scenes, args.seed, mesh)
    records = [
        StateRecord(s.gt, i, s.seed, s.detection, s.image_w, s.image_h)
        for i, s in enumerate(scenes)
    ]
    with _output(args.out) as fh:
        write_states(fh, records, args.format)
    return EXIT_OK


def _scenes_from_file(path, cfg, mesh):
    scenes = []
    for rec in _read_state_file(path):
        if rec.seed is None or rec.box is None or rec.image_w is None:
            raise CliError(
                f"{path}: record {rec.index} lacks seed, box or image size", EXIT_CONFIG
            )
        scenes.append(
            SceneSample(
                gt=rec.state,
                model_points=scene_points(mesh, cfg.n_points, rec.seed),
                image_w=rec.image_w,
                image_h=rec.image_h,
                detection=rec.box,
                seed=rec.seed,
            )
        )
    if not scenes:
        raise CliError(f"{path}: no scene records", EXIT_CONFIG)
    return scenes


def cmd_refine(args):
    cfg, K = _scene_config(args)
    if args.iters is not None:
        K = args.iters
    mesh = _mesh(args)
    spec = PredictorSpec(
        kind=args.predictor,
        gamma=args.gamma,
        noise=cfg.noise,
        noise_iters=args.noise_iters,
        seed=args.seed,
    )
    if args.scenes_file:
        scenes = _scenes_from_file(args.scenes_file, cfg, mesh)
    else:
        scenes = generate_scenes(cfg, args.scenes, args.seed, mesh)
    trajectories = [refine_scene(s, cfg, spec, K) for s in scenes]

    with _output(args.out) as fh:
        if args.mode == "report":
            rows = [
                [k] + list(report_row(r).values())
                for k, r in enumerate(reports_by_iteration(trajectories))
            ]
            write_table(fh, "report", ("iteration",) + REPORT_COLUMNS, rows, args.format)
        elif args.mode == "histogram":
            rows = []
            for i, (scene, traj) in enumerate(zip(scenes, trajectories)):
                rec = traj[-1].record
                rows.append([i, scene.seed] + [getattr(rec, name) for name in ERROR_FIELDS])
            write_table(fh, "histogram", ("scene", "seed") + ERROR_FIELDS, rows, args.format)
        else:
            final = [traj[-1].record for traj in trajectories]
            e_R = np.rad2deg([r.e_R for r in final])
            e_P = [r.e_P for r in final]
            rows = []
            for th in ROTATION_SWEEP_DEG:
                rows.append(["e_R_deg", float(th), float(np.mean(e_R <= th))])
            for th in REPROJECTION_SWEEP:
                rows.append(["e_P", float(th), float(np.mean(np.asarray(e_P) <= th))])
            write_table(fh, "thresholds", ("metric", "threshold", "accuracy"), rows, args.format)

    if args.trajectories:
        cols = ("scene", "k", "f", "tx", "ty", "tz") + tuple(
            f"R{i}{j}" for i in range(3) for j in range(3)
        ) + ERROR_FIELDS
        rows = []
        for i, traj in enumerate(trajectories):
            for step in traj:
                s = step.state
                rows.append(
                    [i, step.k, s.f, *s.t, *s.R.ravel()]
                    + [getattr(step.record, name) for name in ERROR_FIELDS]
                )
        with _output(args.trajectories) as fh:
            write_table(fh, "trajectory", cols, rows, args.format)
    return EXIT_OK


def cmd_eval(args):
    preds = _read_state_file(args.pred_file)
    gts = _read_state_file(args.gt_file)
    if len(preds) != len(gts):
        raise CliError(
            f"record count mismatch: {len(preds)} predictions vs {len(gts)} ground truths",
            EXIT_CONFIG,
        )
    if not gts:
        raise CliError("no records to evaluate", EXIT_CONFIG)
    mesh = _mesh(args)
    pts = sample_mesh_points(mesh, args.points, seed=args.seed)
    records = []
    for i, (p, g) in enumerate(zip(preds, gts)):
        if g.image_w is None:
            raise CliError(f"{args.gt_file}: record {i} lacks image size", EXIT_CONFIG)
        center = (g.image_w / 2.0, g.image_h / 2.0)
        gt_box = g.box
        if gt_box is None:
            gt_box = Detection2D.from_points(
                project_points(CameraIntrinsics(g.state.f, *center), g.state.pose, pts)
            )
        try:
            records.append(
                evaluate(p.state, g.state, pts, center, gt_box,
                         float(np.hypot(g.image_w, g.image_h)), pred_box=p.box)
            )
        except ProjectionError as exc:
            raise CliError(f"record {i}: {exc}", EXIT_NUMERIC) from None
    report = aggregate(records)
    with _output(args.out) as fh:
        write_table(fh, "report", REPORT_COLUMNS, [list(report_row(report).values())], args.format)
    return EXIT_OK


def cmd_project(args):
    recs = _read_state_file(args.state_file)
    mesh = _mesh(args)
    if args.points == 0:
        pts = mesh.vertices
    else:
        pts = sample_mesh_points(mesh, args.points, seed=args.seed)
    rows = []
    for rec in recs:
        if args.cx is not None:
            cx, cy = args.cx, args.cy
        elif rec.image_w is not None:
            cx, cy = rec.image_w / 2.0, rec.image_h / 2.0
        else:
            cx, cy = SceneConfig().center
        f = args.focal if args.focal is not None else rec.state.f
        try:
            uv = project_points(CameraIntrinsics(f, cx, cy), rec.state.pose, pts)
        except ProjectionError as exc:
            raise CliError(
                f"record {rec.index}: points behind camera at indices {list(exc.indices)}",
                EXIT_NUMERIC,
            ) from None
        rows.extend([rec.index, j, u, v] for j, (u, v) in enumerate(uv))
    with _output(args.out) as fh:
        write_table(fh, "projection", ("record", "point", "u", "v"), rows, args.format)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="posefocal",
        description="Joint pose and focal-length refinement harness with oracle predictors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample synthetic ground-truth scenes")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("refine", help="run oracle-driven refinement and report metrics")
    _add_common(p)
    p.add_argument("--scenes-file", help="scenes written by 'simulate' (overrides --scenes)")
    p.add_argument("--predictor", choices=PREDICTOR_KINDS, default="ideal")
    p.add_argument("--gamma", type=float, default=0.5, help="damping fraction in (0, 1]")
    p.add_argument("--noise-iters", type=int, default=1,
                   help="iterations of the noisy predictor that jump to a perturbed target")
    p.add_argument("--iters", type=_positive_int, help="refinement iterations K")
    p.add_argument("--mode", choices=("report", "histogram", "thresholds"), default="report")
    p.add_argument("--trajectories", help="also write per-scene trajectories to this path")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("eval", help="score prediction states against ground truth")
    p.add_argument("pred_file")
    p.add_argument("gt_file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mesh")
    g.add_argument("--builtin", choices=sorted(BUILTIN_MESHES))
    p.add_argument("--points", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("project", help="project model points under stored states")
    p.add_argument("state_file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mesh")
    g.add_argument("--builtin", choices=sorted(BUILTIN_MESHES))
    p.add_argument("--points", type=int, default=1000, help="sampled points (0: mesh vertices)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--focal", type=float, help="override the stored focal length")
    p.add_argument("--cx", type=float)
    p.add_argument("--cy", type=float)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.set_defaults(func=cmd_project)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "project" and (args.cx is None) != (args.cy is None):
        parser.error("--cx and --cy must be given together")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"posefocal: error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, RecordError, MeshError) as exc:
        print(f"posefocal: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProjectionError, DegenerateRotationError, SceneSamplingError) as exc:
        print(f"posefocal: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"posefocal: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"posefocal: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
