"""floorloc command line: calibrate, localize, fuse, evaluate, synth.

Exit codes: 0 ok, 2 usage, 3 parse/validation, 4 degenerate geometry, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import synthetic as syn
from .dataset import (
    AnnotationRecord,
    load_annotations,
    load_detections,
    load_labels,
    load_scene_config,
    save_annotations,
    save_detections,
)
from .errors import FloorlocError, ValidationError
from .evaluation import SCENARIO_TYPES, dumps_cdf, error_vs_distance, evaluate_run, group_by_scenario
from .feet import BodyProportions
from .geometry import calibration_residuals
from .pipeline import PositionTrack, RunConfig, TrackRow, fuse_tracks, index_detections, load_positions, localize_track

log = logging.getLogger("floorloc")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_GEOMETRY, EXIT_IO = 0, 2, 3, 4, 5

# occlusion used by cmd_synth for each scenario type
SCENARIO_OCCLUSION = {
    "baseline": (),
    "table": ("ankle",),
    "table_chair": ("knee", "ankle"),
    "table_sideways": ("knee", "ankle"),
    "table_standing": ("hip", "knee", "ankle"),
}


def _write(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def load_run_settings(path) -> dict:
    """JSON run configuration: method, conf_threshold, bbox_aspect, extension, proportions."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    allowed = {"method", "conf_threshold", "bbox_aspect", "extension", "fusion_weight", "proportions", "fuse"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"{path}: unknown run settings {sorted(unknown)}")
    if "proportions" in data:
        data["proportions"] = BodyProportions.from_mapping(data["proportions"])
    return data


def build_run_config(args, scenes) -> RunConfig:
    settings = load_run_settings(args.config) if getattr(args, "config", None) else {}
    for key, attr in (("method", "method"), ("conf_threshold", "conf_threshold"), ("bbox_aspect", "aspect")):
        value = getattr(args, attr, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "fuse", False):
        settings["fuse"] = True
    return RunConfig(scenes=tuple(scenes), **settings)


def cmd_calibrate(args) -> int:
    scene = load_scene_config(args.scene[0])
    hom = scene.homography()
    res = calibration_residuals(hom, scene.homography_points, scene.floor_points())
    out = {
        "params": dict(zip("abcdefgh", hom.params)),
        "residuals": res,
        "max_residual": max(res),
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def _frames(annotations_path, detection_lists):
    if annotations_path:
        return [r.frame_id for r in load_annotations(annotations_path)]
    return sorted({d.frame_id for dets in detection_lists for d in dets})


def cmd_localize(args) -> int:
    if len(args.scene) != len(args.detections or []):
        raise argparse.ArgumentTypeError("--scene and --detections must be given the same number of times")
    scenes = [load_scene_config(p) for p in args.scene]
    cfg = build_run_config(args, scenes)
    dets = [load_detections(p) for p in args.detections]
    frames = _frames(args.annotations, dets)
    ids = cfg.camera_ids()
    tracks = [
        localize_track(frames, index_detections(d, cam), s.homography(), cfg, cam, args.jobs)
        for s, d, cam in zip(scenes, dets, ids)
    ]
    track = fuse_tracks(tracks, cfg) if len(tracks) > 1 else tracks[0]
    _write(track.dumps(), args.out)
    return EXIT_OK


def cmd_fuse(args) -> int:
    if len(args.scene) != len(args.positions or []) or len(args.scene) < 2:
        raise argparse.ArgumentTypeError("fuse needs two or more --scene/--positions pairs")
    scenes = [load_scene_config(p) for p in args.scene]
    cfg = RunConfig(scenes=tuple(scenes), fuse=True)
    tracks = [load_positions(p) for p in args.positions]
    frames = sorted({r.frame_id for t in tracks for r in t.rows})
    aligned = []
    for t, cam in zip(tracks, cfg.camera_ids()):
        by_id = {r.frame_id: r for r in t.rows}
        rows = []
        for fid in frames:
            r = by_id.get(fid)
            if r is None or r.position is None:
                rows.append(TrackRow(fid, None))
            else:
                rows.append(TrackRow(fid, r.position, r.method, r.cameras or (cam,)))
        aligned.append(PositionTrack(tuple(rows)))
    _write(fuse_tracks(aligned, cfg).dumps(), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    track = load_positions(args.positions)
    gt = load_annotations(args.annotations)
    preds = track.predictions()
    report = evaluate_run(preds, gt)
    out = report.to_dict()
    out.pop("cdf")
    if args.labels:
        groups = group_by_scenario(preds, gt, load_labels(args.labels))
        out["scenarios"] = {k: {kk: vv for kk, vv in v.to_dict().items() if kk != "cdf"} for k, v in groups.items()}
    if args.scene:
        cam = load_scene_config(args.scene[0]).camera()
        series = error_vs_distance(preds, gt, cam)
        out["error_vs_distance"] = {"correlation": series.correlation, "degenerate": series.degenerate}
    _write(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    if args.cdf:
        Path(args.cdf).write_text(dumps_cdf(report.cdf), encoding="utf-8")
    return EXIT_OK


def cmd_synth(args) -> int:
    """Write a synthetic corpus into the directory ``--out``."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    cams = [syn.s1_camera(), syn.s1_side_camera()][: args.cameras]
    width, height = syn.S1_GRID
    positions = syn.random_positions(width, height, args.frames, seed=args.seed)
    if args.scenario == "mixed":
        labels = [SCENARIO_TYPES[i % len(SCENARIO_TYPES)] for i in range(args.frames)]
    else:
        labels = [args.scenario] * args.frames
    dropout = [float(x) for x in args.dropout.split(",")] if args.dropout else [0.0] * len(cams)
    if len(dropout) != len(cams):
        raise argparse.ArgumentTypeError("--dropout needs one rate per camera")

    annotations = [AnnotationRecord(i, p) for i, p in enumerate(positions)]
    for k, cam in enumerate(cams):
        name = f"cam{k}"
        syn.scene_config(cam, width, height, name=name).save(out / f"scene_{name}.cfg")
        drop = syn.dropout_mask(args.frames, dropout[k], rng)
        pose, box = [], []
        for i, (p, label) in enumerate(zip(positions, labels)):
            frame = syn.synth_frame(
                cam, syn.StickPerson(p), SCENARIO_OCCLUSION[label], frame_id=i, jitter_px=args.jitter, rng=rng
            )
            if drop[i]:
                continue
            pose.append(frame.skeleton)
            box.append(frame.bbox)
        save_detections(pose, out / f"pose_{name}.det")
        save_detections(box, out / f"bbox_{name}.det")
    save_annotations(annotations, out / "annotations.csv")
    (out / "labels.csv").write_text("".join(f"{i},{lab}\n" for i, lab in enumerate(labels)), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floorloc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenes=True):
        if scenes:
            p.add_argument("--scene", action="append", default=[], help="scene config (repeatable, ordered)")
        p.add_argument("--out", help="output path (stdout when omitted)")

    p = sub.add_parser("calibrate", help="solve the homography of a scene config")
    common(p)
    p.set_defaults(func=cmd_calibrate, required_scene=True)

    p = sub.add_parser("localize", help="detections -> positions CSV")
    common(p)
    p.add_argument("--detections", action="append", default=[], help="detections file (paired with --scene)")
    p.add_argument("--annotations", help="annotations whose frame ids define the track")
    p.add_argument("--method", choices=["pose", "bbox", "bbox-extended"])
    p.add_argument("--conf-threshold", type=float)
    p.add_argument("--aspect", type=float, help="bbox target height/width")
    p.add_argument("--fuse", action="store_true")
    p.add_argument("--config", help="JSON run configuration (proportion table etc.)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_localize, required_scene=True)

    p = sub.add_parser("fuse", help="fuse per-camera positions CSVs")
    common(p)
    p.add_argument("--positions", action="append", default=[], help="positions CSV (paired with --scene)")
    p.set_defaults(func=cmd_fuse, required_scene=True)

    p = sub.add_parser("evaluate", help="score a positions CSV against annotations")
    common(p)
    p.add_argument("--positions", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--labels", help="frame_id,scenario CSV for per-scenario reports")
    p.add_argument("--cdf", help="write the error CDF as two-column CSV here")
    p.set_defaults(func=cmd_evaluate, required_scene=False)

    p = sub.add_parser("synth", help="generate a synthetic corpus into a directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--cameras", type=int, choices=[1, 2], default=1)
    p.add_argument("--jitter", type=float, default=0.0, help="Gaussian pixel jitter sigma")
    p.add_argument("--scenario", choices=["mixed", *SCENARIO_TYPES], default="baseline")
    p.add_argument("--dropout", help="comma-separated per-camera dropout rates")
    p.set_defaults(func=cmd_synth, required_scene=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "required_scene", False) and not args.scene:
        parser.error(f"{args.command} needs at least one --scene")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except FloorlocError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
