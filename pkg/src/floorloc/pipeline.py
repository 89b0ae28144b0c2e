"""Detections in, floor positions and an evaluation report out.

Frames are independent. Each one goes through feet estimation, the camera's
homography and, when several cameras are configured, distance-weighted
fusion. A frame that yields no position stays in the track with an explicit
reason, so missing rates can be audited.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import AnnotationRecord, DetectionRecord, SceneConfig, fmt, load_annotations, load_detections
from .errors import ParseError, ProjectiveHorizon, ValidationError
from .evaluation import EvalReport, evaluate_run
from .feet import (
    DEFAULT_BBOX_ASPECT,
    DEFAULT_CONF_THRESHOLD,
    BodyProportions,
    BoundingBox,
    extend_bbox,
    feet_from_bbox,
    feet_from_skeleton,
)
from .fusion import CameraEstimate, fuse_many
from .geometry import FloorPoint, Homography, project_to_floor

METHODS = ("pose", "bbox", "bbox_extended")


@dataclass(frozen=True)
class RunConfig:
    scenes: tuple[SceneConfig, ...]
    method: str = "pose"
    conf_threshold: float = DEFAULT_CONF_THRESHOLD
    proportions: BodyProportions = field(default_factory=BodyProportions)
    bbox_aspect: float = DEFAULT_BBOX_ASPECT
    fuse: bool = False
    extension: str = "arc"
    fusion_weight: str = "floor"

    def __post_init__(self):
        object.__setattr__(self, "scenes", tuple(self.scenes))
        method = self.method.replace("-", "_")
        if method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}; expected one of {METHODS}")
        object.__setattr__(self, "method", method)
        if not self.scenes:
            raise ValidationError("at least one camera scene is required")
        if len(self.scenes) > 1 and not self.fuse:
            raise ValidationError("several cameras given without fusion enabled")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ValidationError("conf_threshold must lie in [0, 1]")

    def camera_ids(self) -> list[str]:
        ids = [s.name or f"cam{i}" for i, s in enumerate(self.scenes)]
        if len(set(ids)) != len(ids):
            ids = [f"{name}#{i}" for i, name in enumerate(ids)]
        return ids


@dataclass(frozen=True)
class Localization:
    position: FloorPoint | None
    method: str | None = None
    reason: str | None = None


def localize_frame(det: DetectionRecord | None, hom: Homography, cfg: RunConfig) -> Localization:
    if det is None:
        return Localization(None, reason="no detection")
    payload = det.payload
    if cfg.method == "pose":
        if isinstance(payload, BoundingBox):
            return Localization(None, reason="bbox payload for pose method")
        est = feet_from_skeleton(payload, cfg.proportions, cfg.conf_threshold, extension=cfg.extension)
    else:
        if not isinstance(payload, BoundingBox):
            return Localization(None, reason="skeleton payload for bbox method")
        if payload.confidence < cfg.conf_threshold:
            return Localization(None, reason="low detection confidence")
        if cfg.method == "bbox_extended":
            est = feet_from_bbox(extend_bbox(payload, cfg.bbox_aspect), method="bbox_extended")
        else:
            est = feet_from_bbox(payload)
    if not est.found:
        return Localization(None, reason=est.reason)
    try:
        return Localization(project_to_floor(hom, est.point), est.method)
    except ProjectiveHorizon as exc:
        return Localization(None, reason=str(exc))


@dataclass(frozen=True)
class TrackRow:
    frame_id: int
    position: FloorPoint | None
    method: str | None = None
    cameras: tuple[str, ...] = ()
    reason: str | None = None


@dataclass(frozen=True)
class PositionTrack:
    rows: tuple[TrackRow, ...]

    def __post_init__(self):
        ids = [r.frame_id for r in self.rows]
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ValidationError("track frame ids must be strictly increasing")

    def predictions(self) -> dict[int, FloorPoint | None]:
        return {r.frame_id: r.position for r in self.rows}

    def method_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rows:
            if r.position is not None:
                out[r.method] = out.get(r.method, 0) + 1
        return out

    def dumps(self) -> str:
        lines = ["frame_id,X,Y,method,cameras"]
        for r in self.rows:
            if r.position is None:
                lines.append(f"{r.frame_id},,,missing,")
            else:
                lines.append(f"{r.frame_id},{fmt(r.position.X)},{fmt(r.position.Y)},{r.method},{'+'.join(r.cameras)}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")


def load_positions(path) -> PositionTrack:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for no, cols in enumerate(csv.reader(fh), start=1):
            if not cols or (no == 1 and cols[0] == "frame_id"):
                continue
            if len(cols) != 5:
                raise ParseError(f"expected 5 columns, got {len(cols)}", path, no)
            try:
                fid = int(cols[0])
                if cols[3] == "missing":
                    rows.append(TrackRow(fid, None))
                else:
                    cams = tuple(c for c in cols[4].split("+") if c)
                    rows.append(TrackRow(fid, FloorPoint(float(cols[1]), float(cols[2])), cols[3], cams))
            except ValueError as exc:
                raise ParseError(str(exc), path, no) from None
    try:
        return PositionTrack(tuple(rows))
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


@dataclass(frozen=True)
class RunResult:
    track: PositionTrack
    report: EvalReport
    camera_tracks: tuple[PositionTrack, ...]


def index_detections(dets, camera: str) -> dict[int, DetectionRecord]:
    out = {}
    for d in dets:
        if d.frame_id in out:
            raise ValidationError(f"{camera}: frame {d.frame_id} detected twice")
        out[d.frame_id] = d
    return out


def localize_track(frames, dets: dict, hom: Homography, cfg: RunConfig, camera: str, jobs: int = 1) -> PositionTrack:
    def one(fid):
        loc = localize_frame(dets.get(fid), hom, cfg)
        cams = (camera,) if loc.position is not None else ()
        return TrackRow(fid, loc.position, loc.method, cams, loc.reason)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, frames))
    else:
        rows = [one(fid) for fid in frames]
    return PositionTrack(tuple(rows))


def fuse_tracks(tracks, cfg: RunConfig) -> PositionTrack:
    cams = [s.camera() for s in cfg.scenes]
    rows = []
    for per_frame in zip(*(t.rows for t in tracks)):
        fid = per_frame[0].frame_id
        ests = [
            CameraEstimate.from_camera(cam, r.position, r.cameras[0] if r.cameras else "", cfg.fusion_weight)
            for cam, r in zip(cams, per_frame)
        ]
        fused = fuse_many(ests)
        if fused.position is None:
            rows.append(TrackRow(fid, None, reason="all cameras missing"))
            continue
        if len(fused.contributors) == 1:
            method = next(r.method for r in per_frame if r.position is not None)
        else:
            method = "fused"
        rows.append(TrackRow(fid, fused.position, method, fused.contributors))
    return PositionTrack(tuple(rows))


def run(detections, annotations, cfg: RunConfig, jobs: int = 1) -> RunResult:
    """Localize every annotated frame and score the result.

    ``detections`` holds one entry per configured camera, either a path or a
    list of DetectionRecord. ``annotations`` is a path or a list of
    AnnotationRecord (already merged across cameras).
    """
    if len(detections) != len(cfg.scenes):
        raise ValidationError(f"{len(detections)} detection sources for {len(cfg.scenes)} cameras")
    if isinstance(annotations, (str, Path)):
        annotations = load_annotations(annotations)
    gt: list[AnnotationRecord] = sorted(annotations, key=lambda r: r.frame_id)
    frames = [r.frame_id for r in gt]
    ids = cfg.camera_ids()
    tracks = []
    for scene, src, cam_id in zip(cfg.scenes, detections, ids):
        dets = load_detections(src) if isinstance(src, (str, Path)) else list(src)
        tracks.append(localize_track(frames, index_detections(dets, cam_id), scene.homography(), cfg, cam_id, jobs))
    track = fuse_tracks(tracks, cfg) if len(tracks) > 1 else tracks[0]
    return RunResult(track, evaluate_run(track.predictions(), gt), tuple(tracks))
