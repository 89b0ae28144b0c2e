"""Scene configs, ground-truth annotations and detection files.

Formats (all plain text, '.' decimal point, '#' starts a comment line):

scene config
    one ``key = value`` per line. Keys: ``name`` (optional), ``image_width``,
    ``image_height``, ``units`` (cm, m or mm; default cm), ``camera_height``,
    ``camera_x``, ``camera_y``, ``grid_width``, ``grid_height``,
    ``homography_points`` (8 numbers x1,y1,...,x4,y4), ``corner_order``
    (comma-separated permutation of near-left, near-right, far-right,
    far-left) and optional ``map_points`` (8 numbers, floor coordinates of the
    homography points in config units; defaults to the grid corners).

annotations
    headerless CSV ``frame_id,X,Y[,visible]``; ``visible`` is 1/0 and defaults
    to 1. Invisible frames may leave X and Y empty.

detections
    ``frame_id|kind|payload[|detector_id]`` per line. ``bbox`` payload is
    ``x_min,y_min,x_max,y_max,conf``; ``skeleton`` payload is
    ``joint:x,y,conf`` triples separated by ``;`` (may be empty).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateCalibration, DuplicateFrame, NoOverlap, ParseError, ValidationError
from .feet import BoundingBox, JointName, Skeleton
from .geometry import (
    CameraConfig,
    FloorPoint,
    ImagePoint,
    grid_corners,
    is_collinear,
    solve_homography,
)

CORNERS = ("near-left", "near-right", "far-right", "far-left")
UNIT_TO_CM = {"cm": 1.0, "m": 100.0, "mm": 0.1}


def fmt(v: float) -> str:
    return repr(float(v))


def _lines(path):
    """(line number, stripped text) for meaningful lines; text is read as UTF-8."""
    text = Path(path).read_text(encoding="utf-8")
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line


def _float(text, path, line, fieldname) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", path, line, fieldname) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", path, line, fieldname)
    return v


def _int(text, path, line, fieldname) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"not an integer: {text!r}", path, line, fieldname) from None


# ---------------------------------------------------------------- scene config


@dataclass(frozen=True)
class SceneConfig:
    image_width: int
    image_height: int
    camera_height: float
    camera_ground_xy: FloorPoint
    grid_width: float
    grid_height: float
    homography_points: tuple[ImagePoint, ...]
    map_points: tuple[FloorPoint, ...] | None = None
    units: str = "cm"
    name: str = ""

    def __post_init__(self):
        if self.units not in UNIT_TO_CM:
            raise ValidationError(f"unknown units {self.units!r}; expected one of {sorted(UNIT_TO_CM)}")
        for key in ("image_width", "image_height", "camera_height", "grid_width", "grid_height"):
            if not getattr(self, key) > 0:
                raise ValidationError(f"{key} must be positive")
        object.__setattr__(self, "homography_points", tuple(ImagePoint(*map(float, p)) for p in self.homography_points))
        if len(self.homography_points) != 4:
            raise ValidationError(f"exactly 4 homography points required, got {len(self.homography_points)}")
        _check_no_collinear(self.homography_points, "homography points")
        if self.map_points is not None:
            object.__setattr__(self, "map_points", tuple(FloorPoint(*map(float, p)) for p in self.map_points))
            if len(self.map_points) != 4:
                raise ValidationError(f"exactly 4 map points required, got {len(self.map_points)}")
            _check_no_collinear(self.map_points, "map points")
        object.__setattr__(self, "camera_ground_xy", FloorPoint(*map(float, self.camera_ground_xy)))

    @property
    def to_cm(self) -> float:
        return UNIT_TO_CM[self.units]

    def camera(self) -> CameraConfig:
        s = self.to_cm
        g = self.camera_ground_xy
        return CameraConfig(self.camera_height * s, FloorPoint(g.X * s, g.Y * s), self.image_width, self.image_height)

    def floor_points(self) -> list[FloorPoint]:
        """Floor coordinates (cm) matching ``homography_points``."""
        s = self.to_cm
        if self.map_points is None:
            return grid_corners(self.grid_width * s, self.grid_height * s)
        return [FloorPoint(p.X * s, p.Y * s) for p in self.map_points]

    def homography(self):
        return solve_homography(self.homography_points, self.floor_points())

    def dumps(self) -> str:
        lines = []
        if self.name:
            lines.append(f"name = {self.name}")
        lines += [
            f"image_width = {self.image_width}",
            f"image_height = {self.image_height}",
            f"units = {self.units}",
            f"camera_height = {fmt(self.camera_height)}",
            f"camera_x = {fmt(self.camera_ground_xy.X)}",
            f"camera_y = {fmt(self.camera_ground_xy.Y)}",
            f"grid_width = {fmt(self.grid_width)}",
            f"grid_height = {fmt(self.grid_height)}",
            "corner_order = " + ",".join(CORNERS),
            "homography_points = " + ",".join(fmt(v) for p in self.homography_points for v in p),
        ]
        if self.map_points is not None:
            lines.append("map_points = " + ",".join(fmt(v) for p in self.map_points for v in p))
        return "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")


def _check_no_collinear(points, what):
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                if is_collinear(points[i], points[j], points[k]):
                    raise DegenerateCalibration(f"{what} {i}, {j}, {k} are collinear or repeated")


_SCENE_KEYS = {
    "name", "image_width", "image_height", "units", "camera_height", "camera_x", "camera_y",
    "grid_width", "grid_height", "homography_points", "corner_order", "map_points",
}
_REQUIRED = _SCENE_KEYS - {"name", "units", "corner_order", "map_points"}


def _points(text, path, line, key) -> list[tuple[float, float]]:
    vals = [_float(t.strip(), path, line, key) for t in text.split(",") if t.strip()]
    if len(vals) % 2:
        raise ParseError(f"odd number of coordinates ({len(vals)})", path, line, key)
    return [(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)]


def load_scene_config(path) -> SceneConfig:
    """Parse and validate a scene config; points are reordered to canonical corner order."""
    raw: dict[str, tuple[int, str]] = {}
    for no, line in _lines(path):
        if "=" not in line:
            raise ParseError("expected 'key = value'", path, no)
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in _SCENE_KEYS:
            raise ParseError("unknown key", path, no, key)
        if key in raw:
            raise ParseError("duplicate key", path, no, key)
        raw[key] = (no, value)
    missing = sorted(_REQUIRED - raw.keys())
    if missing:
        raise ValidationError(f"{path}: missing keys {missing}")

    def num(key):
        no, v = raw[key]
        return _float(v, path, no, key)

    def whole(key):
        no, v = raw[key]
        return _int(v, path, no, key)

    no, v = raw["homography_points"]
    hp = _points(v, path, no, "homography_points")
    mp = None
    if "map_points" in raw:
        no, v = raw["map_points"]
        mp = _points(v, path, no, "map_points")
        if len(mp) != len(hp):
            raise ValidationError(f"{path}: {len(mp)} map points for {len(hp)} homography points")

    if "corner_order" in raw:
        no, v = raw["corner_order"]
        order = [t.strip() for t in v.split(",")]
        if sorted(order) != sorted(CORNERS):
            raise ParseError(f"corner_order must be a permutation of {','.join(CORNERS)}", path, no, "corner_order")
        if len(hp) == 4:
            idx = [order.index(c) for c in CORNERS]
            hp = [hp[i] for i in idx]
            if mp is not None:
                mp = [mp[i] for i in idx]

    return SceneConfig(
        image_width=whole("image_width"),
        image_height=whole("image_height"),
        camera_height=num("camera_height"),
        camera_ground_xy=FloorPoint(num("camera_x"), num("camera_y")),
        grid_width=num("grid_width"),
        grid_height=num("grid_height"),
        homography_points=tuple(hp),
        map_points=None if mp is None else tuple(mp),
        units=raw.get("units", (0, "cm"))[1],
        name=raw.get("name", (0, ""))[1],
    )


# ----------------------------------------------------------------- annotations


@dataclass(frozen=True)
class AnnotationRecord:
    frame_id: int
    position: FloorPoint | None
    visible: bool = True

    def __post_init__(self):
        if self.frame_id < 0:
            raise ValidationError(f"negative frame id {self.frame_id}")
        if self.visible and self.position is None:
            raise ValidationError(f"frame {self.frame_id}: visible annotation without a position")
        if self.position is not None:
            object.__setattr__(self, "position", FloorPoint(*map(float, self.position)))


def _parse_visible(text, path, no):
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no"):
        return False
    raise ParseError(f"bad visibility flag {text!r}", path, no, "visible")


def load_annotations(path) -> list[AnnotationRecord]:
    records = {}
    for no, line in _lines(path):
        cols = next(csv.reader([line]))
        if len(cols) not in (3, 4):
            raise ParseError(f"expected 3 or 4 columns, got {len(cols)}", path, no)
        fid = _int(cols[0], path, no, "frame_id")
        visible = _parse_visible(cols[3], path, no) if len(cols) == 4 else True
        if cols[1].strip() == "" and cols[2].strip() == "" and not visible:
            pos = None
        else:
            pos = FloorPoint(_float(cols[1], path, no, "X"), _float(cols[2], path, no, "Y"))
        if fid in records:
            raise DuplicateFrame(f"frame {fid} repeated", path, no)
        try:
            records[fid] = AnnotationRecord(fid, pos, visible)
        except ValidationError as exc:
            raise ParseError(str(exc), path, no) from None
    return [records[k] for k in sorted(records)]


def dumps_annotations(records) -> str:
    out = []
    for r in sorted(records, key=lambda r: r.frame_id):
        if r.visible:
            out.append(f"{r.frame_id},{fmt(r.position.X)},{fmt(r.position.Y)}")
        elif r.position is None:
            out.append(f"{r.frame_id},,,0")
        else:
            out.append(f"{r.frame_id},{fmt(r.position.X)},{fmt(r.position.Y)},0")
    return "".join(line + "\n" for line in out)


def save_annotations(records, path):
    Path(path).write_text(dumps_annotations(records), encoding="utf-8")


# ------------------------------------------------------------------ detections


@dataclass(frozen=True)
class DetectionRecord:
    frame_id: int
    payload: BoundingBox | Skeleton
    detector_id: str = ""

    @property
    def kind(self) -> str:
        return "bbox" if isinstance(self.payload, BoundingBox) else "skeleton"


def _parse_bbox(text, path, no) -> BoundingBox:
    vals = [_float(t, path, no, "bbox") for t in text.split(",")]
    if len(vals) != 5:
        raise ParseError(f"bbox payload needs 5 numbers, got {len(vals)}", path, no, "bbox")
    try:
        return BoundingBox(*vals)
    except ValidationError as exc:
        raise ParseError(str(exc), path, no, "bbox") from None


def _parse_skeleton(text, path, no) -> Skeleton:
    joints = {}
    for item in filter(None, (t.strip() for t in text.split(";"))):
        name, sep, coords = item.partition(":")
        try:
            joint = JointName(name.strip())
        except ValueError:
            raise ParseError(f"unknown joint {name!r}", path, no, "skeleton") from None
        if not sep:
            raise ParseError(f"joint {name!r} lacks coordinates", path, no, "skeleton")
        vals = [_float(t, path, no, joint.value) for t in coords.split(",")]
        if len(vals) != 3:
            raise ParseError(f"joint {name!r} needs x,y,conf", path, no, "skeleton")
        if joint in joints:
            raise ParseError(f"joint {name!r} repeated", path, no, "skeleton")
        joints[joint] = ((vals[0], vals[1]), vals[2])
    try:
        return Skeleton(joints)
    except ValidationError as exc:
        raise ParseError(str(exc), path, no, "skeleton") from None


def load_detections(path) -> list[DetectionRecord]:
    records = {}
    for no, line in _lines(path):
        parts = line.split("|")
        if len(parts) not in (3, 4):
            raise ParseError("expected frame_id|kind|payload[|detector_id]", path, no)
        fid = _int(parts[0].strip(), path, no, "frame_id")
        if fid < 0:
            raise ParseError(f"negative frame id {fid}", path, no, "frame_id")
        kind = parts[1].strip()
        if kind == "bbox":
            payload = _parse_bbox(parts[2], path, no)
        elif kind == "skeleton":
            payload = _parse_skeleton(parts[2], path, no)
        else:
            raise ParseError(f"unknown payload kind {kind!r}", path, no, "kind")
        if fid in records:
            raise DuplicateFrame(f"frame {fid} repeated", path, no)
        records[fid] = DetectionRecord(fid, payload, parts[3].strip() if len(parts) == 4 else "")
    return [records[k] for k in sorted(records)]


def format_detection(rec: DetectionRecord) -> str:
    p = rec.payload
    if isinstance(p, BoundingBox):
        body = ",".join(fmt(v) for v in (p.x_min, p.y_min, p.x_max, p.y_max, p.confidence))
    else:
        body = ";".join(
            f"{j.value}:{fmt(kp.point[0])},{fmt(kp.point[1])},{fmt(kp.confidence)}" for j, kp in p.joints.items()
        )
    line = f"{rec.frame_id}|{rec.kind}|{body}"
    return line + (f"|{rec.detector_id}" if rec.detector_id else "")


def dumps_detections(records) -> str:
    return "".join(format_detection(r) + "\n" for r in sorted(records, key=lambda r: r.frame_id))


def save_detections(records, path):
    Path(path).write_text(dumps_detections(records), encoding="utf-8")


# ------------------------------------------------------------ scenario labels


def load_labels(path) -> dict[int, str]:
    """Headerless CSV ``frame_id,label``."""
    out = {}
    for no, line in _lines(path):
        cols = [c.strip() for c in line.split(",")]
        if len(cols) != 2:
            raise ParseError("expected frame_id,label", path, no)
        fid = _int(cols[0], path, no, "frame_id")
        if fid in out:
            raise DuplicateFrame(f"frame {fid} repeated", path, no)
        out[fid] = cols[1]
    return out


# ------------------------------------------------------ two-camera ground truth


def merge_ground_truth(a, b) -> list[AnnotationRecord]:
    """Combine two perspectives frame by frame.

    Both visible gives the midpoint, one visible gives that camera's position,
    and a frame seen by neither (or present in only one list and not visible
    there) is kept as not visible.
    """
    da = {r.frame_id: r for r in a}
    db = {r.frame_id: r for r in b}
    out = []
    for fid in sorted(da.keys() | db.keys()):
        ra, rb = da.get(fid), db.get(fid)
        va = ra is not None and ra.visible
        vb = rb is not None and rb.visible
        if va and vb:
            pa, pb = ra.position, rb.position
            out.append(AnnotationRecord(fid, FloorPoint((pa.X + pb.X) / 2, (pa.Y + pb.Y) / 2)))
        elif va:
            out.append(AnnotationRecord(fid, ra.position))
        elif vb:
            out.append(AnnotationRecord(fid, rb.position))
        else:
            out.append(AnnotationRecord(fid, None, visible=False))
    return out


@dataclass(frozen=True)
class MismatchStats:
    frames: tuple[int, ...]
    abs_dx: tuple[float, ...]
    abs_dy: tuple[float, ...]
    mean_x: float
    mean_y: float
    p95_x: float
    p95_y: float


def mismatch_stats(a, b, percentile: float = 95.0) -> MismatchStats:
    """Per-axis absolute disagreement over frames visible in both annotation sets."""
    db = {r.frame_id: r for r in b}
    frames, dx, dy = [], [], []
    for ra in sorted(a, key=lambda r: r.frame_id):
        rb = db.get(ra.frame_id)
        if rb is None or not (ra.visible and rb.visible):
            continue
        frames.append(ra.frame_id)
        dx.append(abs(ra.position.X - rb.position.X))
        dy.append(abs(ra.position.Y - rb.position.Y))
    if not frames:
        raise NoOverlap("no frame is visible in both annotation sets")
    n = len(frames)
    return MismatchStats(
        tuple(frames),
        tuple(dx),
        tuple(dy),
        math.fsum(dx) / n,
        math.fsum(dy) / n,
        float(np.percentile(dx, percentile)),
        float(np.percentile(dy, percentile)),
    )

