"""Image-space feet estimation from bounding boxes and pose skeletons.

The skeleton route takes the ankle midpoint when both ankles are confident.
Otherwise it regresses the body midline through the midpoints of left/right
joint pairs and extends it down to the ground using known body proportions,
starting from the lowest detected level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

from .errors import InsufficientJoints, ValidationError
from .geometry import ImagePoint

DEFAULT_CONF_THRESHOLD = 0.3
DEFAULT_BBOX_ASPECT = 2.5


class JointName(str, enum.Enum):
    NOSE = "nose"
    NECK = "neck"
    RIGHT_SHOULDER = "right_shoulder"
    RIGHT_ELBOW = "right_elbow"
    RIGHT_WRIST = "right_wrist"
    LEFT_SHOULDER = "left_shoulder"
    LEFT_ELBOW = "left_elbow"
    LEFT_WRIST = "left_wrist"
    RIGHT_HIP = "right_hip"
    RIGHT_KNEE = "right_knee"
    RIGHT_ANKLE = "right_ankle"
    LEFT_HIP = "left_hip"
    LEFT_KNEE = "left_knee"
    LEFT_ANKLE = "left_ankle"
    RIGHT_EYE = "right_eye"
    LEFT_EYE = "left_eye"
    RIGHT_EAR = "right_ear"
    LEFT_EAR = "left_ear"


class Level(str, enum.Enum):
    EYE = "eye"
    SHOULDER = "shoulder"
    HIP = "hip"
    KNEE = "knee"
    ANKLE = "ankle"


J = JointName

# left/right pairs whose midpoints lie on the body midline, with the level each marks
DEFAULT_PAIRS: tuple[tuple[JointName, JointName, Level], ...] = (
    (J.LEFT_EYE, J.RIGHT_EYE, Level.EYE),
    (J.LEFT_EAR, J.RIGHT_EAR, Level.EYE),
    (J.LEFT_SHOULDER, J.RIGHT_SHOULDER, Level.SHOULDER),
    (J.LEFT_HIP, J.RIGHT_HIP, Level.HIP),
    (J.LEFT_KNEE, J.RIGHT_KNEE, Level.KNEE),
    (J.LEFT_ANKLE, J.RIGHT_ANKLE, Level.ANKLE),
)


@dataclass(frozen=True)
class BodyProportions:
    """Height of each body level as a fraction of standing height, from the ground."""

    level_fraction: Mapping[Level, float] = field(
        default_factory=lambda: {
            Level.EYE: 0.94,
            Level.SHOULDER: 0.82,
            Level.HIP: 0.52,
            Level.KNEE: 0.28,
            Level.ANKLE: 0.04,
        }
    )
    ankle_ground_fraction: float = 0.04

    def __post_init__(self):
        fr = {Level(k): float(v) for k, v in self.level_fraction.items()}
        if set(fr) != set(Level):
            raise ValidationError(f"proportion table must cover levels {[lv.value for lv in Level]}")
        ordered = [fr[lv] for lv in Level]
        if not all(0 < f <= 1 for f in ordered):
            raise ValidationError("level fractions must lie in (0, 1]")
        if any(hi <= lo for hi, lo in zip(ordered, ordered[1:])):
            raise ValidationError("level fractions must strictly decrease from eye to ankle")
        if not self.ankle_ground_fraction >= 0:
            raise ValidationError("ankle_ground_fraction must be non-negative")
        object.__setattr__(self, "level_fraction", MappingProxyType(fr))

    def __getitem__(self, level) -> float:
        return self.level_fraction[Level(level)]

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> BodyProportions:
        values = dict(values)
        ankle_ground = values.pop("ankle_ground", values.pop("ankle_ground_fraction", 0.04))
        return cls({Level(k): v for k, v in values.items()}, ankle_ground)


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    confidence: float = 1.0

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(f"degenerate bounding box {self}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True)
class Keypoint:
    point: ImagePoint
    confidence: float


@dataclass(frozen=True)
class Skeleton:
    joints: Mapping[JointName, Keypoint] = field(default_factory=dict)

    def __post_init__(self):
        joints = {}
        for name, kp in dict(self.joints).items():
            if not isinstance(kp, Keypoint):
                (x, y), conf = kp
                kp = Keypoint(ImagePoint(float(x), float(y)), float(conf))
            if not 0.0 <= kp.confidence <= 1.0:
                raise ValidationError(f"joint {name}: confidence {kp.confidence} outside [0, 1]")
            if not (math.isfinite(kp.point[0]) and math.isfinite(kp.point[1])):
                raise ValidationError(f"joint {name}: non-finite position")
            joints[JointName(name)] = kp
        # canonical joint order keeps serialization and iteration deterministic
        ordered = {j: joints[j] for j in JointName if j in joints}
        object.__setattr__(self, "joints", MappingProxyType(ordered))

    def __len__(self):
        return len(self.joints)

    def confident(self, joint: JointName, threshold: float) -> Keypoint | None:
        kp = self.joints.get(joint)
        if kp is None or kp.confidence < threshold:
            return None
        return kp


@dataclass(frozen=True)
class FeetEstimate:
    """Either a found feet point with the method that produced it, or a skip reason."""

    point: ImagePoint | None
    method: str | None = None
    reason: str | None = None

    @property
    def found(self) -> bool:
        return self.point is not None

    @classmethod
    def skipped(cls, reason: str) -> FeetEstimate:
        return cls(None, None, reason)


def feet_from_bbox(box: BoundingBox, method: str = "bbox") -> FeetEstimate:
    return FeetEstimate(ImagePoint((box.x_min + box.x_max) / 2, box.y_max), method)


def extend_bbox(box: BoundingBox, target_height_over_width: float = DEFAULT_BBOX_ASPECT) -> BoundingBox:
    """Grow the box downward until height/width reaches the target ratio."""
    if not target_height_over_width > 0:
        raise ValidationError("target aspect ratio must be positive")
    if box.height / box.width >= target_height_over_width:
        return box
    return replace(box, y_max=box.y_min + target_height_over_width * box.width)


@dataclass(frozen=True)
class Midpoint:
    level: Level
    point: ImagePoint


@dataclass(frozen=True)
class Midline:
    """Least-squares body axis x = slope*y + intercept and the midpoints it was fitted to."""

    slope: float
    intercept: float
    midpoints: tuple[Midpoint, ...]

    def x_at(self, y: float) -> float:
        return self.slope * y + self.intercept


def pair_midpoints(s: Skeleton, conf_threshold: float, pairs=DEFAULT_PAIRS) -> list[Midpoint]:
    out = []
    for left, right, level in pairs:
        kl, kr = s.confident(left, conf_threshold), s.confident(right, conf_threshold)
        if kl is None or kr is None:
            continue
        out.append(
            Midpoint(level, ImagePoint((kl.point[0] + kr.point[0]) / 2, (kl.point[1] + kr.point[1]) / 2))
        )
    return out


def fit_midline(midpoints) -> Midline:
    if len(midpoints) < 2:
        raise InsufficientJoints(f"{len(midpoints)} qualifying midpoint(s), need 2")
    n = len(midpoints)
    ys = [m.point[1] for m in midpoints]
    xs = [m.point[0] for m in midpoints]
    y_mean = math.fsum(ys) / n
    x_mean = math.fsum(xs) / n
    syy = math.fsum((y - y_mean) ** 2 for y in ys)
    if syy == 0.0:
        raise InsufficientJoints("midpoints share one image row; body axis undefined")
    sxy = math.fsum((y - y_mean) * (x - x_mean) for x, y in zip(xs, ys))
    slope = sxy / syy
    return Midline(slope, x_mean - slope * y_mean, tuple(midpoints))


def body_midline(s: Skeleton, conf_threshold: float = DEFAULT_CONF_THRESHOLD, pairs=DEFAULT_PAIRS) -> Midline:
    """Regress the body axis through confident left/right pair midpoints.

    Raises InsufficientJoints when fewer than two pairs qualify.
    """
    return fit_midline(pair_midpoints(s, conf_threshold, pairs))


def feet_from_skeleton(
    s: Skeleton,
    props: BodyProportions | None = None,
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
    pairs=DEFAULT_PAIRS,
    extension: str = "arc",
) -> FeetEstimate:
    """Feet point from a possibly occluded skeleton.

    ``extension`` selects how the body height and the extension are measured:
    ``"arc"`` along the regressed line, ``"vertical"`` as a pure image-row drop.
    """
    if extension not in ("arc", "vertical"):
        raise ValidationError(f"unknown extension mode {extension!r}")
    props = props or BodyProportions()
    la = s.confident(J.LEFT_ANKLE, conf_threshold)
    ra = s.confident(J.RIGHT_ANKLE, conf_threshold)
    if la is not None and ra is not None:
        mid = ImagePoint((la.point[0] + ra.point[0]) / 2, (la.point[1] + ra.point[1]) / 2)
        return FeetEstimate(mid, "ankles")

    mids = pair_midpoints(s, conf_threshold, pairs)
    try:
        line = fit_midline(mids)
    except InsufficientJoints as exc:
        return FeetEstimate.skipped(f"insufficient joints: {exc}")

    # first-listed midpoint wins ties, so the choice is order-deterministic
    top = max(mids, key=lambda m: props[m.level])
    low = min(mids, key=lambda m: props[m.level])
    span = props[top.level] - props[low.level]
    if span <= 0:
        return FeetEstimate.skipped("insufficient joints: all midpoints on one body level")

    norm = math.hypot(line.slope, 1.0)
    if extension == "arc":
        body_px = math.hypot(top.point[0] - low.point[0], top.point[1] - low.point[1]) / span
        step = props[low.level] * body_px / norm
    else:
        body_px = abs(top.point[1] - low.point[1]) / span
        step = props[low.level] * body_px
    if body_px == 0.0:
        return FeetEstimate.skipped("insufficient joints: zero apparent body height")

    # start from the orthogonal projection of the lowest midpoint onto the line
    x0, y0 = low.point
    t = ((x0 - line.intercept) * line.slope + y0) / (norm * norm)
    start_y = t
    start_x = line.x_at(start_y)
    return FeetEstimate(ImagePoint(start_x + line.slope * step, start_y + step), "extended")
