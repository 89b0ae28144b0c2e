"""Pinhole-camera scenes with exact ground truth.

People are straight stick figures with level-symmetric joint pairs. A person
faces the camera, so the left/right axis is the camera's horizontal image
axis. Occlusion deletes whole body levels. Optional Gaussian pixel jitter is
drawn from an explicitly seeded generator.

Presets use a zero-pitch camera whose principal point is shifted toward the
top of the sensor. The image plane then stays vertical, so a standing body
keeps a uniform pixel scale along its length. That is the condition under
which proportion-based extension is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .dataset import AnnotationRecord, DetectionRecord, SceneConfig
from .errors import BehindCamera, CornerOutsideImage, FullyOccluded, ValidationError
from .feet import BodyProportions, BoundingBox, JointName, Keypoint, Level, Skeleton
from .geometry import CameraConfig, FloorPoint, ImagePoint, grid_corners

J = JointName


@dataclass(frozen=True)
class PinholeCamera:
    """Distortion-free camera.

    ``yaw_deg`` is the heading of the optical axis in the floor plane,
    counter-clockwise from +X. ``pitch_deg`` tilts it downward.
    """

    x: float
    y: float
    z: float
    yaw_deg: float = 90.0
    pitch_deg: float = 0.0
    focal: float = 900.0
    cx: float = 960.0
    cy: float = 540.0
    width: int = 1920
    height: int = 1080

    def __post_init__(self):
        if not self.z > 0:
            raise ValidationError("camera height must be positive")
        if not self.focal > 0:
            raise ValidationError("focal length must be positive")

    def axes(self) -> np.ndarray:
        """Rows: camera right, down and forward directions in world coordinates."""
        psi, th = math.radians(self.yaw_deg), math.radians(self.pitch_deg)
        fwd = [math.cos(psi) * math.cos(th), math.sin(psi) * math.cos(th), -math.sin(th)]
        right = [math.sin(psi), -math.cos(psi), 0.0]
        down = np.cross(fwd, right)
        return np.array([right, down, fwd])

    @property
    def ground_position(self) -> FloorPoint:
        return FloorPoint(float(self.x), float(self.y))

    def camera_config(self) -> CameraConfig:
        return CameraConfig(float(self.z), self.ground_position, self.width, self.height)

    def contains(self, p: ImagePoint) -> bool:
        return 0.0 <= p[0] <= self.width and 0.0 <= p[1] <= self.height


def project_point(cam: PinholeCamera, world) -> ImagePoint:
    """Perspective projection of a 3D point (cm); raises BehindCamera at depth <= 0."""
    v = np.asarray(world, dtype=float) - (cam.x, cam.y, cam.z)
    xc, yc, zc = cam.axes() @ v
    if zc <= 0:
        raise BehindCamera(f"point {tuple(world)} has camera depth {zc:.6g}")
    return ImagePoint(float(cam.focal * xc / zc + cam.cx), float(cam.focal * yc / zc + cam.cy))


DEFAULT_HALF_WIDTHS = {
    "eye": 3.2,
    "ear": 7.5,
    "shoulder": 20.0,
    "elbow": 23.0,
    "wrist": 24.0,
    "hip": 12.0,
    "knee": 10.0,
    "ankle": 9.0,
}

# occlusion group of every joint; deleting a level removes all joints in it
JOINT_LEVEL = {
    J.NOSE: Level.EYE,
    J.LEFT_EYE: Level.EYE,
    J.RIGHT_EYE: Level.EYE,
    J.LEFT_EAR: Level.EYE,
    J.RIGHT_EAR: Level.EYE,
    J.NECK: Level.SHOULDER,
    J.LEFT_SHOULDER: Level.SHOULDER,
    J.RIGHT_SHOULDER: Level.SHOULDER,
    J.LEFT_ELBOW: Level.SHOULDER,
    J.RIGHT_ELBOW: Level.SHOULDER,
    J.LEFT_WRIST: Level.HIP,
    J.RIGHT_WRIST: Level.HIP,
    J.LEFT_HIP: Level.HIP,
    J.RIGHT_HIP: Level.HIP,
    J.LEFT_KNEE: Level.KNEE,
    J.RIGHT_KNEE: Level.KNEE,
    J.LEFT_ANKLE: Level.ANKLE,
    J.RIGHT_ANKLE: Level.ANKLE,
}


@dataclass(frozen=True)
class StickPerson:
    """A straight (optionally leaned) body standing on ``position``.

    With ``ankles_at_floor`` the ankle keypoints mark the feet's ground
    contact. Otherwise they sit at the ankle level of the proportion table.
    """

    position: FloorPoint
    height: float = 170.0
    proportions: BodyProportions = field(default_factory=BodyProportions)
    half_widths: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_HALF_WIDTHS))
    lean_deg: float = 0.0
    ankles_at_floor: bool = True

    def __post_init__(self):
        if not self.height > 0:
            raise ValidationError("person height must be positive")

    def _fractions(self) -> dict[JointName, tuple[float, str | None]]:
        p = self.proportions
        ankle = 0.0 if self.ankles_at_floor else p[Level.ANKLE]
        return {
            J.NOSE: (p[Level.EYE], None),
            J.NECK: ((p[Level.EYE] + p[Level.SHOULDER]) / 2, None),
            J.LEFT_EYE: (p[Level.EYE], "eye"),
            J.LEFT_EAR: (p[Level.EYE], "ear"),
            J.LEFT_SHOULDER: (p[Level.SHOULDER], "shoulder"),
            J.LEFT_ELBOW: ((p[Level.SHOULDER] + p[Level.HIP]) / 2, "elbow"),
            J.LEFT_WRIST: (p[Level.HIP], "wrist"),
            J.LEFT_HIP: (p[Level.HIP], "hip"),
            J.LEFT_KNEE: (p[Level.KNEE], "knee"),
            J.LEFT_ANKLE: (ankle, "ankle"),
        }

    def joints_3d(self, lateral) -> dict[JointName, np.ndarray]:
        """World positions of all 18 joints; ``lateral`` is the horizontal unit vector to the person's left."""
        lat = np.array([lateral[0], lateral[1], 0.0])
        lat /= np.linalg.norm(lat)
        up = np.array([0.0, 0.0, 1.0])
        lean = math.radians(self.lean_deg)
        axis = math.cos(lean) * up + math.sin(lean) * lat
        across = -math.sin(lean) * up + math.cos(lean) * lat
        base = np.array([self.position[0], self.position[1], 0.0])
        out = {}
        for joint, (frac, width_key) in self._fractions().items():
            centre = base + frac * self.height * axis
            if width_key is None:
                out[joint] = centre
                continue
            w = self.half_widths[width_key]
            right = J(joint.value.replace("left_", "right_"))
            out[joint] = centre + w * across
            out[right] = centre - w * across
        return {j: out[j] for j in JointName}


@dataclass(frozen=True)
class SynthFrame:
    skeleton: DetectionRecord
    bbox: DetectionRecord
    annotation: AnnotationRecord


def synth_frame(
    cam: PinholeCamera,
    person: StickPerson,
    occlusion=(),
    frame_id: int = 0,
    jitter_px: float = 0.0,
    rng: np.random.Generator | None = None,
    confidence: float = 0.9,
) -> SynthFrame:
    """Render one frame: visible joints, a tight box over them, and the true position."""
    occluded = {Level(lv) for lv in occlusion}
    axes = cam.axes()
    joints = person.joints_3d(lateral=axes[0][:2])
    visible = {}
    for joint, world in joints.items():
        if JOINT_LEVEL[joint] in occluded:
            continue
        visible[joint] = project_point(cam, world)
    if not visible:
        raise FullyOccluded("every joint is occluded")
    if jitter_px > 0:
        if rng is None:
            raise ValidationError("jitter needs an explicit random generator")
        noise = rng.normal(0.0, jitter_px, size=(len(visible), 2))
        visible = {j: ImagePoint(p[0] + n[0], p[1] + n[1]) for (j, p), n in zip(visible.items(), noise)}

    xs = [p[0] for p in visible.values()]
    ys = [p[1] for p in visible.values()]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 - x0 <= 0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 <= 0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    skeleton = Skeleton({j: Keypoint(p, confidence) for j, p in visible.items()})
    box = BoundingBox(x0, y0, x1, y1, confidence)
    return SynthFrame(
        DetectionRecord(frame_id, skeleton, "synthetic-pose"),
        DetectionRecord(frame_id, box, "synthetic-bbox"),
        AnnotationRecord(frame_id, FloorPoint(*person.position)),
    )


def floor_to_image(cam: PinholeCamera, p) -> ImagePoint:
    return project_point(cam, (p[0], p[1], 0.0))


def calibration_from_grid(cam: PinholeCamera, width: float, height: float):
    """Projected grid corners (near-left, near-right, far-right, far-left) and their floor coordinates."""
    floor = grid_corners(width, height)
    image = []
    for corner in floor:
        try:
            p = floor_to_image(cam, corner)
        except BehindCamera as exc:
            raise CornerOutsideImage(f"grid corner {tuple(corner)} is behind the camera") from exc
        if not cam.contains(p):
            raise CornerOutsideImage(f"grid corner {tuple(corner)} projects to {tuple(p)}, outside the image")
        image.append(p)
    return image, floor


def scene_config(cam: PinholeCamera, width: float, height: float, name: str = "") -> SceneConfig:
    image, _ = calibration_from_grid(cam, width, height)
    return SceneConfig(
        image_width=cam.width,
        image_height=cam.height,
        camera_height=float(cam.z),
        camera_ground_xy=cam.ground_position,
        grid_width=float(width),
        grid_height=float(height),
        homography_points=tuple(image),
        name=name,
    )


def s1_camera(**overrides) -> PinholeCamera:
    """Wide-scene camera: 280 cm up, 3 m behind the near edge of a 540x300 cm grid."""
    params = dict(x=270.0, y=-300.0, z=280.0, yaw_deg=90.0, pitch_deg=0.0, focal=900.0, cx=960.0, cy=100.0)
    params.update(overrides)
    return PinholeCamera(**params)


def s1_side_camera(**overrides) -> PinholeCamera:
    """Second wide-scene camera on the +X side, looking along -X."""
    params = dict(x=840.0, y=150.0, z=280.0, yaw_deg=180.0, pitch_deg=0.0, focal=600.0, cx=960.0, cy=100.0)
    params.update(overrides)
    return PinholeCamera(**params)


S1_GRID = (540.0, 300.0)


def grid_positions(width: float, height: float, nx: int = 10, ny: int = 10, margin: float = 15.0):
    """Evenly spaced floor positions inside the grid, row by row from the near edge."""
    xs = np.linspace(margin, width - margin, nx)
    ys = np.linspace(margin, height - margin, ny)
    return [FloorPoint(float(x), float(y)) for y in ys for x in xs]


def random_positions(width: float, height: float, n: int, seed: int = 0, margin: float = 15.0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform((margin, margin), (width - margin, height - margin), size=(n, 2))
    return [FloorPoint(float(x), float(y)) for x, y in pts]


def dropout_mask(n: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean array, True where the frame's detection is dropped."""
    return rng.random(n) < rate
