"""Inverse-distance fusion of per-camera floor estimates.

A camera that missed the frame is ignored; a lone estimate passes through
unchanged. With both cameras present the result is
``(d2*p1 + d1*p2) / (d1 + d2)``, which weights each camera by the inverse of
its distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .geometry import CameraConfig, FloorPoint, camera_distance_3d, camera_floor_distance


@dataclass(frozen=True)
class CameraEstimate:
    position: FloorPoint | None
    distance: float | None
    camera_id: str = ""

    def __post_init__(self):
        if (self.position is None) != (self.distance is None):
            raise ValidationError("distance must be given exactly when a position is")
        if self.distance is not None and not self.distance >= 0:
            raise ValidationError(f"distance must be non-negative, got {self.distance}")

    @property
    def present(self) -> bool:
        return self.position is not None

    @classmethod
    def missing(cls, camera_id: str = "") -> CameraEstimate:
        return cls(None, None, camera_id)

    @classmethod
    def from_camera(cls, cam: CameraConfig, position, camera_id: str = "", weight: str = "floor"):
        """Estimate with its distance measured from ``cam`` (``"floor"`` or ``"3d"``)."""
        if position is None:
            return cls.missing(camera_id)
        if weight == "floor":
            d = camera_floor_distance(cam, position)
        elif weight == "3d":
            d = camera_distance_3d(cam, position)
        else:
            raise ValidationError(f"unknown distance weight {weight!r}")
        return cls(FloorPoint(*position), d, camera_id)


@dataclass(frozen=True)
class FusedEstimate:
    position: FloorPoint | None
    contributors: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.position is None) != (not self.contributors):
            raise ValidationError("a fused position needs at least one contributor")


def fuse_pair(e1: CameraEstimate, e2: CameraEstimate) -> FusedEstimate:
    if not e1.present and not e2.present:
        return FusedEstimate(None)
    if not e2.present:
        return FusedEstimate(e1.position, (e1.camera_id,))
    if not e1.present:
        return FusedEstimate(e2.position, (e2.camera_id,))
    (x1, y1), (x2, y2) = e1.position, e2.position
    d1, d2 = e1.distance, e2.distance
    ids = (e1.camera_id, e2.camera_id)
    total = d1 + d2
    if total == 0.0:
        return FusedEstimate(FloorPoint((x1 + x2) / 2, (y1 + y2) / 2), ids)
    return FusedEstimate(FloorPoint((d2 * x1 + d1 * x2) / total, (d2 * y1 + d1 * y2) / total), ids)


def fuse_many(estimates) -> FusedEstimate:
    """N-camera generalisation of fuse_pair.

    Camera i gets weight prod_{j != i} d_j, which is proportional to 1/d_i and
    stays finite when a distance is zero. For two cameras the arithmetic is
    the same as fuse_pair, operation for operation.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValidationError("fuse_many needs at least one estimate")
    present = [e for e in estimates if e.present]
    if not present:
        return FusedEstimate(None)
    if len(present) == 1:
        e = present[0]
        return FusedEstimate(e.position, (e.camera_id,))
    if len(present) == 2:
        return fuse_pair(*present)

    ids = tuple(e.camera_id for e in present)
    weights = [math.prod(f.distance for j, f in enumerate(present) if j != i) for i in range(len(present))]
    total = math.fsum(weights)
    if total == 0.0:
        # two or more cameras sit on their own estimates; take the plain mean of those
        zero = [e for e in present if e.distance == 0.0]
        n = len(zero)
        return FusedEstimate(
            FloorPoint(math.fsum(e.position[0] for e in zero) / n, math.fsum(e.position[1] for e in zero) / n),
            tuple(e.camera_id for e in zero),
        )
    X = math.fsum(w * e.position[0] for w, e in zip(weights, present)) / total
    Y = math.fsum(w * e.position[1] for w, e in zip(weights, present)) / total
    return FusedEstimate(FloorPoint(X, Y), ids)
