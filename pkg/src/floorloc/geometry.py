"""Image-to-floor homography: calibration, projection and the distance error model.

Image points are pixels with the origin at the top-left corner and y pointing
down. Floor points are centimetres in the grid frame, origin at the grid corner
nearest-left as seen from the camera.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateCalibration, NonPositiveDistance, ProjectiveHorizon, ValidationError

CONDITION_LIMIT = 1e12
HORIZON_EPS = 1e-9
COLLINEAR_TOL = 1e-9


class ImagePoint(NamedTuple):
    x: float
    y: float


class FloorPoint(NamedTuple):
    X: float
    Y: float


def _check_finite(*values):
    if not all(math.isfinite(v) for v in values):
        raise ValidationError(f"non-finite coordinate in {values}")


@dataclass(frozen=True)
class Homography:
    """Eight projective parameters mapping image pixels onto the floor.

    ``front_sign`` is the sign of the denominator at the calibration points; a
    point whose denominator has the other sign lies beyond the vanishing line.
    It is ``None`` when unknown (hand-built homographies).
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float
    front_sign: int | None = None

    @classmethod
    def identity(cls) -> Homography:
        return cls(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, front_sign=1)

    @classmethod
    def from_params(cls, params: Sequence[float], front_sign: int | None = None) -> Homography:
        if len(params) != 8:
            raise ValidationError(f"expected 8 homography parameters, got {len(params)}")
        return cls(*(float(p) for p in params), front_sign=front_sign)

    @property
    def params(self) -> tuple[float, ...]:
        return (self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h)

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a, self.b, self.c], [self.d, self.e, self.f], [self.g, self.h, 1.0]]
        )

    def denominator(self, p) -> float:
        return self.g * p[0] + self.h * p[1] + 1.0

    def __call__(self, p) -> FloorPoint:
        return project_to_floor(self, p)


def is_collinear(p, q, r, tol: float = COLLINEAR_TOL) -> bool:
    """True when the triangle pqr is flat relative to its longest side."""
    cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    scale = max(
        (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2,
        (r[0] - p[0]) ** 2 + (r[1] - p[1]) ** 2,
        (r[0] - q[0]) ** 2 + (r[1] - q[1]) ** 2,
    )
    return scale == 0.0 or abs(cross) <= tol * scale


def check_general_position(points, what="points"):
    pts = [tuple(map(float, p)) for p in points]
    if len(pts) != 4:
        raise DegenerateCalibration(f"need exactly 4 {what}, got {len(pts)}")
    for p in pts:
        if not all(math.isfinite(v) for v in p):
            raise DegenerateCalibration(f"non-finite {what}: {p}")
    for p, q in combinations(pts, 2):
        if p == q:
            raise DegenerateCalibration(f"repeated {what}: {p}")
    for tri in combinations(pts, 3):
        if is_collinear(*tri):
            raise DegenerateCalibration(f"three collinear {what}: {tri}")


def _similarity_normalizer(pts: np.ndarray) -> np.ndarray:
    # centroid to origin, mean distance sqrt(2)
    c = pts.mean(axis=0)
    dist = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    s = math.sqrt(2.0) / dist
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def dlt_system(camera_points, map_points) -> tuple[np.ndarray, np.ndarray]:
    """The 8x8 linear system A·(a..h) = (X1..X4, Y1..Y4), rows ordered as X then Y."""
    A = np.zeros((8, 8))
    rhs = np.zeros(8)
    for i, ((x, y), (X, Y)) in enumerate(zip(camera_points, map_points)):
        A[i] = [x, y, 1.0, 0.0, 0.0, 0.0, -x * X, -y * X]
        A[i + 4] = [0.0, 0.0, 0.0, x, y, 1.0, -x * Y, -y * Y]
        rhs[i] = X
        rhs[i + 4] = Y
    return A, rhs


def gauss_solve(A: np.ndarray, b: np.ndarray, condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """Dense Gaussian elimination with partial pivoting.

    The max/min pivot magnitude ratio serves as the condition estimate; the
    system is rejected when it exceeds ``condition_limit``.
    """
    n = len(b)
    M = np.array(A, dtype=float)
    v = np.array(b, dtype=float)
    pivots = []
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if M[p, k] == 0.0:
            raise DegenerateCalibration("singular calibration system")
        if p != k:
            M[[k, p]] = M[[p, k]]
            v[[k, p]] = v[[p, k]]
        pivots.append(abs(M[k, k]))
        factors = M[k + 1 :, k] / M[k, k]
        M[k + 1 :, k:] -= np.outer(factors, M[k, k:])
        v[k + 1 :] -= factors * v[k]
    ratio = max(pivots) / min(pivots)
    if not ratio <= condition_limit:
        raise DegenerateCalibration(f"calibration system ill-conditioned (pivot ratio {ratio:.3g})")
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (v[k] - M[k, k + 1 :] @ x[k + 1 :]) / M[k, k]
    return x


def solve_homography(camera_points, map_points, condition_limit: float = CONDITION_LIMIT) -> Homography:
    """Fit the 8-parameter homography through four image/floor correspondences.

    Both point sets are similarity-normalized before the 8x8 solve and the
    result is mapped back, so pixel and centimetre magnitudes do not degrade
    the pivoting.
    """
    check_general_position(camera_points, "camera points")
    check_general_position(map_points, "map points")
    cam = np.asarray(camera_points, dtype=float)
    flo = np.asarray(map_points, dtype=float)
    Tc = _similarity_normalizer(cam)
    Tm = _similarity_normalizer(flo)
    cam_n = cam @ Tc[:2, :2].T + Tc[:2, 2]
    flo_n = flo @ Tm[:2, :2].T + Tm[:2, 2]

    A, rhs = dlt_system(cam_n, flo_n)
    a, b, c, d, e, f, g, h = gauss_solve(A, rhs, condition_limit)
    Hn = np.array([[a, b, c], [d, e, f], [g, h, 1.0]])
    H = np.linalg.solve(Tm, Hn @ Tc)
    scale = H[2, 2]
    if abs(scale) <= 1e-12 * np.abs(H).max():
        # the image origin maps to infinity; the 8-parameter form cannot express this
        raise DegenerateCalibration("homography has a vanishing constant term")
    H = H / scale
    params = (H[0, 0], H[0, 1], H[0, 2], H[1, 0], H[1, 1], H[1, 2], H[2, 0], H[2, 1])
    dens = [H[2, 0] * x + H[2, 1] * y + 1.0 for x, y in cam]
    signs = {int(np.sign(w)) for w in dens}
    front = signs.pop() if len(signs) == 1 else None
    return Homography.from_params([float(p) for p in params], front_sign=front or None)


def project_to_floor(hom: Homography, p, eps: float = HORIZON_EPS) -> FloorPoint:
    """Map an image point to floor coordinates.

    Raises ProjectiveHorizon when the point sits on the vanishing line (the
    denominator is negligible against its own terms) or beyond it.
    """
    x, y = float(p[0]), float(p[1])
    gx, hy = hom.g * x, hom.h * y
    w = gx + hy + 1.0
    if abs(w) <= eps * (1.0 + abs(gx) + abs(hy)):
        raise ProjectiveHorizon(f"image point {(x, y)} lies on the vanishing line")
    if hom.front_sign is not None and (w > 0) != (hom.front_sign > 0):
        raise ProjectiveHorizon(f"image point {(x, y)} lies beyond the vanishing line")
    X = (hom.a * x + hom.b * y + hom.c) / w
    Y = (hom.d * x + hom.e * y + hom.f) / w
    return FloorPoint(X, Y)


def calibration_residuals(hom: Homography, camera_points, map_points) -> list[float]:
    """Per-correspondence error relative to the extent of the map points."""
    flo = np.asarray(map_points, dtype=float)
    extent = max(float(np.abs(flo).max()), float(np.ptp(flo, axis=0).max()))
    out = []
    for p, q in zip(camera_points, map_points):
        r = project_to_floor(hom, p)
        out.append(math.hypot(r.X - q[0], r.Y - q[1]) / extent)
    return out


def grid_corners(width: float, height: float) -> list[FloorPoint]:
    """Grid corners in (near-left, near-right, far-right, far-left) order."""
    return [
        FloorPoint(0.0, 0.0),
        FloorPoint(float(width), 0.0),
        FloorPoint(float(width), float(height)),
        FloorPoint(0.0, float(height)),
    ]


@dataclass(frozen=True)
class CameraConfig:
    height: float
    ground_position: FloorPoint
    image_width: int
    image_height: int

    def __post_init__(self):
        if not self.height > 0:
            raise ValidationError(f"camera height must be positive, got {self.height}")
        if not (self.image_width > 0 and self.image_height > 0):
            raise ValidationError("image dimensions must be positive")
        _check_finite(*self.ground_position)


def camera_floor_distance(cam: CameraConfig, p) -> float:
    g = cam.ground_position
    return math.hypot(p[0] - g[0], p[1] - g[1])


def camera_distance_3d(cam: CameraConfig, p) -> float:
    """Straight-line distance from the lens to a floor point."""
    return math.hypot(camera_floor_distance(cam, p), cam.height)


def expected_error_ratio(d1: float, d2: float) -> float:
    """Predicted floor-error ratio e2/e1 for the same pixel error at distances d2 and d1."""
    if not (d1 > 0 and d2 > 0):
        raise NonPositiveDistance(f"distances must be positive, got {d1}, {d2}")
    return d2 / d1
