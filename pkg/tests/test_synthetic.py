import math

import numpy as np
import pytest

from floorloc import synthetic as syn
from floorloc.errors import BehindCamera, CornerOutsideImage, FullyOccluded, ValidationError
from floorloc.feet import BoundingBox, JointName, Level, feet_from_bbox, feet_from_skeleton
from floorloc.geometry import project_to_floor, solve_homography
from oracles import pinhole_project


@pytest.mark.parametrize(
    "cam",
    [
        syn.PinholeCamera(0, 0, 280, yaw_deg=90, pitch_deg=0),
        syn.PinholeCamera(100, -50, 300, yaw_deg=37, pitch_deg=25, focal=700, cx=640, cy=360),
        syn.PinholeCamera(-20, 400, 250, yaw_deg=-120, pitch_deg=60, focal=1200),
    ],
)
def test_projection_matches_trig_oracle(cam):
    rng = np.random.default_rng(0)
    fwd = cam.axes()[2]
    for _ in range(50):
        world = np.array([cam.x, cam.y, cam.z]) + fwd * rng.uniform(50, 1000) + rng.normal(0, 80, 3)
        ours = syn.project_point(cam, world)
        ref = pinhole_project((cam.x, cam.y, cam.z), cam.yaw_deg, cam.pitch_deg, cam.focal, cam.cx, cam.cy, world)
        assert tuple(ours) == pytest.approx(ref, abs=1e-9)


def test_axes_are_orthonormal():
    ax = syn.PinholeCamera(0, 0, 200, yaw_deg=33, pitch_deg=41).axes()
    assert ax @ ax.T == pytest.approx(np.eye(3), abs=1e-15)
    assert np.linalg.det(ax) == pytest.approx(1.0)


def test_optical_axis_hits_principal_point():
    cam = syn.PinholeCamera(0, 0, 280, yaw_deg=90, cx=960, cy=100)
    assert syn.project_point(cam, (0, 500, 280)) == (960, 100)


def test_lateral_offset_scales_as_focal_over_depth():
    cam = syn.PinholeCamera(0, 0, 280, yaw_deg=90, focal=900)
    p = syn.project_point(cam, (30, 600, 280))
    # world +X is to the camera's right when looking along +Y
    assert p.x - cam.cx == pytest.approx(900 * 30 / 600)


def test_behind_camera():
    cam = syn.PinholeCamera(0, 0, 280, yaw_deg=90)
    with pytest.raises(BehindCamera):
        syn.project_point(cam, (0, -10, 0))
    with pytest.raises(BehindCamera):
        syn.project_point(cam, (50, -1, 100))


def test_camera_validation():
    with pytest.raises(ValidationError):
        syn.PinholeCamera(0, 0, 0)
    with pytest.raises(ValidationError):
        syn.PinholeCamera(0, 0, 10, focal=-1)


def test_person_joints():
    person = syn.StickPerson((100, 200), height=180)
    joints = person.joints_3d((1, 0))
    assert len(joints) == 18
    assert joints[JointName.NOSE][2] == pytest.approx(0.94 * 180)
    assert joints[JointName.LEFT_HIP][2] == pytest.approx(0.52 * 180)
    assert joints[JointName.LEFT_HIP][0] - joints[JointName.RIGHT_HIP][0] == pytest.approx(24)
    assert joints[JointName.LEFT_ANKLE][2] == 0.0
    raised = syn.StickPerson((0, 0), height=100, ankles_at_floor=False).joints_3d((1, 0))
    assert raised[JointName.LEFT_ANKLE][2] == pytest.approx(4)


def test_person_lean_keeps_segment_lengths():
    person = syn.StickPerson((0, 0), height=170, lean_deg=10)
    j = person.joints_3d((0, 1))
    assert j[JointName.NOSE][2] == pytest.approx(0.94 * 170 * math.cos(math.radians(10)))
    assert j[JointName.NOSE][1] == pytest.approx(0.94 * 170 * math.sin(math.radians(10)))


def test_synth_frame_occlusion_counts(s1_cam):
    person = syn.StickPerson((270, 150))
    assert len(syn.synth_frame(s1_cam, person).skeleton.payload) == 18
    hidden = syn.synth_frame(s1_cam, person, occlusion=("knee", "ankle"))
    assert len(hidden.skeleton.payload) == 14
    with pytest.raises(FullyOccluded):
        syn.synth_frame(s1_cam, person, occlusion=tuple(Level))


def test_bbox_of_lower_occlusion_ends_at_hips(s1_cam):
    person = syn.StickPerson((270, 150))
    frame = syn.synth_frame(s1_cam, person, occlusion=("knee", "ankle"))
    box = frame.bbox.payload
    hip = frame.skeleton.payload.joints[JointName.LEFT_HIP].point
    assert box.y_max == pytest.approx(hip.y)


def test_clean_frame_is_exact(s1_cam, s1_hom):
    for p in [(20, 20), (270, 150), (520, 280)]:
        frame = syn.synth_frame(s1_cam, syn.StickPerson(p))
        for est in (feet_from_skeleton(frame.skeleton.payload), feet_from_bbox(frame.bbox.payload)):
            assert tuple(project_to_floor(s1_hom, est.point)) == pytest.approx(p, abs=1e-6)


def test_jitter_requires_rng(s1_cam):
    with pytest.raises(ValidationError):
        syn.synth_frame(s1_cam, syn.StickPerson((10, 10)), jitter_px=1.0)


def test_jitter_is_seeded(s1_cam):
    a = syn.synth_frame(s1_cam, syn.StickPerson((10, 10)), jitter_px=2.0, rng=np.random.default_rng(4))
    b = syn.synth_frame(s1_cam, syn.StickPerson((10, 10)), jitter_px=2.0, rng=np.random.default_rng(4))
    assert a == b


def test_calibration_corners_in_canonical_order(s1_cam):
    image, floor = syn.calibration_from_grid(s1_cam, *syn.S1_GRID)
    assert floor == [(0, 0), (540, 0), (540, 300), (0, 300)]
    nl, nr, fr, fl = image
    assert nl.x < nr.x and fl.x < fr.x
    assert nl.y > fl.y and nr.y > fr.y  # near edge is lower in the image


def test_overhead_camera_is_symmetric():
    cam = syn.PinholeCamera(50, 50, 300, yaw_deg=90, pitch_deg=90, focal=500, cx=500, cy=500, width=1000, height=1000)
    image, _ = syn.calibration_from_grid(cam, 100, 100)
    xs = sorted(p.x for p in image)
    ys = sorted(p.y for p in image)
    assert xs[0] - 500 == pytest.approx(500 - xs[-1])
    assert ys[0] - 500 == pytest.approx(500 - ys[-1])
    h = solve_homography(image, _)
    assert tuple(project_to_floor(h, (500, 500))) == pytest.approx((50, 50), abs=1e-9)


def test_corner_outside_image():
    cam = syn.s1_camera(pitch_deg=-30)
    with pytest.raises(CornerOutsideImage):
        syn.calibration_from_grid(cam, *syn.S1_GRID)
    with pytest.raises(CornerOutsideImage):
        syn.calibration_from_grid(syn.s1_camera(yaw_deg=-90), *syn.S1_GRID)


def test_homography_closes_over_the_grid(s1_cam, s1_hom):
    for p in syn.grid_positions(*syn.S1_GRID, nx=7, ny=7, margin=0):
        q = project_to_floor(s1_hom, syn.floor_to_image(s1_cam, p))
        assert tuple(q) == pytest.approx(tuple(p), abs=1e-6)


def test_side_camera_sees_the_grid():
    image, _ = syn.calibration_from_grid(syn.s1_side_camera(), *syn.S1_GRID)
    assert len(image) == 4


def test_scene_config_round_trip(tmp_path, s1_cam):
    from floorloc.dataset import load_scene_config

    cfg = syn.scene_config(s1_cam, *syn.S1_GRID, name="S1_Wide")
    cfg.save(tmp_path / "s.cfg")
    assert load_scene_config(tmp_path / "s.cfg") == cfg
    assert cfg.camera().ground_position == (270, -300)


def test_positions_helpers():
    g = syn.grid_positions(540, 300)
    assert len(g) == 100 and g[0] == (15, 15) and g[-1] == (525, 285)
    r = syn.random_positions(540, 300, 50, seed=3)
    assert r == syn.random_positions(540, 300, 50, seed=3)
    assert all(15 <= p.X <= 525 and 15 <= p.Y <= 285 for p in r)
    m = syn.dropout_mask(10000, 0.2, np.random.default_rng(0))
    assert 0.18 < m.mean() < 0.22


def test_bbox_padding_for_single_joint(s1_cam):
    frame = syn.synth_frame(s1_cam, syn.StickPerson((270, 150)), occlusion=("shoulder", "hip", "knee", "ankle"))
    box = frame.bbox.payload
    assert isinstance(box, BoundingBox) and box.height > 0


def test_vertical_offset_grows_quadratically(s1_cam, s1_hom):
    # an offset along the image column moves the ray's floor hit by about d^2 / (f * camera height)
    errs = []
    for d in (310.0, 620.0):
        p = (s1_cam.x, s1_cam.y + d)
        q = syn.floor_to_image(s1_cam, p)
        r = project_to_floor(s1_hom, (q.x, q.y - 5.0))
        errs.append(math.dist(r, p))
    assert 3.9 < errs[1] / errs[0] < 4.1
