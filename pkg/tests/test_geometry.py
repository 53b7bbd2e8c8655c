import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nerfbench.geometry import (PinholeCamera, PoseSet, Ray, Transform, compose_transform,
                                generate_rays, look_at, project_points, rotation_z,
                                sample_capture_poses)

finite = st.floats(-50, 50, allow_nan=False)
vec3 = st.tuples(finite, finite, finite)


def test_compose_identity_is_identity_matrix():
    assert np.array_equal(compose_transform(np.eye(3), (0, 0, 0)).as_matrix(), np.eye(4))


def test_pure_translation_fills_last_column():
    m = compose_transform(np.eye(3), (1, 2, 3)).as_matrix()
    assert np.array_equal(m[:3, :3], np.eye(3))
    assert np.array_equal(m[:, 3], [1, 2, 3, 1])


def test_rz90_maps_x_to_y():
    t = compose_transform(rotation_z(math.pi / 2), (0, 0, 0))
    assert np.allclose(t.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("r", [np.diag([1.0, 1.0, -1.0]), np.eye(3) * 2.0, np.ones((3, 3))])
def test_transform_rejects_non_rotations(r):
    with pytest.raises(ValueError):
        Transform(r, np.zeros(3))


def test_from_matrix_checks_bottom_row():
    m = np.eye(4)
    m[3, 0] = 1.0
    with pytest.raises(ValueError, match="bottom row"):
        Transform.from_matrix(m)


def test_transform_arrays_are_read_only():
    t = compose_transform(np.eye(3), (1, 2, 3))
    with pytest.raises(ValueError):
        t.p[0] = 5.0


def test_look_at_down_negative_z():
    t = look_at((0, 0, 5), (0, 0, 0), (0, 1, 0))
    assert np.allclose(t.p, [0, 0, 5])
    assert np.allclose(t.r, np.eye(3), atol=1e-15)


def test_look_at_from_positive_x():
    t = look_at((5, 0, 0), (0, 0, 0), (0, 1, 0))
    assert np.allclose(-t.r[:, 2], [-1, 0, 0], atol=1e-15)


def test_look_at_degenerate_inputs():
    with pytest.raises(ValueError):
        look_at((1, 2, 3), (1, 2, 3))
    with pytest.raises(ValueError):
        look_at((0, 5, 0), (0, 0, 0), up=(0, 1, 0))


@settings(max_examples=200, deadline=None)
@given(vec3, vec3)
def test_look_at_is_rigid_and_aims_at_target(eye, target):
    eye, target = np.array(eye), np.array(target)
    fwd = target - eye
    if np.linalg.norm(fwd) < 1e-3 or np.linalg.norm(np.cross(fwd / np.linalg.norm(fwd), [0, 1, 0])) < 1e-3:
        return
    t = look_at(eye, target)
    assert np.allclose(t.r.T @ t.r, np.eye(3), atol=1e-9)
    assert np.isclose(np.linalg.det(t.r), 1.0)
    assert np.allclose(-t.r[:, 2], fwd / np.linalg.norm(fwd), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(-math.pi, math.pi), vec3, vec3)
def test_inverse_apply_undoes_apply(angle, p, x):
    t = compose_transform(rotation_z(angle), p)
    assert np.allclose(t.inverse_apply(t.apply(np.array(x))), x, atol=1e-9)


def test_center_pixel_of_odd_image_is_optical_axis():
    cam = PinholeCamera(fov_y=30.0, width=5, height=5)
    _, d = generate_rays(cam, compose_transform(np.eye(3), (0, 0, 0)))
    assert np.allclose(d[2, 2], [0, 0, -1], atol=1e-15)


def test_top_center_pixel_at_90_degrees():
    cam = PinholeCamera(fov_y=90.0, width=3, height=3)
    o, d = generate_rays(cam, compose_transform(np.eye(3), (1, 2, 3)))
    expect = np.array([0.0, 2.0 / 3.0, -1.0])
    assert np.allclose(d[0, 1], expect / np.linalg.norm(expect), atol=1e-12)
    assert np.allclose(o, [1, 2, 3])


def test_rays_are_unit_and_row_zero_is_top():
    cam = PinholeCamera(fov_y=40.0, width=8, height=6)
    _, d = generate_rays(cam, look_at((3, 1, 4), (0, 0, 0)))
    assert np.allclose(np.linalg.norm(d, axis=-1), 1.0)
    _, d0 = generate_rays(cam, compose_transform(np.eye(3), (0, 0, 0)))
    assert d0[0, 0, 1] > 0 > d0[-1, 0, 1]
    assert d0[0, 0, 0] < 0 < d0[0, -1, 0]


def test_project_points_inverts_generate_rays():
    cam = PinholeCamera(fov_y=25.0, width=11, height=7)
    pose = look_at((2, -3, 4), (0.1, 0.2, 0.0), (0, 0, 1))
    o, d = generate_rays(cam, pose)
    row, col, front = project_points(cam, pose, o + 3.7 * d)
    jj, ii = np.mgrid[0:7, 0:11]
    assert front.all()
    assert np.array_equal(row, jj) and np.array_equal(col, ii)


def test_points_behind_camera_are_flagged():
    cam = PinholeCamera()
    _, _, front = project_points(cam, look_at((0, 0, 5), (0, 0, 0)), [[0, 0, 6.0], [0, 0, 0.0]])
    assert front.tolist() == [False, True]


def test_camera_validation_and_dict_round_trip():
    with pytest.raises(ValueError):
        PinholeCamera(fov_y=0.0)
    with pytest.raises(ValueError):
        PinholeCamera(width=0)
    cam = PinholeCamera(fov_y=33.0, width=20, height=10)
    assert PinholeCamera.from_dict(json.loads(json.dumps(cam.to_dict()))) == cam
    assert cam.tan_half_x == pytest.approx(2 * cam.tan_half_y)


def test_ray_normalizes_direction_and_rejects_zero():
    assert np.allclose(Ray((0, 0, 0), (0, 0, -3)).direction, [0, 0, -1])
    with pytest.raises(ValueError):
        Ray((0, 0, 0), (0, 0, 0))


def test_single_capture_pose_sits_on_z_axis():
    (pose,) = sample_capture_poses(1, radius=4.0)
    assert np.allclose(pose.p, [0, 0, 4])
    assert np.allclose(pose.forward, [0, 0, -1])


def test_capture_poses_hemisphere():
    target = np.array([0.5, -0.25, 0.1])
    poses = sample_capture_poses(106, radius=4.0, target=target)
    assert poses.count == 106
    for t in poses:
        assert t.p[2] >= target[2] - 1e-12
        assert abs(np.linalg.norm(t.p - target) - 4.0) < 1e-9
        to_target = (target - t.p) / 4.0
        assert np.allclose(t.forward, to_target, atol=1e-12)


def test_full_sphere_reaches_below_equator_and_is_deterministic():
    a = sample_capture_poses(40, hemisphere=False)
    assert min(t.p[2] for t in a) < -7.9
    assert PoseSet.from_json(a.to_json()) == a == sample_capture_poses(40, hemisphere=False)


def test_pose_json_layout():
    doc = json.loads(sample_capture_poses(2).to_json())
    assert doc["convention"] == "opengl"
    assert [len(m) for m in doc["poses"]] == [16, 16]
    with pytest.raises(ValueError):
        PoseSet.from_json(json.dumps({"convention": "opencv", "poses": []}))
