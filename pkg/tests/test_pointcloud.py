import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nerfbench.geometry import PinholeCamera, look_at
from nerfbench.pointcloud import (PLY_VERTEX, PlyFormatError, PointCloud, backproject,
                                  filter_outliers, load_ply, mean_knn_distance, merge, ply_header,
                                  save_ply)
from nerfbench.scene import CaptureFrame, TriangleMesh, render_frame


def brute_knn_mean(points, k):
    d = np.linalg.norm(points[:, None] - points[None], axis=-1)
    np.fill_diagonal(d, np.inf)
    return np.sort(d, axis=1)[:, :k].mean(axis=1)


def lattice(n=6, spacing=0.1):
    g = np.arange(n) * spacing
    return np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)


def test_plane_backprojects_onto_plane():
    plane = TriangleMesh([[-9, -9, 0], [9, -9, 0], [9, 9, 0], [-9, 9, 0]], [[0, 1, 2], [0, 2, 3]])
    f = render_frame(plane, PinholeCamera(fov_y=40, width=40, height=30), look_at((0, 0, 5), (0, 0, 0)))
    cloud = backproject(f)
    assert len(cloud) == f.mask.sum() == 1200
    assert np.abs(cloud.points[:, 2]).max() < 1e-4


def test_empty_mask_gives_empty_cloud():
    cam = PinholeCamera(width=4, height=3)
    f = CaptureFrame(np.zeros((3, 4, 3)), np.full((3, 4), np.inf), np.zeros((3, 4), bool),
                     look_at((0, 0, 5), (0, 0, 0)), cam)
    assert len(backproject(f)) == 0


def test_sphere_points_on_unit_sphere(small_sphere_dataset):
    for f in small_sphere_dataset.frames:
        c = backproject(f)
        assert len(c) == f.mask.sum()
        assert np.abs(np.linalg.norm(c.points, axis=1) - 1.0).max() < 2e-3
        assert np.allclose(c.colors, f.rgb[f.mask])


def test_merge_concatenates():
    a = PointCloud(np.ones((10, 3)), np.zeros((10, 3)))
    b = PointCloud(np.zeros((20, 3)), np.ones((20, 3)))
    assert len(merge([])) == 0
    assert merge([a]).points.tolist() == a.points.tolist()
    m = merge([a, b])
    assert len(m) == 30 and np.array_equal(m.points[10:], b.points)


@settings(max_examples=30, deadline=None)
@given(st.integers(10, 60), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_knn_statistic_matches_brute_force(n, k, seed):
    pts = np.random.default_rng(seed).normal(size=(n, 3))
    assert np.allclose(mean_knn_distance(pts, k), brute_knn_mean(pts, k), rtol=1e-12)


def test_planted_outlier_is_the_only_point_removed():
    pts = lattice()
    extent = np.ptp(pts, axis=0).max()
    far = pts.mean(axis=0) + [100 * extent, 0, 0]
    cloud = PointCloud(np.vstack([pts, far]), np.zeros((len(pts) + 1, 3)))
    stat = brute_knn_mean(cloud.points, 8)
    expect = stat <= stat.mean() + 2.0 * stat.std()
    assert expect.sum() == len(pts) and not expect[-1]
    kept = filter_outliers(cloud, k=8, std_ratio=2.0)
    assert np.array_equal(kept.points, pts)


def test_small_cloud_is_returned_unchanged():
    cloud = PointCloud(np.random.default_rng(0).normal(size=(8, 3)), np.zeros((8, 3)))
    with pytest.warns(UserWarning):
        assert filter_outliers(cloud, k=8) is cloud


def test_second_pass_works_on_survivors():
    rng = np.random.default_rng(3)
    pts = np.vstack([rng.normal(size=(300, 3)), rng.uniform(-8, 8, (15, 3))])
    cloud = PointCloud(pts, np.zeros_like(pts))
    once = filter_outliers(cloud, 10, 1.5)
    twice = filter_outliers(once, 10, 1.5)
    assert len(twice) <= len(once) < len(cloud)
    stat = brute_knn_mean(once.points, 10)
    assert len(twice) == (stat <= stat.mean() + 1.5 * stat.std()).sum()


def test_filter_rejects_bad_parameters():
    cloud = PointCloud(np.zeros((30, 3)), np.zeros((30, 3)))
    with pytest.raises(ValueError):
        filter_outliers(cloud, k=0)
    with pytest.raises(ValueError):
        filter_outliers(cloud, std_ratio=0.0)


def test_ply_record_is_fifteen_bytes():
    assert PLY_VERTEX.itemsize == 15


def test_empty_ply(tmp_path):
    n = save_ply(PointCloud.empty(), tmp_path / "e.ply")
    assert b"element vertex 0\n" in (tmp_path / "e.ply").read_bytes()
    assert n == len(ply_header(0))
    assert len(load_ply(tmp_path / "e.ply")) == 0


def test_ply_round_trip_and_size(tmp_path):
    pts = np.array([[0.0, 1.0, 2.0], [-1.5, 0.25, 3.0], [1e3, -2e-3, 0.5]])
    cols = np.array([[0, 0, 0], [1, 0.5, 0.25], [1, 1, 1]])
    n = save_ply(PointCloud(pts, cols), tmp_path / "p.ply")
    assert n == (tmp_path / "p.ply").stat().st_size == len(ply_header(3)) + 15 * 3
    back = load_ply(tmp_path / "p.ply")
    assert np.array_equal(back.points, pts.astype(np.float32).astype(np.float64))
    assert np.array_equal(np.round(back.colors * 255), np.round(cols * 255))


def test_ply_header_text():
    assert ply_header(7).decode().splitlines() == [
        "ply", "format binary_little_endian 1.0", "element vertex 7",
        "property float x", "property float y", "property float z",
        "property uchar red", "property uchar green", "property uchar blue", "end_header"]


@pytest.mark.parametrize("mutate, msg", [
    (lambda b: b"plx" + b[3:], "byte 0"),
    (lambda b: b[:-1], "byte"),
    (lambda b: b.replace(b"binary_little_endian", b"ascii"), "unsupported format"),
    (lambda b: b.replace(b"end_header\n", b"end_hdr\n"), "end_header"),
])
def test_corrupt_ply_reports_offset(tmp_path, mutate, msg):
    save_ply(PointCloud(np.zeros((2, 3)), np.zeros((2, 3))), tmp_path / "p.ply")
    (tmp_path / "bad.ply").write_bytes(mutate((tmp_path / "p.ply").read_bytes()))
    with pytest.raises(PlyFormatError, match=msg):
        load_ply(tmp_path / "bad.ply")
