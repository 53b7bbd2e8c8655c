import json
import math

import numpy as np
import pytest

from nerfbench.assets import data_path
from nerfbench.bench import (BenchConfig, BenchRecord, GridCellResult, GridSpec, average_by,
                             build_and_measure, emit_report, load_records, load_results, run_grid,
                             save_records, save_results)
from nerfbench.bench.report import AVERAGE_HEADER, GRID_HEADER, fmt, fmt_lr
from nerfbench.metrics import QualityReport, psnr
from nerfbench.pointcloud import ply_header
from nerfbench.tinynerf import EncodingConfig, RenderConfig, TrainConfig
from nerfbench.voxelcarve import HEADER
from reference_tables import AVERAGE_TABLE, GRID_TABLE


def table_results():
    return [GridCellResult(r.id, r.seed, r.lr, r.n_freqs, r.loss, r.psnr_db, 0.0) for r in GRID_TABLE]


# --- grid spec --------------------------------------------------------------------

def test_default_spec_matches_reference_table_order():
    spec = GridSpec.default()
    assert len(spec) == 36
    cells = list(spec.cells())
    assert cells == [(r.seed, r.lr, r.n_freqs) for r in GRID_TABLE]


def test_spec_round_trip_and_validation(tmp_path):
    spec = GridSpec.from_dict({"seeds": [1, 2], "lrs": [0.1], "freqs": [0, 3]})
    assert list(spec.cells()) == [(1, 0.1, 0), (1, 0.1, 3), (2, 0.1, 0), (2, 0.1, 3)]
    (tmp_path / "s.json").write_text(json.dumps(spec.to_dict()))
    assert GridSpec.load(tmp_path / "s.json") == spec
    for bad in ({"seeds": [], "lrs": [0.1], "freqs": [1]}, {"seeds": [1], "lrs": [-1.0], "freqs": [1]},
                {"seeds": [1], "lrs": [0.1], "freqs": [-2]}):
        with pytest.raises(ValueError):
            GridSpec.from_dict(bad)


def test_shipped_spec_file_is_the_default():
    assert GridSpec.load(data_path("grid_spec.json")) == GridSpec.default()


# --- averaging against the reference tables -------------------------------------------

def test_averages_reproduce_reference_summary():
    rows = average_by(table_results())
    assert len(rows) == len(AVERAGE_TABLE) == 12
    for got, ref in zip(rows, AVERAGE_TABLE):
        assert (got["lr"], got["n_freqs"]) == (ref.lr, ref.n_freqs)
        assert got["count"] == 3 and got["diverged"] == 0
        assert abs(got["loss"] - ref.loss) < 5e-5, ref
        # the summary reports the PSNR of the rounded mean loss
        assert abs(psnr(round(got["loss"], 4)) - ref.psnr_db) < 5e-4, ref


def test_nine_frequencies_win_in_every_learning_rate_group():
    rows = average_by(table_results())
    for lr in {r["lr"] for r in rows}:
        group = [r for r in rows if r["lr"] == lr]
        assert min(group, key=lambda r: r["loss"])["n_freqs"] == 9


def test_diverged_cells_are_counted_not_averaged():
    res = [GridCellResult(1, 1, 0.1, 2, 0.01, 20.0, 0.0),
           GridCellResult(2, 2, 0.1, 2, math.nan, math.nan, 0.0, diverged=True)]
    (row,) = average_by(res)
    assert row["loss"] == 0.01 and row["count"] == 2 and row["diverged"] == 1
    (row,) = average_by(res[1:])
    assert math.isnan(row["loss"]) and row["diverged"] == 1
    with pytest.raises(ValueError):
        average_by([])


# --- running a grid ----------------------------------------------------------------------

def test_small_grid_runs_in_order(small_sphere_dataset):
    spec = GridSpec((2057, 11), (5e-4,), (0, 2))
    rc = RenderConfig.around(8.0, n_samples=8)
    res = run_grid(small_sphere_dataset, spec, rc, n_iters=3, rays_per_batch=32)
    assert [(r.id, r.seed, r.n_freqs) for r in res] == [(1, 2057, 0), (2, 2057, 2), (3, 11, 0), (4, 11, 2)]
    assert all(np.isfinite(r.loss) and r.psnr_db == psnr(r.loss) for r in res)
    threaded = run_grid(small_sphere_dataset, spec, rc, n_iters=3, rays_per_batch=32, threads=2)
    assert [r.loss for r in threaded] == [r.loss for r in res]


def test_zero_iteration_cell_scores_the_initial_model(small_sphere_dataset):
    rc = RenderConfig.around(8.0, n_samples=8)
    (r,) = run_grid(small_sphere_dataset, GridSpec((5,), (1e-3,), (1,)), rc, n_iters=0)
    assert np.isfinite(r.loss) and not r.diverged


# --- report files -----------------------------------------------------------------------------

def test_number_formatting():
    assert fmt(0.00251) == "0.0025" and fmt(-0.00001) == "0.0000"
    assert fmt(math.nan) == "nan" and fmt(math.inf) == "inf" and fmt(None) == ""
    assert [fmt_lr(x) for x in (5e-3, 5e-4, 5e-5)] == ["0.005", "0.0005", "5e-05"]


def test_report_grid_csv(tmp_path):
    files = emit_report(table_results(), [], tmp_path)
    lines = files["grid.csv"].read_bytes().decode().split("\r\n")
    assert lines[0] == ",".join(GRID_HEADER)
    assert lines[1] == "1,2057,0.005,6,0.5463,2.6257,0"
    assert len([ln for ln in lines if ln]) == 37
    avg = files["grid_average.csv"].read_text().splitlines()
    assert avg[0] == ",".join(AVERAGE_HEADER) and len(avg) == 13


def test_report_is_byte_stable(tmp_path):
    recs = [BenchRecord("mesh", 0.01, 0.5, {"mesh.obj": 500_000}, {"copy": 0.01}),
            BenchRecord("implicit", 12.5, 1.44, {"implicit.tnrf": 1_442_128}, {"train": 12.0},
                        QualityReport(0.01, 20.0, 0.8))]
    a = emit_report(table_results(), recs, tmp_path / "a")
    b = emit_report(table_results(), recs, tmp_path / "b")
    for name in a:
        assert a[name].read_bytes() == b[name].read_bytes(), name


def test_empty_report_has_headers_only(tmp_path):
    files = emit_report([], [], tmp_path)
    assert files["grid.csv"].read_text() == ",".join(GRID_HEADER) + "\n"
    assert files["sizes.csv"].read_text().count("\n") == 1
    assert "# Benchmark summary" in files["summary.md"].read_text()


def test_results_and_records_json_round_trip(tmp_path):
    res = table_results() + [GridCellResult(37, 1, 0.1, 2, math.nan, math.nan, 1.5, True)]
    save_results(res, tmp_path / "r.json")
    back = load_results(tmp_path / "r.json")
    assert back[:-1] == res[:-1] and back[-1].diverged and math.isnan(back[-1].loss)
    recs = [BenchRecord("voxel", 1.0, 2.0, {"voxels.bin": 2}, {"carve": 0.9}),
            BenchRecord("implicit", 3.0, 1.4, {}, {}, QualityReport(0.02, 17.0, 0.6), None)]
    save_records(recs, tmp_path / "b.json")
    assert load_records(tmp_path / "b.json") == recs


# --- measuring representations --------------------------------------------------------------------

def test_build_and_measure_sizes_match_disk(small_sphere_dataset, sphere_mesh, tmp_path):
    cfg = BenchConfig(k=8, voxel_resolution=16, train=TrainConfig(
        seed=2057, learning_rate=5e-4, n_iters=2, rays_per_batch=32, eval_every=2,
        encoding=EncodingConfig(1)), render=RenderConfig.around(8.0, n_samples=8))
    recs = build_and_measure(small_sphere_dataset, sphere_mesh, data_path("sphere.obj"), tmp_path, cfg=cfg)
    assert [r.name for r in recs] == ["mesh", "pointcloud", "voxel", "implicit"]
    assert all(r.error is None for r in recs)
    for r in recs:
        for name, n in r.files.items():
            assert (tmp_path / name).stat().st_size == n
        assert r.build_time_s >= 0
    vox = recs[2].files
    assert vox["voxels_dense.bin"] == HEADER.size + 16 ** 3
    ply = recs[1].files["pointcloud.ply"]
    # some vertex count n must explain the file exactly: header plus 15 bytes per point
    assert any(len(ply_header(n)) + 15 * n == ply for n in range(ply // 15 + 1))
    assert recs[3].quality is not None and 0 <= recs[3].quality.ssim <= 1


def test_failing_builder_is_recorded(small_sphere_dataset, sphere_mesh, tmp_path):
    recs = build_and_measure(small_sphere_dataset, sphere_mesh, tmp_path / "missing.obj", tmp_path,
                             which=("mesh",))
    assert recs[0].error and "missing.obj" in recs[0].error and math.isnan(recs[0].size_mb)
    with pytest.raises(ValueError):
        build_and_measure(small_sphere_dataset, sphere_mesh, "", tmp_path, which=("nope",))
