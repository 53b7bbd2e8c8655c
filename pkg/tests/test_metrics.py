import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from skimage.metrics import structural_similarity

from nerfbench.metrics import QualityReport, evaluate, gaussian_window, mse, psnr, ssim
from reference_tables import GRID_TABLE


def test_mse_simple_cases():
    x = np.random.default_rng(0).random((8, 8, 3))
    assert mse(x, x) == 0.0
    assert mse(np.zeros((4, 4, 3)), np.ones((4, 4, 3))) == 1.0
    with pytest.raises(ValueError):
        mse(np.zeros((2, 2)), np.zeros((2, 3)))


@pytest.mark.parametrize("loss, db", [(0.0025, 26.0206), (0.5463, 2.6257), (1.0, 0.0)])
def test_psnr_reference_values(loss, db):
    assert psnr(loss) == pytest.approx(db, abs=5e-5)


def test_psnr_edge_cases():
    assert psnr(0.0) == math.inf
    with pytest.raises(ValueError):
        psnr(-1e-3)


def test_psnr_column_of_grid_table():
    for row in GRID_TABLE:
        assert abs(psnr(row.loss) - row.psnr_db) < 0.005, row


def test_ssim_identical_is_one():
    x = np.random.default_rng(1).random((20, 24, 3))
    assert ssim(x, x) == 1.0


def test_ssim_constant_images_closed_form():
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    expect = (2 * 0.2 * 0.8 + c1) * c2 / ((0.04 + 0.64 + c1) * c2)
    assert round(expect, 5) == 0.47067 and abs(expect - 0.47066) < 1e-5
    a, b = np.full((16, 16), 0.2), np.full((16, 16), 0.8)
    assert ssim(a, b) == pytest.approx(expect, abs=1e-12)
    # gray color images reduce to the same luma
    assert ssim(np.full((16, 16, 3), 0.2), np.full((16, 16, 3), 0.8)) == pytest.approx(expect, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(11, 40), st.integers(11, 40), st.integers(0, 2 ** 32 - 1))
def test_ssim_matches_scikit_image(h, w, seed):
    rng = np.random.default_rng(seed)
    a = rng.random((h, w))
    b = np.clip(a + rng.normal(0, 0.2, (h, w)), 0, 1)
    ref = structural_similarity(a, b, data_range=1.0, gaussian_weights=True, sigma=1.5,
                                use_sample_covariance=False)
    assert ssim(a, b) == pytest.approx(ref, abs=1e-10)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_per_channel_option():
    rng = np.random.default_rng(2)
    a, b = rng.random((16, 16, 3)), rng.random((16, 16, 3))
    per = np.mean([ssim(a[..., c], b[..., c]) for c in range(3)])
    assert ssim(a, b, per_channel=True) == pytest.approx(per)


def test_ssim_rejects_small_images():
    with pytest.raises(ValueError, match="window"):
        ssim(np.zeros((10, 10)), np.zeros((10, 10)))


def test_gaussian_window_normalized():
    w = gaussian_window()
    assert w.shape == (11, 11) and w.sum() == pytest.approx(1.0)
    assert np.array_equal(w, w.T) and w[5, 5] == w.max()


def test_evaluate_reports():
    x = np.random.default_rng(3).random((12, 12, 3))
    assert evaluate(x, x) == QualityReport(0.0, math.inf, 1.0)
    r = evaluate(np.zeros((12, 12, 3)), np.ones((12, 12, 3)))
    assert (r.mse, r.psnr_db) == (1.0, 0.0)
    r = evaluate(x, np.clip(x + 0.05, 0, 1))
    assert r.psnr_db == pytest.approx(-10 * math.log10(r.mse))
    assert set(r.to_dict()) == {"mse", "psnr_db", "ssim"}
