import numpy as np
import pytest

from freqaug import blending
from freqaug.blending import blend, continuous_mask, grid_mask, patch_mask
from freqaug.errors import DataError, HomologyError
from freqaug.filters import FilteredSample, FilterSpec, ButterworthParams


def make_sample(data, parent="img0"):
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    spec = FilterSpec("butterworth", (ButterworthParams(0.02, 1),))
    c = data.shape[2]
    return FilteredSample(
        data, parent, spec, (0.0,) * c, (1.0,) * c, (False,) * c, 0.0
    )


class TestContinuousMask:
    def test_zero_at_center(self):
        mask = continuous_mask(7, 9, (4, 3))
        assert mask.data[3, 4] == 0.0

    def test_centered_square_corners_all_one(self):
        mask = continuous_mask(5, 5, (2, 2))
        for i in (0, 4):
            for j in (0, 4):
                assert abs(mask.data[i, j] - 1.0) < 1e-12

    def test_hand_oracle_3x3_corner_center(self):
        mask = continuous_mask(3, 3, (0, 0))
        assert abs(mask.data[2, 2] - 1.0) < 1e-12
        assert abs(mask.data[2, 0] - 2 / np.sqrt(8)) < 1e-12
        assert abs(mask.data[0, 2] - 2 / np.sqrt(8)) < 1e-12

    def test_max_is_exactly_one(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            h, w = rng.integers(2, 30, 2)
            cx, cy = rng.integers(0, w), rng.integers(0, h)
            mask = continuous_mask(int(h), int(w), (int(cx), int(cy)))
            assert mask.data.max() == 1.0
            assert mask.data.min() >= 0.0

    def test_lipschitz_in_pixel_units(self):
        mask = continuous_mask(16, 16, (5, 9))
        d_max = np.hypot(15 - 5, 15 - 9)  # farthest corner from (5, 9)
        bound = 1.0 / d_max + 1e-12
        assert np.max(np.abs(np.diff(mask.data, axis=0))) <= bound
        assert np.max(np.abs(np.diff(mask.data, axis=1))) <= bound

    def test_center_out_of_bounds(self):
        with pytest.raises(DataError):
            continuous_mask(8, 8, (8, 0))
        with pytest.raises(DataError):
            continuous_mask(8, 8, (0, -1))


class TestPatchAndGridMasks:
    def test_grid_single_cell_is_all_ones(self):
        mask = grid_mask(6, 6, 6)
        assert np.all(mask.data == 1.0)

    def test_grid_checkerboard_count(self):
        mask = grid_mask(4, 4, 2)
        assert mask.data.sum() == 8
        assert mask.data[0, 0] == 1.0
        assert set(np.unique(mask.data)) == {0.0, 1.0}

    def test_grid_cell_larger_than_image(self):
        with pytest.raises(DataError):
            grid_mask(4, 4, 5)

    def test_patch_area_matches_collapsed_ratio(self):
        rng = np.random.default_rng(2)
        mask = patch_mask(100, 100, rng, area_ratio_range=(0.25, 0.25))
        # side rule: round(100 * sqrt(0.25)) = 50 per side
        assert mask.data.sum() == 50 * 50
        assert mask.params["patch_height"] == 50
        assert mask.params["patch_width"] == 50

    def test_patch_binary_and_in_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            mask = patch_mask(13, 17, rng)
            assert set(np.unique(mask.data)) <= {0.0, 1.0}
            assert mask.data.sum() >= 1

    def test_patch_seeded_determinism(self):
        a = patch_mask(32, 32, np.random.default_rng(7))
        b = patch_mask(32, 32, np.random.default_rng(7))
        assert np.array_equal(a.data, b.data)
        assert a.params == b.params


class TestBlend:
    def test_mask_one_returns_first(self, rng):
        x_m = make_sample(rng.random((6, 6, 3)))
        x_n = make_sample(rng.random((6, 6, 3)))
        mask = blending.BlendMask(np.ones((6, 6)), "continuous", {})
        out = blend(x_m, x_n, mask)
        assert np.array_equal(out.data, x_m.data)

    def test_mask_zero_returns_second(self, rng):
        x_m = make_sample(rng.random((6, 6, 3)))
        x_n = make_sample(rng.random((6, 6, 3)))
        mask = blending.BlendMask(np.zeros((6, 6)), "continuous", {})
        out = blend(x_m, x_n, mask)
        assert np.array_equal(out.data, x_n.data)

    def test_equal_inputs_fixed_point(self, rng):
        data = rng.random((5, 4, 3))
        mask = continuous_mask(5, 4, (1, 2))
        out = blend(make_sample(data), make_sample(data), mask)
        assert np.max(np.abs(out.data - data)) < 1e-15

    def test_complement_symmetry(self, rng):
        x_m = make_sample(rng.random((8, 8, 3)))
        x_n = make_sample(rng.random((8, 8, 3)))
        mask = continuous_mask(8, 8, (3, 5))
        flipped = blending.BlendMask(1.0 - mask.data, mask.kind, mask.params)
        a = blend(x_m, x_n, mask)
        b = blend(x_n, x_m, flipped)
        assert np.max(np.abs(a.data - b.data)) < 1e-12

    def test_output_bounded_by_inputs(self, rng):
        x_m = make_sample(rng.random((10, 10, 3)))
        x_n = make_sample(rng.random((10, 10, 3)))
        out = blend(x_m, x_n, continuous_mask(10, 10, (4, 4)))
        lo = np.minimum(x_m.data, x_n.data)
        hi = np.maximum(x_m.data, x_n.data)
        assert np.all(out.data >= lo - 1e-15)
        assert np.all(out.data <= hi + 1e-15)
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_homology_enforced(self, rng):
        x_m = make_sample(rng.random((4, 4, 1)), parent="a")
        x_n = make_sample(rng.random((4, 4, 1)), parent="b")
        with pytest.raises(HomologyError):
            blend(x_m, x_n, continuous_mask(4, 4, (0, 0)))
        unknown = make_sample(rng.random((4, 4, 1)), parent=None)
        with pytest.raises(HomologyError):
            blend(unknown, unknown, continuous_mask(4, 4, (0, 0)))

    def test_shape_mismatch(self, rng):
        x_m = make_sample(rng.random((4, 4, 1)))
        x_n = make_sample(rng.random((4, 5, 1)))
        with pytest.raises(DataError):
            blend(x_m, x_n, continuous_mask(4, 4, (0, 0)))
        with pytest.raises(DataError):
            blend(x_m, make_sample(rng.random((4, 4, 1))), continuous_mask(5, 4, (0, 0)))
