import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dtstyle.distancefield import (
    BinaryMask,
    DistanceField,
    binarize,
    edt,
    edt_squared,
    emphasize,
    mask_to_image,
    render_field,
)
from dtstyle.imageio import Image


def brute_force_sq(bits: np.ndarray) -> np.ndarray:
    """All-pairs oracle: exact squared distance to the nearest True pixel."""
    h, w = bits.shape
    fy, fx = np.nonzero(bits)
    yy, xx = np.mgrid[0:h, 0:w]
    dy = yy.reshape(h, w, 1) - fy.reshape(1, 1, -1)
    dx = xx.reshape(h, w, 1) - fx.reshape(1, 1, -1)
    return (dy * dy + dx * dx).min(axis=2).astype(np.float64)


def _gray(value_map: np.ndarray) -> Image:
    return Image(np.repeat(value_map[..., None].astype(np.uint8), 3, axis=2))


class TestBinarize:
    def test_all_black_is_all_silhouette(self):
        assert binarize(_gray(np.zeros((3, 3)))).bits.all()

    def test_all_white_is_no_silhouette(self):
        assert not binarize(_gray(np.full((3, 3), 255))).bits.any()

    def test_invert_flips(self):
        assert binarize(_gray(np.full((3, 3), 255)), invert=True).bits.all()

    def test_rec601_weighting(self):
        # pure blue: luminance 0.114 < 0.5 -> silhouette; pure green: 0.587 -> not
        blue = Image(np.array([[[0, 0, 255]]], np.uint8))
        green = Image(np.array([[[0, 255, 0]]], np.uint8))
        assert binarize(blue).bits[0, 0]
        assert not binarize(green).bits[0, 0]

    @given(arrays(np.uint8, (4, 5)), st.floats(0.05, 0.95))
    @settings(max_examples=40, deadline=None)
    def test_inversion_duality(self, gray, threshold):
        img = _gray(gray)
        normal = binarize(img, threshold, invert=False).bits
        flipped = binarize(img, threshold, invert=True).bits
        assert (normal ^ flipped).all()


class TestEdt:
    def test_all_silhouette_is_zero(self):
        mask = BinaryMask(np.ones((4, 4), bool))
        assert (edt_squared(mask) == 0).all()

    def test_center_pixel_three_by_three(self):
        bits = np.zeros((3, 3), bool)
        bits[1, 1] = True
        sq = edt_squared(BinaryMask(bits))
        np.testing.assert_array_equal(sq, [[2, 1, 2], [1, 0, 1], [2, 1, 2]])
        field = edt(BinaryMask(bits))
        assert field.values[0, 0] == math.sqrt(2.0)
        assert field.values[1, 1] == 0.0

    def test_one_row(self):
        bits = np.zeros((1, 4), bool)
        bits[0, 0] = True
        np.testing.assert_array_equal(edt_squared(BinaryMask(bits)), [[0, 1, 4, 9]])

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError):
            edt(BinaryMask(np.zeros((2, 2), bool)))

    def test_matches_brute_force_on_random_masks(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            h = int(rng.integers(1, 17))
            w = int(rng.integers(1, 17))
            bits = rng.random((h, w)) < rng.uniform(0.02, 0.6)
            if not bits.any():
                bits[rng.integers(0, h), rng.integers(0, w)] = True
            sq = edt_squared(BinaryMask(bits))
            np.testing.assert_array_equal(sq, brute_force_sq(bits))

    def test_one_lipschitz(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            bits = rng.random((12, 12)) < 0.1
            if not bits.any():
                bits[5, 5] = True
            v = edt(BinaryMask(bits)).values
            assert (np.abs(np.diff(v, axis=0)) <= 1.0 + 1e-12).all()
            assert (np.abs(np.diff(v, axis=1)) <= 1.0 + 1e-12).all()
            diag = math.sqrt(2.0) + 1e-12
            assert (np.abs(v[1:, 1:] - v[:-1, :-1]) <= diag).all()
            assert (np.abs(v[1:, :-1] - v[:-1, 1:]) <= diag).all()


class TestEmphasize:
    def _center_field(self, size=5):
        bits = np.zeros((size, size), bool)
        bits[size // 2, size // 2] = True
        return edt(BinaryMask(bits))

    def test_silhouette_stays_zero_for_any_power(self):
        field = self._center_field()
        for n in (1, 2, 5):
            for normalize in (False, True):
                out = emphasize(field, n, normalize)
                assert out.values[2, 2] == 0.0

    def test_power_one_without_normalize_is_identity(self):
        field = self._center_field()
        out = emphasize(field, 1, normalize=False)
        np.testing.assert_array_equal(out.values, field.values)
        assert out.emphasis_power == 1 and not out.normalized

    def test_cubing_a_distance_of_two(self):
        bits = np.zeros((1, 3), bool)
        bits[0, 0] = True
        out = emphasize(edt(BinaryMask(bits)), 3)
        assert out.values[0, 2] == 8.0

    def test_normalize_divides_by_diagonal(self):
        field = self._center_field(5)
        out = emphasize(field, 1, normalize=True)
        np.testing.assert_allclose(out.values, field.values / math.hypot(5, 5))
        assert out.normalized and (out.values <= 1.0).all()

    def test_monotone_in_power(self):
        field = self._center_field(9)
        norm = [emphasize(field, n, normalize=True).values for n in (1, 2, 4)]
        assert (norm[1] <= norm[0]).all() and (norm[2] <= norm[1]).all()
        raw = [emphasize(field, n, normalize=False).values for n in (1, 2, 4)]
        outside = field.values > 1.0
        assert (raw[1][outside] >= raw[0][outside]).all()
        assert (raw[2][outside] >= raw[1][outside]).all()

    def test_bad_power_rejected(self):
        field = self._center_field()
        for bad in (0, -1, 1.5, True):
            with pytest.raises(ValueError):
                emphasize(field, bad)

    def test_double_emphasis_rejected(self):
        field = emphasize(self._center_field(), 2)
        with pytest.raises(ValueError):
            emphasize(field, 2)


class TestFieldType:
    def test_negative_values_rejected(self):
        with pytest.raises(ValueError):
            DistanceField(np.array([[-1.0]]))

    def test_normalized_cap_enforced(self):
        with pytest.raises(ValueError):
            DistanceField(np.array([[2.0]]), normalized=True)


class TestRendering:
    def test_mask_image_black_on_white(self):
        bits = np.array([[True, False]])
        img = mask_to_image(BinaryMask(bits))
        assert img.pixels[0, 0].tolist() == [0, 0, 0]
        assert img.pixels[0, 1].tolist() == [255, 255, 255]

    def test_render_silhouette_white_far_dark(self):
        bits = np.zeros((1, 5), bool)
        bits[0, 0] = True
        img = render_field(edt(BinaryMask(bits)))
        assert img.pixels[0, 0, 0] == 255  # silhouette
        assert img.pixels[0, 4, 0] == 0    # farthest pixel
        row = img.pixels[0, :, 0].astype(int)
        assert (np.diff(row) < 0).all()    # monotonically darker outward
