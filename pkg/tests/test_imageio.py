import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image as pil_image

from dtstyle.errors import CorruptImageError, UnreadableFileError, UnsupportedFormatError
from dtstyle.imageio import (
    VGG_PREPROCESS,
    Image,
    Preprocess,
    from_tensor,
    load_image,
    resize_bilinear,
    save_png,
    to_tensor,
)


def _png_file(tmp_path, array, mode="RGB", name="img.png"):
    path = tmp_path / name
    pil_image.fromarray(array, mode).save(path, format="PNG")
    return path


class TestLoadImage:
    def test_one_pixel_white(self, tmp_path):
        path = _png_file(tmp_path, np.full((1, 1, 3), 255, np.uint8))
        img = load_image(path)
        assert img.width == 1 and img.height == 1
        assert img.pixels.tolist() == [[[255, 255, 255]]]

    def test_reference_codec_round_trip(self, tmp_path):
        # encode black,white with Pillow, decode with load_image
        src = np.array([[[0, 0, 0], [255, 255, 255]]], np.uint8)
        img = load_image(_png_file(tmp_path, src))
        assert img.width == 2 and img.height == 1
        np.testing.assert_array_equal(img.pixels, src)

    def test_fully_transparent_composites_to_white(self, tmp_path):
        rgba = np.zeros((1, 1, 4), np.uint8)  # (0,0,0,0)
        img = load_image(_png_file(tmp_path, rgba, mode="RGBA"))
        assert img.pixels.tolist() == [[[255, 255, 255]]]

    def test_half_transparent_gray(self, tmp_path):
        rgba = np.array([[[0, 0, 0, 128]]], np.uint8)
        img = load_image(_png_file(tmp_path, rgba, mode="RGBA"))
        # 0*128/255 + 255*(1-128/255) = 127.0 -> 127
        assert img.pixels.tolist() == [[[127, 127, 127]]]

    def test_grayscale_replicates_channels(self, tmp_path):
        gray = np.array([[7, 200]], np.uint8)
        img = load_image(_png_file(tmp_path, gray, mode="L"))
        np.testing.assert_array_equal(img.pixels[..., 0], gray)
        np.testing.assert_array_equal(img.pixels[..., 1], gray)
        np.testing.assert_array_equal(img.pixels[..., 2], gray)

    def test_jpeg_accepted(self, tmp_path):
        path = tmp_path / "img.jpg"
        pil_image.fromarray(np.full((4, 4, 3), 128, np.uint8)).save(path, format="JPEG")
        assert load_image(path).width == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(UnreadableFileError):
            load_image(tmp_path / "nope.png")

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / "img.bmp"
        pil_image.fromarray(np.zeros((2, 2, 3), np.uint8)).save(path, format="BMP")
        with pytest.raises(UnsupportedFormatError):
            load_image(path)

    def test_garbage_is_unsupported(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"this is not an image at all")
        with pytest.raises(UnsupportedFormatError):
            load_image(path)

    def test_corrupt_png_stream(self, tmp_path):
        buf = io.BytesIO()
        pil_image.fromarray(np.zeros((16, 16, 3), np.uint8)).save(buf, format="PNG")
        data = buf.getvalue()
        path = tmp_path / "broken.png"
        path.write_bytes(data[: len(data) // 2])  # keep magic, drop the tail
        with pytest.raises(CorruptImageError):
            load_image(path)


class TestResize:
    def test_identity_is_pixel_identical(self):
        rng = np.random.default_rng(0)
        img = Image(rng.integers(0, 256, (5, 7, 3), dtype=np.uint8))
        out = resize_bilinear(img, 7, 5)
        np.testing.assert_array_equal(out.pixels, img.pixels)
        assert out.pixels is not img.pixels

    def test_two_to_three_midpoint(self):
        img = Image(np.array([[[0, 0, 0], [255, 255, 255]]], np.uint8))
        out = resize_bilinear(img, 3, 1)
        assert out.pixels[0, :, 0].tolist() == [0, 128, 255]

    def test_one_pixel_to_four_by_four(self):
        img = Image(np.full((1, 1, 3), 91, np.uint8))
        out = resize_bilinear(img, 4, 4)
        assert (out.pixels == 91).all()

    def test_zero_dimension_rejected(self):
        img = Image(np.zeros((2, 2, 3), np.uint8))
        with pytest.raises(ValueError):
            resize_bilinear(img, 0, 2)
        with pytest.raises(ValueError):
            resize_bilinear(img, 2, 0)

    def test_constant_images_preserved(self):
        for value in (0, 1, 128, 254, 255):
            img = Image(np.full((3, 5, 3), value, np.uint8))
            out = resize_bilinear(img, 11, 2)
            assert (out.pixels == value).all()

    def test_against_scalar_oracle(self):
        # independent per-pixel evaluation of the same sampling rule
        rng = np.random.default_rng(3)
        src = rng.integers(0, 256, (4, 5, 3), dtype=np.uint8)
        img = Image(src)
        nw, nh = 7, 3
        out = resize_bilinear(img, nw, nh)
        for y in range(nh):
            for x in range(nw):
                sy = (y + 0.5) * (4 / nh) - 0.5
                sx = (x + 0.5) * (5 / nw) - 0.5
                y0 = int(np.floor(sy))
                x0 = int(np.floor(sx))
                fy, fx = sy - y0, sx - x0
                y0c, y1c = np.clip([y0, y0 + 1], 0, 3)
                x0c, x1c = np.clip([x0, x0 + 1], 0, 4)
                for c in range(3):
                    r0 = src[y0c, x0c, c] * (1 - fx) + src[y0c, x1c, c] * fx
                    r1 = src[y1c, x0c, c] * (1 - fx) + src[y1c, x1c, c] * fx
                    expected = int(np.floor(r0 * (1 - fy) + r1 * fy + 0.5))
                    assert out.pixels[y, x, c] == expected


class TestTensors:
    def test_white_pixel_bgr_means(self):
        img = Image(np.full((1, 1, 3), 255, np.uint8))
        t = to_tensor(img, VGG_PREPROCESS)
        expected = [255.0 - 103.939, 255.0 - 116.779, 255.0 - 123.68]
        assert t[:, 0, 0].tolist() == expected

    def test_mean_pixel_maps_to_zero(self):
        prep = Preprocess((100.0, 110.0, 120.0), "BGR")
        img = Image(np.array([[[120, 110, 100]]], np.uint8))  # RGB
        t = to_tensor(img, prep)
        assert (t == 0.0).all()

    def test_channel_order_rgb(self):
        prep = Preprocess((0.0, 0.0, 0.0), "RGB")
        img = Image(np.array([[[10, 20, 30]]], np.uint8))
        t = to_tensor(img, prep)
        assert t[:, 0, 0].tolist() == [10.0, 20.0, 30.0]

    def test_from_tensor_round_trip_exact(self):
        rng = np.random.default_rng(7)
        img = Image(rng.integers(0, 256, (9, 4, 3), dtype=np.uint8))
        out = from_tensor(to_tensor(img, VGG_PREPROCESS), VGG_PREPROCESS)
        np.testing.assert_array_equal(out.pixels, img.pixels)

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_every_color(self, r, g, b):
        img = Image(np.array([[[r, g, b]]], np.uint8))
        out = from_tensor(to_tensor(img, VGG_PREPROCESS), VGG_PREPROCESS)
        assert out.pixels.tolist() == img.pixels.tolist()

    def test_zero_tensor_gives_mean_color(self):
        out = from_tensor(np.zeros((3, 2, 2)), VGG_PREPROCESS)
        # BGR means re-added then restored to RGB, rounded half away from zero
        assert out.pixels[0, 0].tolist() == [124, 117, 104]

    def test_clamping(self):
        prep = Preprocess((0.0, 0.0, 0.0), "RGB")
        t = np.zeros((3, 1, 1))
        t[0] = 300.0
        t[1] = -5.0
        out = from_tensor(t, prep)
        assert out.pixels[0, 0].tolist() == [255, 0, 0]

    def test_linear_up_to_offset(self):
        rng = np.random.default_rng(11)
        a = Image(rng.integers(0, 256, (3, 3, 3), dtype=np.uint8))
        b = Image(rng.integers(0, 256, (3, 3, 3), dtype=np.uint8))
        ta, tb = to_tensor(a), to_tensor(b)
        diff_rgb = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
        diff_bgr = diff_rgb[:, :, ::-1].transpose(2, 0, 1)
        np.testing.assert_allclose(ta - tb, diff_bgr, atol=1e-12)

    def test_from_tensor_needs_three_channels(self):
        with pytest.raises(ValueError):
            from_tensor(np.zeros((2, 2, 2)), VGG_PREPROCESS)


def test_save_png_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    img = Image(rng.integers(0, 256, (6, 8, 3), dtype=np.uint8))
    path = tmp_path / "out.png"
    save_png(img, path)
    np.testing.assert_array_equal(load_image(path).pixels, img.pixels)
