import numpy as np
import pytest

from oracles import boundary_distance_naive, telea_weighted_average_naive, upwind_update_naive
from pixprobe import ImageBuffer, Mask, inpaint_telea, march_distance
from pixprobe.errors import AllUnknownError, DimsMismatchError
from pixprobe.telea import INSIDE, OUTSIDE, _band_pixels, _outside_times


def disk_mask(side, cx, cy, r):
    yy, xx = np.mgrid[0:side, 0:side]
    return Mask((yy - cy) ** 2 + (xx - cx) ** 2 < r * r)


class TestMarchDistance:
    def test_single_pixel_hole_matches_upwind_update(self):
        bits = np.zeros((9, 9), bool)
        bits[4, 4] = True
        t = march_distance(Mask(bits))
        # all four neighbors are finalized boundary pixels at T=0
        expected = upwind_update_naive(
            {(3, 4): 0.0, (5, 4): 0.0, (4, 3): 0.0, (4, 5): 0.0}, 4, 4
        )
        assert t[4, 4] == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(np.sqrt(0.5))

    def test_axis_aligned_case_is_exact(self):
        bits = np.ones((8, 8), bool)
        bits[:, 0] = False
        t = march_distance(Mask(bits))
        expected = np.tile(np.arange(8, dtype=float), (8, 1))
        assert np.abs(t - expected).max() < 0.5
        assert np.array_equal(t, expected)  # one-sided chain is exact here

    def test_disk_close_to_euclidean(self):
        mask = disk_mask(32, 16, 16, 10)
        t = march_distance(mask)
        ref = boundary_distance_naive(mask.bits)
        err = np.abs(t - ref)[mask.bits]
        assert err.max() < 0.9

    def test_all_unknown_rejected(self):
        with pytest.raises(AllUnknownError):
            march_distance(Mask(np.ones((4, 4), bool)))

    def test_known_pixels_are_zero(self):
        mask = disk_mask(16, 8, 8, 4)
        t = march_distance(mask)
        assert (t[~mask.bits] == 0).all()

    def test_finalization_order_is_nondecreasing(self):
        order = []
        march_distance(disk_mask(24, 12, 12, 8), _order_out=order)
        popped = order[0]
        assert (np.diff(popped) >= 0).all()


class TestInpaint:
    def test_empty_mask_identity(self):
        rng = np.random.default_rng(1)
        img = ImageBuffer(rng.random((12, 12, 3), dtype=np.float32))
        out = inpaint_telea(img, Mask(np.zeros((12, 12), bool)))
        assert np.array_equal(out.pixels, img.pixels)

    def test_constant_image_fill(self):
        img = ImageBuffer(np.full((20, 20, 3), 0.5, np.float32))
        out = inpaint_telea(img, disk_mask(20, 10, 10, 5))
        assert np.abs(out.pixels - 0.5).max() <= 1e-6

    def test_gradient_single_hole(self):
        xs = np.arange(16, dtype=np.float32) / 15.0
        img = ImageBuffer(np.tile(xs[None, :, None], (16, 1, 3)))
        bits = np.zeros((16, 16), bool)
        bits[7, 7] = True
        out = inpaint_telea(img, Mask(bits), radius=3)
        assert abs(float(out.pixels[7, 7, 0]) - 7 / 15) <= 1 / 255

    def test_single_hole_matches_weighted_average_oracle(self):
        rng = np.random.default_rng(3)
        pixels = rng.random((16, 16, 3), dtype=np.float32)
        bits = np.zeros((16, 16), bool)
        bits[7, 7] = True
        radius = 3
        out = inpaint_telea(ImageBuffer(pixels), Mask(bits), radius=radius)

        # A hole pixel is painted the moment it enters the band: right after
        # the first boundary pixel (smallest row-major index, here the top
        # neighbor) is finalized. Rebuild exactly that state.
        band = _band_pixels(bits)
        t_map = _outside_times(bits, band, radius)
        t_map[bits] = 1e6
        t_map[band] = 0.0
        flags = np.full((16, 16), OUTSIDE, np.int8)
        flags[bits] = INSIDE
        t_map[7, 7] = upwind_update_naive({(7, 6): 0.0}, 7, 7)  # one-sided: 1.0
        expected = telea_weighted_average_naive(pixels, t_map, flags, 7, 7, radius, INSIDE)
        assert np.abs(out.pixels[7, 7].astype(np.float64) - expected).max() < 1e-6

    def test_locality(self):
        rng = np.random.default_rng(2)
        img = ImageBuffer(rng.random((24, 24, 3), dtype=np.float32))
        mask = disk_mask(24, 10, 12, 5)
        out = inpaint_telea(img, mask)
        assert np.array_equal(out.pixels[~mask.bits], img.pixels[~mask.bits])
        assert not np.array_equal(out.pixels[mask.bits], img.pixels[mask.bits])

    def test_range_preservation(self):
        rng = np.random.default_rng(4)
        img = ImageBuffer((rng.random((24, 24, 3), dtype=np.float32) * 0.5 + 0.25))
        mask = disk_mask(24, 12, 12, 5)
        radius = 5
        out = inpaint_telea(img, mask, radius)
        near = np.zeros_like(mask.bits)
        ys, xs = np.nonzero(mask.bits)
        for y, x in zip(ys, xs):
            near[max(0, y - radius) : y + radius + 1, max(0, x - radius) : x + radius + 1] = True
        known_near = near & ~mask.bits
        lo = img.pixels[known_near].min()
        hi = img.pixels[known_near].max()
        filled = out.pixels[mask.bits]
        assert filled.min() >= lo - 1e-6
        assert filled.max() <= hi + 1e-6

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        img = ImageBuffer(rng.random((32, 32, 3), dtype=np.float32))
        mask = disk_mask(32, 16, 14, 7)
        a = inpaint_telea(img, mask)
        b = inpaint_telea(img, mask)
        assert np.array_equal(a.pixels, b.pixels)

    def test_grayscale_supported(self):
        img = ImageBuffer(np.full((10, 10, 1), 0.25, np.float32))
        out = inpaint_telea(img, disk_mask(10, 5, 5, 2))
        assert np.abs(out.pixels - 0.25).max() <= 1e-6

    def test_dims_mismatch(self):
        img = ImageBuffer(np.zeros((4, 4, 3), np.float32))
        with pytest.raises(DimsMismatchError):
            inpaint_telea(img, Mask(np.zeros((5, 5), bool)))

    def test_all_unknown(self):
        img = ImageBuffer(np.zeros((4, 4, 3), np.float32))
        with pytest.raises(AllUnknownError):
            inpaint_telea(img, Mask(np.ones((4, 4), bool)))

    def test_output_in_unit_interval(self):
        rng = np.random.default_rng(6)
        img = ImageBuffer(rng.random((20, 20, 3), dtype=np.float32))
        out = inpaint_telea(img, disk_mask(20, 10, 10, 6))
        out.validate()
