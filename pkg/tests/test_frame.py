import numpy as np
import pytest
from hypothesis import given, strategies as st

from fastme.frame import (
    LumaPlane,
    MotionVector,
    SearchParams,
    candidate_window,
    center_outward_order,
    partition_into_blocks,
    window_bounds,
)


def plane(width, height, value=0):
    return LumaPlane(np.full((height, width), value, dtype=np.uint8))


class TestLumaPlane:
    def test_dimensions(self):
        p = plane(352, 288)
        assert (p.width, p.height) == (352, 288)

    def test_rejects_wrong_dtype(self):
        with pytest.raises(ValueError, match="uint8"):
            LumaPlane(np.zeros((4, 4), dtype=np.float32))

    def test_from_bytes_roundtrip(self):
        rng = np.random.default_rng(0)
        data = rng.integers(0, 256, (6, 8), dtype=np.uint8)
        p = LumaPlane.from_bytes(data.tobytes(), 8, 6)
        assert np.array_equal(p.data, data)

    def test_immutable(self):
        p = plane(8, 8)
        with pytest.raises(ValueError):
            p.data[0, 0] = 1


class TestPartition:
    def test_cif_16(self):
        grid = partition_into_blocks(plane(352, 288), 16)
        assert (grid.cols, grid.rows, grid.num_blocks) == (22, 18, 396)

    def test_single_block(self):
        grid = partition_into_blocks(plane(16, 16), 16)
        assert grid.num_blocks == 1
        assert grid.origin_of(0) == (0, 0)

    def test_720p(self):
        grid = partition_into_blocks(plane(1280, 720), 16)
        assert (grid.cols, grid.rows, grid.num_blocks) == (80, 45, 3600)

    def test_remainder_excluded(self):
        grid = partition_into_blocks(plane(100, 50), 16)
        assert (grid.cols, grid.rows) == (6, 3)

    def test_too_small(self):
        with pytest.raises(ValueError, match="smaller"):
            partition_into_blocks(plane(15, 40), 16)

    def test_bad_block_size(self):
        with pytest.raises(ValueError):
            partition_into_blocks(plane(64, 64), 12)

    @given(st.integers(1, 60), st.integers(1, 60), st.sampled_from([8, 16, 32]))
    def test_index_origin_roundtrip(self, cols, rows, b):
        grid = partition_into_blocks(plane(cols * b, rows * b), b)
        for k in range(grid.num_blocks):
            x, y = grid.origin_of(k)
            assert grid.index_of(x, y) == k


class TestCandidateWindow:
    def test_interior_count(self):
        w = candidate_window((100, 100), SearchParams(16, 7), plane(352, 288))
        assert len(w) == 225

    def test_corner_clamped(self):
        w = candidate_window((0, 0), SearchParams(16, 7), plane(352, 288))
        assert len(w) == 64
        assert all(d.dx >= 0 and d.dy >= 0 for d in w)

    def test_p15_interior(self):
        w = candidate_window((160, 128), SearchParams(16, 15), plane(352, 288))
        assert len(w) == 961

    def test_raster_order(self):
        w = candidate_window((32, 32), SearchParams(16, 2), plane(96, 96))
        assert w == sorted(w, key=lambda d: (d.dy, d.dx))

    def test_zero_always_present(self):
        for origin in [(0, 0), (336, 272), (160, 0)]:
            w = candidate_window(origin, SearchParams(16, 7), plane(352, 288))
            assert MotionVector(0, 0) in w

    def test_interior_symmetry(self):
        w = candidate_window((100, 100), SearchParams(16, 7), plane(352, 288))
        s = set(w)
        assert all(MotionVector(-d.dx, -d.dy) in s for d in w)


class TestCenterOutward:
    def test_starts_at_zero(self):
        order = center_outward_order((-7, 7, -7, 7))
        assert order[0] == (0, 0)

    def test_l1_monotone(self):
        order = center_outward_order((-7, 7, -7, 7))
        l1 = [abs(d.dx) + abs(d.dy) for d in order]
        assert l1 == sorted(l1)

    def test_same_set_as_window(self):
        bounds = (-3, 7, -7, 2)
        order = center_outward_order(bounds)
        raster = {
            (dx, dy)
            for dy in range(bounds[2], bounds[3] + 1)
            for dx in range(bounds[0], bounds[1] + 1)
        }
        assert set(order) == raster


class TestWindowBounds:
    def test_interior(self):
        assert window_bounds((100, 100), 16, 7, 352, 288) == (-7, 7, -7, 7)

    def test_bottom_right(self):
        dx_lo, dx_hi, dy_lo, dy_hi = window_bounds((336, 272), 16, 7, 352, 288)
        assert (dx_hi, dy_hi) == (0, 0)
        assert (dx_lo, dy_lo) == (-7, -7)


class TestSearchParams:
    def test_validates(self):
        with pytest.raises(ValueError):
            SearchParams(block_size=10)
        with pytest.raises(ValueError):
            SearchParams(search_range=0)
