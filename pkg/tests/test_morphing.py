import numpy as np
import pytest

from dsfs.errors import DataError
from dsfs.image import GrayImage
from dsfs.morphing import (
    default_landmarks,
    delaunay,
    piecewise_affine_warp,
    transfer_illumination,
)

from oracles import circumcircle_violations


class TestDelaunay:
    def test_three_points_one_triangle(self):
        tris = delaunay([(0, 0), (4, 0), (0, 4)])
        assert tris == [(0, 1, 2)]

    def test_four_convex_points_share_delaunay_diagonal(self):
        pts = np.array([[0, 0], [2, 0], [2.5, 1.5], [0.3, 1.2]], dtype=float)
        tris = delaunay(pts)
        assert len(tris) == 2
        assert circumcircle_violations(pts, tris) == 0
        # brute force: the other diagonal must violate the circle property
        other = [(0, 1, 2), (0, 2, 3)]
        alt = [(0, 1, 3), (1, 2, 3)]
        chosen = tris
        assert chosen in (sorted(other), sorted(alt))
        not_chosen = alt if chosen == sorted(other) else other
        assert circumcircle_violations(pts, not_chosen) > 0

    def test_square_plus_center(self):
        pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
        tris = delaunay(pts)
        assert len(tris) == 4
        assert all(4 in t for t in tris)
        assert circumcircle_violations(np.asarray(pts, float), tris) == 0

    def test_empty_circumcircle_on_random_sets(self, rng):
        for n in (5, 8, 12):
            pts = rng.uniform(0, 10, (n, 2))
            tris = delaunay(pts)
            assert circumcircle_violations(pts, tris) == 0

    def test_too_few_points_rejected(self):
        with pytest.raises(DataError):
            delaunay([(0, 0), (1, 1)])

    def test_collinear_rejected(self):
        with pytest.raises(DataError):
            delaunay([(0, 0), (1, 1), (2, 2), (3, 3)])


def grid_landmarks(size, margin=2, n=4):
    axis = np.linspace(margin, size - 1 - margin, n)
    return np.array([(x, y) for y in axis for x in axis])


class TestPiecewiseAffineWarp:
    def test_identity_warp_is_exact_inside_mesh(self, rng):
        size = 24
        img = GrayImage(rng.uniform(0, 1, (size, size)))
        lms = grid_landmarks(size)
        out = piecewise_affine_warp(img, lms, lms)
        np.testing.assert_array_equal(out.data, img.data)

    def test_pure_translation_shifts_interior(self, rng):
        size = 32
        img = GrayImage(rng.uniform(0, 1, (size, size)))
        src = grid_landmarks(size, margin=6)
        dst = src + np.array([5.0, 0.0])
        out = piecewise_affine_warp(img, src, dst)
        # pixels strictly inside the destination hull sample 5 px to the left
        ys = np.arange(14, 20)
        xs = np.arange(16, 24)
        for y in ys:
            for x in xs:
                assert out.data[y, x] == pytest.approx(img.data[y, x - 5], abs=1e-12)

    def test_known_affine_map_matches_direct_oracle(self, rng):
        # landmarks related by one global affine map: the piecewise warp must
        # agree with sampling through that map directly at every covered pixel
        size = 40
        img = GrayImage(rng.uniform(0.2, 0.8, (size, size)))
        src = grid_landmarks(size, margin=8)
        A = np.array([[1.1, 0.05], [-0.04, 0.95]])
        b = np.array([1.5, 2.0])
        dst = src @ A.T + b
        assert dst.min() >= 0 and dst.max() <= size - 1
        triangles = delaunay(dst)
        out = piecewise_affine_warp(img, src, dst, triangles=triangles)

        from scipy.spatial import Delaunay as SciDelaunay

        from dsfs.image import bilinear_sample

        hull = SciDelaunay(dst)
        ys, xs = np.mgrid[0:size, 0:size]
        pixels = np.column_stack([xs.ravel(), ys.ravel()]).astype(float)
        inside = hull.find_simplex(pixels) >= 0
        inv = np.linalg.inv(A)
        back = (pixels - b) @ inv.T
        expected = bilinear_sample(img.data, back[:, 0], back[:, 1])
        got = out.data.ravel()
        np.testing.assert_allclose(got[inside], expected[inside], atol=1e-9)

    def test_exterior_pixels_pass_through(self, rng):
        size = 24
        img = GrayImage(rng.uniform(0, 1, (size, size)))
        src = grid_landmarks(size, margin=8)
        dst = src + np.array([2.0, 1.0])
        out = piecewise_affine_warp(img, src, dst)
        assert out.data[0, 0] == img.data[0, 0]
        assert out.data[-1, -1] == img.data[-1, -1]

    def test_landmark_count_mismatch_rejected(self):
        img = GrayImage(np.zeros((8, 8)))
        with pytest.raises(DataError):
            piecewise_affine_warp(img, [(0, 0), (1, 1), (2, 0)], [(0, 0), (1, 1)])

    def test_degenerate_destination_triangle_skipped(self, rng):
        img = GrayImage(rng.uniform(0, 1, (10, 10)))
        src = np.array([(1.0, 1.0), (8.0, 1.0), (4.0, 8.0)])
        dst = np.array([(1.0, 2.0), (4.0, 2.0), (7.0, 2.0)])  # collinear
        out = piecewise_affine_warp(img, src, dst, triangles=[(0, 1, 2)])
        np.testing.assert_array_equal(out.data, img.data)


class TestTransferIllumination:
    def test_neutral_shading_returns_render(self, rng):
        size = 20
        rendered = GrayImage(rng.uniform(0.1, 0.9, (size, size)))
        lms = grid_landmarks(size)
        ones = GrayImage(np.ones((size, size)), dynamic_range=1.0)
        out = transfer_illumination(ones, lms, rendered, lms)
        np.testing.assert_allclose(out.data, rendered.data, atol=1e-12)

    def test_uniform_half_shading_scales(self, rng):
        size = 20
        rendered = GrayImage(rng.uniform(0.1, 0.9, (size, size)))
        lms = grid_landmarks(size)
        half = GrayImage(np.full((size, size), 0.5))
        out = transfer_illumination(half, lms, rendered, lms)
        np.testing.assert_allclose(out.data, 0.5 * rendered.data, atol=1e-12)

    def test_left_right_shading_split(self):
        size = 16
        rendered = GrayImage(np.full((size, size), 0.8))
        shading = np.ones((size, size))
        shading[:, size // 2 :] = 0.25
        lms = grid_landmarks(size, margin=0)
        out = transfer_illumination(GrayImage(shading), lms, rendered, lms)
        np.testing.assert_allclose(out.data[:, : size // 2 - 1], 0.8, atol=1e-12)
        np.testing.assert_allclose(out.data[:, size // 2 + 1 :], 0.2, atol=1e-12)

    def test_dissolve_zero_keeps_render(self, rng):
        size = 16
        rendered = GrayImage(rng.uniform(0.2, 0.8, (size, size)))
        lms = grid_landmarks(size)
        dark = GrayImage(np.full((size, size), 0.1))
        out = transfer_illumination(dark, lms, rendered, lms, dissolve=0.0)
        np.testing.assert_allclose(out.data, rendered.data, atol=1e-12)

    def test_missing_landmarks_rejected(self):
        img = GrayImage(np.ones((8, 8)))
        with pytest.raises(DataError):
            transfer_illumination(img, None, img, [(0, 0)])


class TestDefaultLandmarks:
    def test_five_points_inside_bounds(self):
        lms = default_landmarks(48, 32)
        assert lms.shape == (5, 2)
        assert lms[:, 0].min() >= 0 and lms[:, 0].max() <= 31
        assert lms[:, 1].min() >= 0 and lms[:, 1].max() <= 47
