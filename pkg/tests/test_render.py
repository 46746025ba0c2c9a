import numpy as np
import pytest

from dsfs.capture import PoseAngles
from dsfs.errors import DataError
from dsfs.image import GrayImage
from dsfs.render import fill_holes, render_pose
from dsfs.shape import CameraPose, Mesh3D


def planar_grid_mesh(size: int, z: float = 5.0):
    """Regular grid of vertices at constant depth, uv equal to position."""
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    verts = np.column_stack([xs.ravel(), ys.ravel(), np.full(size * size, z)])
    tris = []
    for i in range(size - 1):
        for j in range(size - 1):
            v00 = i * size + j
            tris.append((v00, v00 + size, v00 + 1))
            tris.append((v00 + 1, v00 + size, v00 + size + 1))
    uv = verts[:, :2].copy()
    return Mesh3D(verts, np.array(tris, dtype=np.int32)), uv


class TestRenderPose:
    def test_frontal_planar_identity(self, rng):
        size = 16
        mesh, uv = planar_grid_mesh(size)
        tex = GrayImage(rng.uniform(0.1, 0.9, (size, size)))
        cam = CameraPose(PoseAngles(0, 0, 0), f=1.0)
        out = render_pose(mesh, tex, cam, (size, size), uv=uv)
        np.testing.assert_allclose(out.data, tex.data, atol=1e-12)

    def test_z_buffer_keeps_nearest(self):
        # two stacked triangles covering the same pixels at depths 1 and 2
        verts = np.array([
            [0.0, 0.0, 1.0], [6.0, 0.0, 1.0], [0.0, 6.0, 1.0],
            [0.0, 0.0, 2.0], [6.0, 0.0, 2.0], [0.0, 6.0, 2.0],
        ])
        tris = np.array([[3, 4, 5], [0, 1, 2]], dtype=np.int32)  # far drawn first
        # near triangle samples texture row 0, far samples row 7
        uv = np.array([
            [0.0, 0.0], [7.0, 0.0], [0.0, 0.0],
            [0.0, 7.0], [7.0, 7.0], [0.0, 7.0],
        ])
        tex_data = np.tile(np.linspace(0.1, 0.8, 8)[:, None], (1, 8))
        mesh = Mesh3D(verts, tris)
        out = render_pose(mesh, GrayImage(tex_data), CameraPose(PoseAngles(0, 0, 0)), (8, 8), uv=uv)
        assert out.data[1, 1] == pytest.approx(tex_data[0, 0])

    def test_uncovered_pixels_filled(self):
        size = 9
        mesh, uv = planar_grid_mesh(size)
        tex = GrayImage(np.full((size, size), 0.5))
        cam = CameraPose(PoseAngles(0, 0, 0), f=1.0)
        out = render_pose(mesh, tex, cam, (size + 6, size + 6), uv=uv)
        np.testing.assert_allclose(out.data, 0.5, atol=1e-12)

    def test_empty_mesh_rejected(self):
        mesh = Mesh3D(np.zeros((3, 3)), np.zeros((0, 3), dtype=np.int32))
        with pytest.raises(DataError):
            render_pose(mesh, GrayImage(np.ones((4, 4))), CameraPose(PoseAngles(0, 0, 0)),
                        (4, 4), uv=np.zeros((3, 2)))

    def test_degenerate_triangles_skipped(self):
        verts = np.array([[0.0, 0, 1], [4.0, 0, 1], [2.0, 0, 1], [0.0, 0, 1],
                          [4.0, 0, 1], [2.0, 4, 1]])
        tris = np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int32)
        uv = np.zeros((6, 2))
        out = render_pose(Mesh3D(verts, tris), GrayImage(np.full((4, 4), 0.3)),
                          CameraPose(PoseAngles(0, 0, 0)), (5, 5), uv=uv)
        assert out.data.max() <= 0.3 + 1e-12


class TestFillHoles:
    def test_single_hole_amid_constant(self):
        img = np.full((5, 5), 0.5)
        covered = np.ones((5, 5), dtype=bool)
        img[2, 2] = 0.0
        covered[2, 2] = False
        out = fill_holes(img, covered)
        assert out[2, 2] == pytest.approx(0.5)

    def test_interior_hole_interpolates_linearly(self):
        img = np.tile(np.linspace(0.0, 1.0, 11), (3, 1))
        covered = np.ones_like(img, dtype=bool)
        img[1, 5] = 99.0
        covered[1, 5] = False
        out = fill_holes(img, covered)
        assert out[1, 5] == pytest.approx(0.5)

    def test_corner_without_row_or_column_support(self):
        img = np.zeros((6, 6))
        covered = np.zeros((6, 6), dtype=bool)
        img[2:4, 2:4] = 0.7
        covered[2:4, 2:4] = True
        out = fill_holes(img, covered)
        np.testing.assert_allclose(out, 0.7)

    def test_covered_values_untouched(self, rng):
        img = rng.uniform(0, 1, (8, 8))
        covered = rng.uniform(size=(8, 8)) > 0.4
        covered[0, 0] = True
        out = fill_holes(img, covered)
        np.testing.assert_array_equal(out[covered], img[covered])
