"""Software rasterizer: z-buffered triangle fill with texture sampling.

Pixels are addressed by their integer centers. Each projected triangle is
scanned over its bounding box with barycentric coverage tests; covered pixels
sample the texture bilinearly at the interpolated uv position. Uncovered
pixels are filled afterwards by averaging row-wise and column-wise linear
interpolation between the nearest rendered values.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .image import GrayImage, bilinear_sample
from .shape import CameraPose, Mesh3D, project_vertices, rotated_depths

# Slight edge inclusion so pixels on shared triangle edges are never dropped.
_EDGE_EPS = 1e-9


def _fill_line(values: np.ndarray, known: np.ndarray) -> np.ndarray:
    """Linear interpolation along one axis; one-sided gaps copy the nearest value."""
    out = values.astype(np.float64).copy()
    idx = np.flatnonzero(known)
    if idx.size == 0:
        return np.full_like(out, np.nan)
    missing = np.flatnonzero(~known)
    if missing.size:
        out[missing] = np.interp(missing, idx, values[idx])
    return out


def fill_holes(image: np.ndarray, covered: np.ndarray) -> np.ndarray:
    """Fill uncovered pixels from row and column neighbours, averaged.

    Pixels whose row and column hold no rendered value stay unknown after one
    pass; the pass repeats on the partially filled raster until everything is
    assigned (any remainder, e.g. an all-empty raster, falls back to 0).
    """
    out = image.copy()
    known = covered.copy()
    for _ in range(max(image.shape)):
        if known.all():
            break
        rows = np.stack([_fill_line(out[i], known[i]) for i in range(out.shape[0])])
        cols = np.stack(
            [_fill_line(out[:, j], known[:, j]) for j in range(out.shape[1])], axis=1
        )
        have = np.stack([~np.isnan(rows), ~np.isnan(cols)])
        vals = np.stack([np.nan_to_num(rows), np.nan_to_num(cols)])
        counts = have.sum(axis=0)
        filled = vals.sum(axis=0) / np.maximum(counts, 1)
        newly = ~known & (counts > 0)
        if not newly.any():
            break
        out[newly] = filled[newly]
        known |= newly
    out[~known] = 0.0
    return out


def render_pose(
    mesh: Mesh3D,
    material_texture: GrayImage,
    cam: CameraPose,
    out_size: tuple[int, int],
    uv: np.ndarray | None = None,
) -> GrayImage:
    """Rasterize the mesh under a weak-perspective camera.

    ``uv`` holds per-vertex texture coordinates in texture pixel units (taken
    from the shape model). Nearest-to-camera geometry wins; depth is the
    rotated z coordinate.
    """
    if mesh.triangles.size == 0:
        raise DataError("mesh has no triangles to render")
    if uv is None:
        raise DataError("per-vertex uv coordinates are required")
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    if uv.shape[0] != mesh.vertices.shape[0]:
        raise DataError("uv count does not match vertex count")

    h, w = out_size
    pts = project_vertices(mesh, cam)
    depth = rotated_depths(mesh, cam)
    color = np.zeros((h, w), dtype=np.float64)
    zbuf = np.full((h, w), np.inf)
    covered = np.zeros((h, w), dtype=bool)
    tex = material_texture.data

    for tri in mesh.triangles:
        p0, p1, p2 = pts[tri[0]], pts[tri[1]], pts[tri[2]]
        d = np.array([depth[tri[0]], depth[tri[1]], depth[tri[2]]])
        t_uv = uv[tri]
        area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
        if abs(area) < 1e-12:
            continue
        xmin = max(int(np.ceil(min(p0[0], p1[0], p2[0]) - _EDGE_EPS)), 0)
        xmax = min(int(np.floor(max(p0[0], p1[0], p2[0]) + _EDGE_EPS)), w - 1)
        ymin = max(int(np.ceil(min(p0[1], p1[1], p2[1]) - _EDGE_EPS)), 0)
        ymax = min(int(np.floor(max(p0[1], p1[1], p2[1]) + _EDGE_EPS)), h - 1)
        if xmin > xmax or ymin > ymax:
            continue
        xs, ys = np.meshgrid(
            np.arange(xmin, xmax + 1), np.arange(ymin, ymax + 1)
        )
        l1 = ((p1[0] - xs) * (p2[1] - ys) - (p2[0] - xs) * (p1[1] - ys)) / area
        l2 = ((p2[0] - xs) * (p0[1] - ys) - (p0[0] - xs) * (p2[1] - ys)) / area
        l3 = 1.0 - l1 - l2
        inside = (l1 >= -_EDGE_EPS) & (l2 >= -_EDGE_EPS) & (l3 >= -_EDGE_EPS)
        if not inside.any():
            continue
        zi = l1 * d[0] + l2 * d[1] + l3 * d[2]
        sub_y = ys[inside]
        sub_x = xs[inside]
        z_new = zi[inside]
        closer = z_new < zbuf[sub_y, sub_x]
        if not closer.any():
            continue
        sub_y, sub_x, z_new = sub_y[closer], sub_x[closer], z_new[closer]
        b1, b2, b3 = l1[inside][closer], l2[inside][closer], l3[inside][closer]
        u = b1 * t_uv[0, 0] + b2 * t_uv[1, 0] + b3 * t_uv[2, 0]
        v = b1 * t_uv[0, 1] + b2 * t_uv[1, 1] + b3 * t_uv[2, 1]
        zbuf[sub_y, sub_x] = z_new
        color[sub_y, sub_x] = bilinear_sample(tex, u, v)
        covered[sub_y, sub_x] = True

    if covered.any() and not covered.all():
        color = fill_holes(color, covered)
    out = np.clip(color, 0.0, material_texture.dynamic_range)
    return GrayImage(out, dynamic_range=material_texture.dynamic_range)
