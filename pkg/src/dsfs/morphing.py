"""Landmark-driven morphing: triangulation, piecewise-affine warps, and
shading transfer onto rendered faces."""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import DataError
from .image import GrayImage, bilinear_sample, resample

_EDGE_EPS = 1e-9


def _as_points(landmarks) -> np.ndarray:
    pts = np.asarray(landmarks, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise DataError("empty landmark list")
    return pts


def delaunay(points) -> list[tuple[int, int, int]]:
    """Delaunay triangulation of 2-D points (empty-circumcircle property).

    Raises on fewer than three points or a fully collinear configuration.
    """
    pts = _as_points(points)
    if pts.shape[0] < 3:
        raise DataError(f"triangulation needs >= 3 points, got {pts.shape[0]}")
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise DataError(f"degenerate point set (collinear?): {exc}") from exc
    if tri.simplices.size == 0:
        raise DataError("triangulation produced no triangles")
    return sorted(tuple(int(v) for v in sorted(simplex)) for simplex in tri.simplices)


def default_landmarks(height: int, width: int) -> np.ndarray:
    """Fallback 5-point layout (eyes, nose tip, mouth corners) for a raster."""
    w, h = width - 1, height - 1
    return np.array(
        [
            [0.30 * w, 0.35 * h],
            [0.70 * w, 0.35 * h],
            [0.50 * w, 0.55 * h],
            [0.35 * w, 0.75 * h],
            [0.65 * w, 0.75 * h],
        ]
    )


def piecewise_affine_warp(
    src: GrayImage,
    src_lms,
    dst_lms,
    triangles: list[tuple[int, int, int]] | None = None,
    out_size: tuple[int, int] | None = None,
) -> GrayImage:
    """Warp ``src`` so its landmarks move onto the destination landmarks.

    Destination pixels inside a triangle are mapped barycentrically back to
    the source triangle and sampled bilinearly; pixels outside every triangle
    keep the source value at their own position.
    """
    sp = _as_points(src_lms)
    dp = _as_points(dst_lms)
    if sp.shape != dp.shape:
        raise DataError(f"landmark counts differ: {sp.shape[0]} vs {dp.shape[0]}")
    if triangles is None:
        triangles = delaunay(dp)
    if out_size is None:
        out_size = src.shape
    h, w = out_size
    out = resample(src, h, w).data.copy()

    for tri in triangles:
        i0, i1, i2 = tri
        if max(tri) >= sp.shape[0]:
            raise DataError(f"triangle {tri} indexes beyond the landmark list")
        d0, d1, d2 = dp[i0], dp[i1], dp[i2]
        area = (d1[0] - d0[0]) * (d2[1] - d0[1]) - (d2[0] - d0[0]) * (d1[1] - d0[1])
        if abs(area) < 1e-12:
            continue
        xmin = max(int(np.ceil(min(d0[0], d1[0], d2[0]) - _EDGE_EPS)), 0)
        xmax = min(int(np.floor(max(d0[0], d1[0], d2[0]) + _EDGE_EPS)), w - 1)
        ymin = max(int(np.ceil(min(d0[1], d1[1], d2[1]) - _EDGE_EPS)), 0)
        ymax = min(int(np.floor(max(d0[1], d1[1], d2[1]) + _EDGE_EPS)), h - 1)
        if xmin > xmax or ymin > ymax:
            continue
        xs, ys = np.meshgrid(np.arange(xmin, xmax + 1), np.arange(ymin, ymax + 1))
        l1 = ((d1[0] - xs) * (d2[1] - ys) - (d2[0] - xs) * (d1[1] - ys)) / area
        l2 = ((d2[0] - xs) * (d0[1] - ys) - (d0[0] - xs) * (d2[1] - ys)) / area
        l3 = 1.0 - l1 - l2
        inside = (l1 >= -_EDGE_EPS) & (l2 >= -_EDGE_EPS) & (l3 >= -_EDGE_EPS)
        if not inside.any():
            continue
        s0, s1, s2 = sp[i0], sp[i1], sp[i2]
        sx = l1[inside] * s0[0] + l2[inside] * s1[0] + l3[inside] * s2[0]
        sy = l1[inside] * s0[1] + l2[inside] * s1[1] + l3[inside] * s2[1]
        out[ys[inside], xs[inside]] = bilinear_sample(src.data, sx, sy)

    return GrayImage(np.clip(out, 0.0, src.dynamic_range), dynamic_range=src.dynamic_range)


def transfer_illumination(
    lighting_layer: GrayImage,
    lighting_lms,
    rendered: GrayImage,
    rendered_lms,
    dissolve: float = 1.0,
) -> GrayImage:
    """Project a shading layer onto a rendered face and compose multiplicatively.

    The shading layer is warped from its own landmark frame onto the rendered
    frame, then the rendered material image is scaled pointwise by the warped
    shading. ``dissolve`` blends the warped shading toward neutral (1.0):
    1 replaces the shading outright, 0 leaves the render untouched.
    """
    if lighting_lms is None or rendered_lms is None:
        raise DataError("both landmark sets are required for illumination transfer")
    if not (0.0 <= dissolve <= 1.0):
        raise DataError(f"dissolve must lie in [0, 1], got {dissolve}")
    warped = piecewise_affine_warp(
        lighting_layer, lighting_lms, rendered_lms, out_size=rendered.shape
    )
    shading = dissolve * warped.data + (1.0 - dissolve)
    composed = np.clip(rendered.data * shading, 0.0, rendered.dynamic_range)
    return GrayImage(composed, dynamic_range=rendered.dynamic_range)
