"""Linear 3-D shape model, rigid pose, and weak-perspective projection.

Coordinate conventions: x points right, y points down (image rows), z points
away from the camera, which looks along +z; smaller z is nearer. Rotations
compose as ``R = Rz(roll) @ Ry(yaw) @ Rx(pitch)``, right-handed, with angles
given in degrees.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .capture import PoseAngles
from .errors import DataError

_MESH_MAGIC = b"DSFSMESH1\n"


@dataclass(frozen=True)
class ShapeModel:
    """Mean shape plus linear basis, with triangles and texture coordinates.

    ``mean_shape`` and each basis vector store interleaved vertex coordinates
    ``[x1, y1, z1, x2, ...]``; ``uv`` holds per-vertex texture positions in
    texture pixel units.
    """

    mean_shape: np.ndarray
    basis: np.ndarray
    triangles: np.ndarray
    uv: np.ndarray
    landmark_vertices: np.ndarray | None = None

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean_shape, dtype=np.float64).ravel()
        if mean.size == 0 or mean.size % 3:
            raise DataError(f"mean shape length {mean.size} is not a multiple of 3")
        basis = np.asarray(self.basis, dtype=np.float64).reshape(-1, mean.size) \
            if np.asarray(self.basis).size else np.zeros((0, mean.size))
        tris = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        uv = np.asarray(self.uv, dtype=np.float64).reshape(-1, 2)
        n = mean.size // 3
        if uv.shape[0] != n:
            raise DataError(f"uv count {uv.shape[0]} does not match {n} vertices")
        if tris.size and (tris.min() < 0 or tris.max() >= n):
            raise DataError("triangle indices out of range")
        lms = self.landmark_vertices
        if lms is not None:
            lms = np.asarray(lms, dtype=np.int32).ravel()
            if lms.size and (lms.min() < 0 or lms.max() >= n):
                raise DataError("landmark vertex indices out of range")
        object.__setattr__(self, "mean_shape", mean)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "uv", uv)
        object.__setattr__(self, "landmark_vertices", lms)

    @property
    def vertex_count(self) -> int:
        return self.mean_shape.size // 3

    @property
    def basis_count(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class Mesh3D:
    """Concrete vertex positions produced from a shape model."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)


@dataclass(frozen=True)
class CameraPose:
    """Weak-perspective camera: rotation angles, scale, and 2-D translation."""

    pose: PoseAngles
    f: float = 1.0
    t2d: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.f <= 0:
            raise DataError(f"scale factor must be positive, got {self.f}")


def synthesize_shape(model: ShapeModel, alpha: np.ndarray | None = None) -> Mesh3D:
    """Mean shape plus the weighted basis vectors, reshaped to vertex triples."""
    if alpha is None:
        alpha = np.zeros(model.basis_count)
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    if alpha.size != model.basis_count:
        raise DataError(
            f"got {alpha.size} coefficients for a basis of {model.basis_count}"
        )
    flat = model.mean_shape + (alpha @ model.basis if alpha.size else 0.0)
    return Mesh3D(flat.reshape(-1, 3), model.triangles)


def rotation_matrix(p: PoseAngles) -> np.ndarray:
    """Orthonormal rotation ``Rz(roll) @ Ry(yaw) @ Rx(pitch)`` (det +1)."""
    pitch, yaw, roll = np.radians([p.pitch, p.yaw, p.roll])
    cx, sx = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    cz, sz = np.cos(roll), np.sin(roll)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def project_vertices(mesh: Mesh3D, cam: CameraPose) -> np.ndarray:
    """Weak-perspective projection ``f * [R v]_{xy} + t2d`` per vertex."""
    rotated = mesh.vertices @ rotation_matrix(cam.pose).T
    return cam.f * rotated[:, :2] + np.asarray(cam.t2d, dtype=np.float64)


def rotated_depths(mesh: Mesh3D, cam: CameraPose) -> np.ndarray:
    """Per-vertex depth after rotation (camera looks along +z)."""
    return mesh.vertices @ rotation_matrix(cam.pose).T[:, 2]


def frame_camera(
    mesh: Mesh3D, pose: PoseAngles, out_size: tuple[int, int], fill: float = 0.9
) -> CameraPose:
    """Scale and center the mean mesh footprint inside an output raster.

    Framing uses the unrotated x/y extent so that every pose of the same mesh
    is rendered at a consistent scale.
    """
    h, w = out_size
    spans = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    extent = float(max(spans[0], spans[1]))
    if extent <= 0:
        raise DataError("mesh has no x/y extent to frame")
    f = fill * (min(h, w) - 1) / extent
    center = 0.5 * (mesh.vertices.max(axis=0) + mesh.vertices.min(axis=0))
    cx, cy = f * center[0], f * center[1]
    return CameraPose(pose=pose, f=f, t2d=((w - 1) / 2 - cx, (h - 1) / 2 - cy))


def ellipsoid_head(
    stacks: int = 40,
    slices: int = 50,
    semi_axes: tuple[float, float, float] = (0.85, 1.0, 0.7),
    texture_size: tuple[int, int] = (64, 64),
) -> ShapeModel:
    """Procedural test mesh: an ellipsoid with frontal-projection uv mapping.

    The uv map projects each vertex's (x, y) onto the texture pixel grid, so a
    frontal render of a texture reproduces that texture over the visible face.
    Five landmark vertices approximate eye, nose, and mouth-corner positions.
    """
    a, b, c = semi_axes
    th, tw = texture_size
    phis = np.linspace(0.0, np.pi, stacks)
    thetas = np.linspace(-np.pi, np.pi, slices, endpoint=False)
    verts = []
    for phi in phis:
        for theta in thetas:
            x = a * np.sin(phi) * np.sin(theta)
            y = -b * np.cos(phi)
            z = -c * np.sin(phi) * np.cos(theta)
            verts.append((x, y, z))
    vertices = np.array(verts)

    tris = []
    for i in range(stacks - 1):
        for j in range(slices):
            jn = (j + 1) % slices
            v00 = i * slices + j
            v01 = i * slices + jn
            v10 = (i + 1) * slices + j
            v11 = (i + 1) * slices + jn
            tris.append((v00, v10, v01))
            tris.append((v01, v10, v11))
    triangles = np.array(tris, dtype=np.int32)

    uv = np.empty((vertices.shape[0], 2))
    uv[:, 0] = (vertices[:, 0] / a + 1.0) * 0.5 * (tw - 1)
    uv[:, 1] = (vertices[:, 1] / b + 1.0) * 0.5 * (th - 1)

    # nearest front-facing vertices to canonical 5-point landmark positions
    targets = np.array(
        [[-0.38, -0.28], [0.38, -0.28], [0.0, 0.12], [-0.30, 0.52], [0.30, 0.52]]
    ) * [[a, b]]
    front = vertices[:, 2] < 0
    front_idx = np.flatnonzero(front)
    lms = []
    for tx, ty in targets:
        d = (vertices[front_idx, 0] - tx) ** 2 + (vertices[front_idx, 1] - ty) ** 2
        lms.append(int(front_idx[np.argmin(d)]))
    return ShapeModel(
        mean_shape=vertices.ravel(),
        basis=np.zeros((0, vertices.size)),
        triangles=triangles,
        uv=uv,
        landmark_vertices=np.array(lms, dtype=np.int32),
    )


def save_shape_model(model: ShapeModel, path: str | Path) -> None:
    """Serialize to the binary mesh container (see module docs)."""
    lms = model.landmark_vertices
    lms = np.zeros(0, dtype=np.int32) if lms is None else lms
    with open(path, "wb") as fh:
        fh.write(_MESH_MAGIC)
        fh.write(
            struct.pack(
                "<qqqq",
                model.vertex_count,
                model.basis_count,
                model.triangles.shape[0],
                lms.size,
            )
        )
        fh.write(model.mean_shape.astype("<f8").tobytes())
        fh.write(model.basis.astype("<f8").tobytes())
        fh.write(model.triangles.astype("<i4").tobytes())
        fh.write(model.uv.astype("<f8").tobytes())
        fh.write(lms.astype("<i4").tobytes())


def load_shape_model(path: str | Path) -> ShapeModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MESH_MAGIC))
        if magic != _MESH_MAGIC:
            raise DataError(f"{path}: not a shape-model container")
        n_vert, n_basis, n_tri, n_lms = struct.unpack("<qqqq", fh.read(32))
        mean = np.frombuffer(fh.read(8 * 3 * n_vert), dtype="<f8")
        basis = np.frombuffer(fh.read(8 * 3 * n_vert * n_basis), dtype="<f8").reshape(
            n_basis, 3 * n_vert
        )
        tris = np.frombuffer(fh.read(4 * 3 * n_tri), dtype="<i4").reshape(n_tri, 3)
        uv = np.frombuffer(fh.read(8 * 2 * n_vert), dtype="<f8").reshape(n_vert, 2)
        lms = np.frombuffer(fh.read(4 * n_lms), dtype="<i4") if n_lms else None
        if fh.read(1):
            raise DataError(f"{path}: trailing bytes after mesh payload")
    return ShapeModel(mean, basis, tris, uv, lms)
