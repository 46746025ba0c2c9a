"""Synthetic ROI generation: render each reference still's material layer
under every pose exemplar and re-light it with every lighting exemplar's
shading layer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import ExemplarSet
from .capture import PoseAngles, RoiRecord
from .errors import DataError
from .image import GrayImage
from .layers import LayerConfig, decompose
from .morphing import default_landmarks, transfer_illumination
from .render import render_pose
from .shape import Mesh3D, ShapeModel, frame_camera, project_vertices, synthesize_shape

FRONTAL = PoseAngles(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SynthesisConfig:
    layers: LayerConfig = field(default_factory=LayerConfig)
    out_size: tuple[int, int] = (48, 48)
    dissolve: float = 1.0
    camera_fill: float = 0.9


@dataclass(frozen=True)
class Provenance:
    """Which exemplar pair produced one synthetic ROI."""

    pose_cluster: int
    exemplar_index: int
    weight: float


@dataclass(frozen=True)
class SyntheticSet:
    """All synthetic ROIs generated for one reference subject."""

    subject_id: str
    rois: tuple[GrayImage, ...]
    provenance: tuple[Provenance, ...]
    failures: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.rois) != len(self.provenance):
            raise DataError("roi and provenance counts disagree")


def rendered_landmarks(
    model: ShapeModel, mesh: Mesh3D, cam, out_size: tuple[int, int]
) -> np.ndarray:
    """Landmark positions in the rendered frame.

    Uses the model's landmark vertices when present, else the fallback
    5-point layout for the output raster.
    """
    if model.landmark_vertices is not None and model.landmark_vertices.size:
        pts = project_vertices(mesh, cam)
        return pts[model.landmark_vertices]
    return default_landmarks(*out_size)


def image_mapped_uv(mesh: Mesh3D, still: GrayImage, fill: float = 0.9) -> np.ndarray:
    """Texture coordinates that map the still onto the mesh by 2-D projection.

    Each vertex samples the still at its own frontal-camera position, so a
    frontal render under the same framing reproduces the still exactly over
    the covered region.
    """
    cam = frame_camera(mesh, FRONTAL, still.shape, fill)
    return project_vertices(mesh, cam)


def roi_landmarks(roi: RoiRecord) -> np.ndarray:
    if roi.landmarks:
        return np.asarray(roi.landmarks, dtype=np.float64)
    return default_landmarks(roi.image.height, roi.image.width)


def generate_synthetic_set(
    still: RoiRecord,
    exemplars: ExemplarSet,
    exemplar_rois: list[RoiRecord],
    model: ShapeModel,
    alpha: np.ndarray | None = None,
    cfg: SynthesisConfig = SynthesisConfig(),
) -> SyntheticSet:
    """Produce one synthetic ROI per exemplar for a single reference still.

    The still is decomposed once; its material layer becomes the mesh texture.
    Each pose cluster is rendered once at its pose exemplar's angles, then
    every lighting exemplar of that cluster contributes one re-lit ROI.
    Per-exemplar failures are recorded and skipped rather than aborting.
    """
    if still.landmarks is None:
        raise DataError(f"still {still.subject_id} has no landmarks")
    if len(exemplar_rois) != exemplars.q:
        raise DataError(
            f"got {len(exemplar_rois)} exemplar ROIs for {exemplars.q} exemplars"
        )
    still_layers = decompose(still.image, cfg.layers)
    mesh = synthesize_shape(model, alpha)
    uv = image_mapped_uv(mesh, still.image, cfg.camera_fill)

    rois: list[GrayImage] = []
    provenance: list[Provenance] = []
    failures: list[str] = []

    renders: dict[int, tuple[GrayImage, np.ndarray]] = {}
    for cluster_id, pose in enumerate(exemplars.pose_exemplars):
        try:
            cam = frame_camera(mesh, pose, cfg.out_size, cfg.camera_fill)
            rendered = render_pose(mesh, still_layers.material, cam, cfg.out_size, uv=uv)
            renders[cluster_id] = (rendered, rendered_landmarks(model, mesh, cam, cfg.out_size))
        except DataError as exc:
            failures.append(f"pose cluster {cluster_id}: {exc}")

    for k, (exemplar, weight, cluster_id) in enumerate(
        zip(exemplars.exemplars, exemplars.weights, exemplars.pose_cluster_of)
    ):
        if cluster_id not in renders:
            failures.append(f"exemplar {k}: pose render unavailable")
            continue
        rendered, render_lms = renders[cluster_id]
        try:
            light_roi = exemplar_rois[k]
            shading = decompose(light_roi.image, cfg.layers).shading
            synthetic = transfer_illumination(
                shading,
                roi_landmarks(light_roi),
                rendered,
                render_lms,
                dissolve=cfg.dissolve,
            )
            rois.append(synthetic)
            provenance.append(Provenance(cluster_id, k, weight))
        except DataError as exc:
            failures.append(f"exemplar {k}: {exc}")

    return SyntheticSet(
        subject_id=still.subject_id,
        rois=tuple(rois),
        provenance=tuple(provenance),
        failures=tuple(failures),
    )
