"""Procedural synthetic corpus: seeded face-like identities rendered under
controlled pose and illumination perturbations.

Every raster is generated through the same mesh/render machinery used by the
synthesis stage, so capture conditions in the corpus are reachable by the
pipeline. No external assets are required.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .capture import Domain, PoseAngles, RoiRecord
from .image import GrayImage
from .render import render_pose
from .shape import ShapeModel, ellipsoid_head, frame_camera, project_vertices, synthesize_shape
from .synthesis import FRONTAL, image_mapped_uv


@dataclass(frozen=True)
class CorpusConfig:
    roi_size: tuple[int, int] = (48, 48)
    n_identities: int = 20
    yaw_groups: tuple[float, ...] = (-25.0, 0.0, 25.0)
    shade_strengths: tuple[float, ...] = (0.0, 0.45)
    pose_jitter: float = 2.5
    shade_jitter: float = 0.05
    noise: float = 0.01
    camera_fill: float = 0.9


def identity_texture(seed: int, size: tuple[int, int]) -> GrayImage:
    """Distinct smooth face-like pattern for one synthetic identity."""
    rng = np.random.default_rng(seed)
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = (w - 1) / 2, (h - 1) / 2
    r2 = ((xx - cx) / (0.55 * w)) ** 2 + ((yy - cy) / (0.6 * h)) ** 2
    img = 0.55 + 0.25 * np.exp(-r2)
    for _ in range(6):
        bx = rng.uniform(0.2, 0.8) * w
        by = rng.uniform(0.2, 0.8) * h
        amp = rng.uniform(-0.28, 0.28)
        sx = rng.uniform(0.05, 0.16) * w
        sy = rng.uniform(0.05, 0.16) * h
        img += amp * np.exp(-(((xx - bx) / sx) ** 2 + ((yy - by) / sy) ** 2))
    img += 0.08 * np.sin(2 * np.pi * (xx * rng.uniform(1, 3) / w + rng.uniform(0, 1)))
    lo, hi = img.min(), img.max()
    img = 0.15 + 0.75 * (img - lo) / (hi - lo)
    return GrayImage(img)


def shading_field(
    size: tuple[int, int], strength: float, direction: float
) -> np.ndarray:
    """Smooth multiplicative shading ramp across the raster."""
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    t = (np.cos(direction) * xx / max(w - 1, 1)) + (np.sin(direction) * yy / max(h - 1, 1))
    t = (t - t.min()) / max(t.max() - t.min(), 1e-12)
    return 1.0 - strength * t


@dataclass
class CorpusFactory:
    """Renders ROIs of procedural identities under stated capture conditions."""

    cfg: CorpusConfig = field(default_factory=CorpusConfig)
    model: ShapeModel | None = None

    def __post_init__(self) -> None:
        if self.model is None:
            self.model = ellipsoid_head()
        self.mesh = synthesize_shape(self.model)

    def still(self, identity: int) -> RoiRecord:
        """Frontal high-quality reference still for one identity."""
        tex = identity_texture(1000 + identity, self.cfg.roi_size)
        cam = frame_camera(self.mesh, FRONTAL, self.cfg.roi_size, self.cfg.camera_fill)
        lms = project_vertices(self.mesh, cam)[self.model.landmark_vertices]
        return RoiRecord(
            image=tex,
            pose=FRONTAL,
            subject_id=f"id{identity:03d}",
            domain=Domain.ENROLLMENT,
            landmarks=tuple(map(tuple, lms)),
        )

    def roi(
        self,
        identity: int,
        pose: PoseAngles,
        shade_strength: float,
        shade_direction: float,
        rng: np.random.Generator,
    ) -> RoiRecord:
        """One operational-domain ROI: posed render times a shading ramp."""
        tex = identity_texture(1000 + identity, self.cfg.roi_size)
        uv = image_mapped_uv(self.mesh, tex, self.cfg.camera_fill)
        cam = frame_camera(self.mesh, pose, self.cfg.roi_size, self.cfg.camera_fill)
        rendered = render_pose(self.mesh, tex, cam, self.cfg.roi_size, uv=uv)
        shade = shading_field(self.cfg.roi_size, shade_strength, shade_direction)
        data = rendered.data * shade
        if self.cfg.noise:
            data = data + rng.normal(0.0, self.cfg.noise, size=data.shape)
        data = np.clip(data, 0.0, 1.0)
        lms = np.clip(
            project_vertices(self.mesh, cam)[self.model.landmark_vertices],
            0,
            [[self.cfg.roi_size[1] - 1, self.cfg.roi_size[0] - 1]],
        )
        return RoiRecord(
            image=GrayImage(data),
            pose=pose,
            subject_id=f"id{identity:03d}",
            domain=Domain.OPERATIONAL,
            landmarks=tuple(map(tuple, lms)),
        )

    def sample_conditions(
        self, rng: np.random.Generator
    ) -> tuple[PoseAngles, float, float]:
        yaw = rng.choice(self.cfg.yaw_groups) + rng.uniform(
            -self.cfg.pose_jitter, self.cfg.pose_jitter
        )
        pitch = rng.uniform(-self.cfg.pose_jitter, self.cfg.pose_jitter)
        strength = float(
            np.clip(
                rng.choice(self.cfg.shade_strengths)
                + rng.uniform(-self.cfg.shade_jitter, self.cfg.shade_jitter),
                0.0,
                0.9,
            )
        )
        direction = float(rng.choice([0.0, np.pi]))
        return PoseAngles(pitch, float(yaw), 0.0), strength, direction

    def batch(
        self, identity: int, count: int, rng: np.random.Generator
    ) -> list[RoiRecord]:
        out = []
        for _ in range(count):
            pose, strength, direction = self.sample_conditions(rng)
            out.append(self.roi(identity, pose, strength, direction, rng))
        return out


@dataclass(frozen=True)
class CorpusSplit:
    gallery: list[RoiRecord]
    generic: list[RoiRecord]
    probes: list[RoiRecord]


def make_split(
    seed: int,
    n_watch: int = 5,
    n_generic: int = 10,
    n_imposters: int = 5,
    rois_per_generic: int = 4,
    probes_per_subject: int = 4,
    factory: CorpusFactory | None = None,
) -> CorpusSplit:
    """Seeded watch-list / generic / probe partition over disjoint identities.

    Probes pool target ROIs of every watch-list identity with imposter ROIs
    from identities in neither the watch list nor the generic set.
    """
    cfg = factory.cfg if factory else CorpusConfig()
    factory = factory or CorpusFactory(cfg)
    total = n_watch + n_generic + n_imposters
    if cfg.n_identities < total:
        raise ValueError(f"corpus holds {cfg.n_identities} identities, need {total}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(cfg.n_identities)
    watch = order[:n_watch]
    generic_ids = order[n_watch : n_watch + n_generic]
    imposters = order[n_watch + n_generic : total]

    gallery = [factory.still(i) for i in watch]
    generic = [
        roi for i in generic_ids for roi in factory.batch(i, rois_per_generic, rng)
    ]
    probes = [
        roi
        for i in list(watch) + list(imposters)
        for roi in factory.batch(i, probes_per_subject, rng)
    ]
    return CorpusSplit(gallery=gallery, generic=generic, probes=probes)
