import numpy as np
import pytest

from dsfs.capture import Domain, PoseAngles, RoiRecord
from dsfs.image import GrayImage
from dsfs.shape import ellipsoid_head, frame_camera, project_vertices, synthesize_shape
from dsfs.synthesis import FRONTAL


@pytest.fixture(scope="session")
def head_model():
    return ellipsoid_head()


@pytest.fixture(scope="session")
def head_mesh(head_model):
    return synthesize_shape(head_model)


@pytest.fixture
def rng():
    return np.random.default_rng(20240619)


def smooth_blob(size: int = 48, background: float = 0.3, amp: float = 0.35,
                spread: float = 0.04) -> GrayImage:
    """Flat-background raster with one central smooth bump."""
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1)
    data = background + amp * np.exp(-((xx - 0.5) ** 2 + (yy - 0.5) ** 2) / spread)
    return GrayImage(data)


def frontal_landmarks(model, mesh, size: int = 48):
    cam = frame_camera(mesh, FRONTAL, (size, size))
    return tuple(map(tuple, project_vertices(mesh, cam)[model.landmark_vertices]))


@pytest.fixture
def blob_still(head_model, head_mesh):
    lms = frontal_landmarks(head_model, head_mesh)
    return RoiRecord(
        image=smooth_blob(),
        pose=FRONTAL,
        subject_id="subjectA",
        domain=Domain.ENROLLMENT,
        landmarks=lms,
    )


def uniform_roi(value: float, subject: str, landmarks, size: int = 48) -> RoiRecord:
    return RoiRecord(
        image=GrayImage(np.full((size, size), value)),
        pose=PoseAngles(0, 0, 0),
        subject_id=subject,
        domain=Domain.OPERATIONAL,
        landmarks=landmarks,
    )
