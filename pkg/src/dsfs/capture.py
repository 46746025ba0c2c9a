"""Capture-condition measurements: pose records and windowed luminance /
contrast distortion factors.

Both distortion factors slide a ``B x B`` window over the image pair and
average a stabilized similarity term per window; they are symmetric in their
arguments, equal 1 for identical inputs, and lie in ``(0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DataError, DimensionMismatchError
from .image import GrayImage, match_size

DEFAULT_WINDOW = 8
DEFAULT_STRIDE = 1
DEFAULT_K_LUMINANCE = 0.01
DEFAULT_K_CONTRAST = 0.03


def _wrap_angle(value: float) -> float:
    """Map any angle in degrees into [-180, 180)."""
    wrapped = (float(value) + 180.0) % 360.0 - 180.0
    return wrapped


@dataclass(frozen=True)
class PoseAngles:
    """Head orientation as pitch/yaw/roll Euler angles in degrees."""

    pitch: float
    yaw: float
    roll: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pitch", _wrap_angle(self.pitch))
        object.__setattr__(self, "yaw", _wrap_angle(self.yaw))
        object.__setattr__(self, "roll", _wrap_angle(self.roll))

    def as_array(self) -> np.ndarray:
        return np.array([self.pitch, self.yaw, self.roll], dtype=np.float64)


class Domain(Enum):
    ENROLLMENT = "enrollment"
    OPERATIONAL = "operational"


@dataclass(frozen=True)
class RoiRecord:
    """One facial region of interest plus its capture metadata."""

    image: GrayImage
    pose: PoseAngles
    subject_id: str
    domain: Domain
    landmarks: tuple[tuple[float, float], ...] | None = None
    path: str | None = None

    def __post_init__(self) -> None:
        if self.landmarks is not None:
            lms = tuple((float(x), float(y)) for x, y in self.landmarks)
            for x, y in lms:
                if not (0 <= x <= self.image.width - 1 and 0 <= y <= self.image.height - 1):
                    raise DataError(
                        f"landmark ({x}, {y}) outside image bounds "
                        f"{self.image.width}x{self.image.height}"
                    )
            object.__setattr__(self, "landmarks", lms)


@dataclass(frozen=True)
class ConditionVector:
    """Measured capture condition of one ROI: pose plus (luminance, contrast)."""

    pose: PoseAngles
    luminance: float
    contrast: float

    def __post_init__(self) -> None:
        for name in ("luminance", "contrast"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0 + 1e-12):
                raise DataError(f"{name} {v} outside (0, 1]")

    def lighting(self) -> np.ndarray:
        return np.array([self.luminance, self.contrast], dtype=np.float64)


@dataclass(frozen=True)
class MetricConfig:
    """Window geometry and stabilizing constants for glq/gcq."""

    window: int = DEFAULT_WINDOW
    stride: int = DEFAULT_STRIDE
    k_luminance: float = DEFAULT_K_LUMINANCE
    k_contrast: float = DEFAULT_K_CONTRAST


def _window_stats(
    img: GrayImage, window: int, stride: int, want_std: bool
) -> np.ndarray:
    """Per-window mean or standard deviation over all fully interior positions."""
    view = sliding_window_view(img.data, (window, window))[::stride, ::stride]
    if want_std:
        return view.std(axis=(-2, -1))
    return view.mean(axis=(-2, -1))


def _check_pair(r: GrayImage, g: GrayImage, window: int, stride: int) -> None:
    if r.shape != g.shape:
        raise DimensionMismatchError(f"image shapes differ: {r.shape} vs {g.shape}")
    if window < 1 or window > min(r.height, r.width):
        raise DataError(
            f"window {window} does not fit inside a {r.height}x{r.width} image"
        )
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")


def glq(
    r: GrayImage,
    g: GrayImage,
    window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
    k_luminance: float = DEFAULT_K_LUMINANCE,
    dynamic_range: float | None = None,
) -> float:
    """Global luminance distortion between two equal-size images.

    Averages ``(2*mu_r*mu_g + C) / (mu_r^2 + mu_g^2 + C)`` over every window
    position, with ``C = (k * L)^2`` for dynamic range ``L``.
    """
    _check_pair(r, g, window, stride)
    L = r.dynamic_range if dynamic_range is None else dynamic_range
    c = (k_luminance * L) ** 2
    mu_r = _window_stats(r, window, stride, want_std=False)
    mu_g = _window_stats(g, window, stride, want_std=False)
    terms = (2.0 * mu_r * mu_g + c) / (mu_r**2 + mu_g**2 + c)
    return float(terms.mean())


def gcq(
    r: GrayImage,
    g: GrayImage,
    window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
    k_contrast: float = DEFAULT_K_CONTRAST,
    dynamic_range: float | None = None,
) -> float:
    """Global contrast distortion: the glq form over window standard deviations."""
    _check_pair(r, g, window, stride)
    L = r.dynamic_range if dynamic_range is None else dynamic_range
    c = (k_contrast * L) ** 2
    sd_r = _window_stats(r, window, stride, want_std=True)
    sd_g = _window_stats(g, window, stride, want_std=True)
    terms = (2.0 * sd_r * sd_g + c) / (sd_r**2 + sd_g**2 + c)
    return float(terms.mean())


def condition_vector(
    roi: RoiRecord, reference: GrayImage, cfg: MetricConfig = MetricConfig()
) -> ConditionVector:
    """Measure one ROI against the reference still.

    The ROI is bilinearly resampled to the reference size first when the two
    rasters disagree.
    """
    probe = match_size(roi.image, reference)
    lum = glq(reference, probe, cfg.window, cfg.stride, cfg.k_luminance)
    con = gcq(reference, probe, cfg.window, cfg.stride, cfg.k_contrast)
    return ConditionVector(pose=roi.pose, luminance=min(lum, 1.0), contrast=min(con, 1.0))
