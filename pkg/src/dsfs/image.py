"""Grayscale raster type, bilinear resampling, and image file I/O.

Intensities are stored as float64 in ``[0, dynamic_range]``; 8-bit files are
divided by 255 on load so the default dynamic range is 1.0. Color inputs are
reduced to luma with weights 0.299/0.587/0.114.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataError, DimensionMismatchError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# Slack for float round-off when validating the [0, L] range.
_RANGE_TOL = 1e-9


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale raster with an explicit dynamic range."""

    data: np.ndarray
    dynamic_range: float = 1.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise DataError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("raster contains non-finite intensities")
        if self.dynamic_range <= 0:
            raise DataError(f"dynamic range must be positive, got {self.dynamic_range}")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < -_RANGE_TOL or hi > self.dynamic_range + _RANGE_TOL:
            raise DataError(
                f"intensities [{lo}, {hi}] outside [0, {self.dynamic_range}]"
            )
        arr = np.clip(arr, 0.0, self.dynamic_range)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def as_gray(data: np.ndarray) -> GrayImage:
    """Wrap an arbitrary non-negative array, widening the range as needed."""
    arr = np.asarray(data, dtype=np.float64)
    hi = float(arr.max()) if arr.size else 1.0
    return GrayImage(arr, dynamic_range=max(1.0, hi))


_SNAP = 1e-9


def _snap_to_grid(v: np.ndarray) -> np.ndarray:
    """Round coordinates within a hair of an integer onto it.

    Keeps chains of exact transforms (identity warps, aligned uv grids) exact
    despite barycentric round-off.
    """
    nearest = np.round(v)
    return np.where(np.abs(v - nearest) < _SNAP, nearest, v)


def bilinear_sample(data: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample ``data`` at fractional positions, clamping to the border.

    ``x`` indexes columns and ``y`` rows; integer coordinates address pixel
    centers, so sampling at exact integers returns the stored value.
    """
    h, w = data.shape
    x = _snap_to_grid(np.clip(x, 0.0, w - 1.0))
    y = _snap_to_grid(np.clip(y, 0.0, h - 1.0))
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = data[y0, x0] * (1.0 - fx) + data[y0, x1] * fx
    bot = data[y1, x0] * (1.0 - fx) + data[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def resample(img: GrayImage, height: int, width: int) -> GrayImage:
    """Bilinearly resample to a new raster size, preserving corners."""
    if (height, width) == img.shape:
        return img
    if height < 1 or width < 1:
        raise DataError("target size must be at least 1x1")
    sy = (img.height - 1) / (height - 1) if height > 1 else 0.0
    sx = (img.width - 1) / (width - 1) if width > 1 else 0.0
    yy, xx = np.mgrid[0:height, 0:width]
    out = bilinear_sample(img.data, xx * sx, yy * sy)
    return GrayImage(out, dynamic_range=img.dynamic_range)


def match_size(img: GrayImage, reference: GrayImage) -> GrayImage:
    if img.shape == reference.shape:
        return img
    return resample(img, reference.height, reference.width)


def load_image(path: str | Path) -> GrayImage:
    """Load an 8-bit PGM or PNG (color converted by luma weighting)."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode in ("RGB", "RGBA", "P"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                arr = (
                    LUMA_WEIGHTS[0] * rgb[..., 0]
                    + LUMA_WEIGHTS[1] * rgb[..., 1]
                    + LUMA_WEIGHTS[2] * rgb[..., 2]
                )
            elif im.mode in ("L", "I;16", "I"):
                arr = np.asarray(im.convert("L"), dtype=np.float64)
            else:
                arr = np.asarray(im.convert("L"), dtype=np.float64)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    return GrayImage(arr / 255.0, dynamic_range=1.0)


def save_image(img: GrayImage, path: str | Path) -> None:
    """Write as 8-bit grayscale; format chosen from the suffix (.png/.pgm)."""
    path = Path(path)
    scaled = np.clip(img.data / img.dynamic_range, 0.0, 1.0)
    quantized = np.round(scaled * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="L").save(path)


def require_same_shape(a: GrayImage, b: GrayImage) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"raster shapes differ: {a.shape} vs {b.shape}")
