"""Multiplicative layer decomposition: shading x material x texture.

The source raster factors as ``img = L * M * T`` where the shading layer L is
the low-pass part of the log image, the texture layer T is the residual above
a fine scale (normalized to unit mean), and the material layer M absorbs the
rest. The product reconstructs the input exactly wherever it is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DataError
from .image import GrayImage, as_gray

DEFAULT_SHADING_SIGMA = 12.0
DEFAULT_TEXTURE_SIGMA = 2.0
LOG_FLOOR = 1e-4


@dataclass(frozen=True)
class LayerConfig:
    shading_sigma: float = DEFAULT_SHADING_SIGMA
    texture_sigma: float = DEFAULT_TEXTURE_SIGMA
    floor: float = LOG_FLOOR


@dataclass(frozen=True)
class LayerDecomposition:
    """Shading, material, and texture factors of one image."""

    shading: GrayImage
    material: GrayImage
    texture: GrayImage

    @property
    def base(self) -> GrayImage:
        """Textureless base layer: shading x material."""
        return as_gray(self.shading.data * self.material.data)

    def reconstruct(self) -> np.ndarray:
        return self.shading.data * self.material.data * self.texture.data


def _log_smooth(log_img: np.ndarray, sigma: float) -> np.ndarray:
    return gaussian_filter(log_img, sigma=sigma, mode="nearest")


def decompose(img: GrayImage, cfg: LayerConfig = LayerConfig()) -> LayerDecomposition:
    """Split an image into shading, material, and texture layers.

    A small floor keeps the log transform finite on dark pixels; the exact
    reconstruction identity ``L*M*T == img`` is preserved by solving for the
    material layer last.
    """
    data = img.data
    if float(data.max()) <= 0.0:
        raise DataError("cannot decompose an all-zero image")
    floored = data + cfg.floor
    log_img = np.log(floored)

    shading = np.exp(_log_smooth(log_img, cfg.shading_sigma))
    fine = np.exp(_log_smooth(log_img, cfg.texture_sigma))
    texture = floored / fine
    texture /= texture.mean()
    material = data / (shading * texture)

    return LayerDecomposition(
        shading=as_gray(shading),
        material=as_gray(material),
        texture=as_gray(texture),
    )
