import numpy as np
import pytest

from dsfs.errors import DataError
from dsfs.image import GrayImage
from dsfs.layers import LayerConfig, decompose


class TestDecompose:
    def test_uniform_image(self):
        d = decompose(GrayImage(np.full((32, 32), 0.5)))
        np.testing.assert_allclose(d.texture.data, 1.0, atol=1e-12)
        assert np.ptp(d.shading.data) < 1e-12
        assert np.ptp(d.material.data) < 1e-12
        np.testing.assert_allclose(d.reconstruct(), 0.5, atol=1e-12)

    def test_reconstruction_identity(self, rng):
        for _ in range(3):
            img = GrayImage(rng.uniform(0.05, 1.0, (48, 48)))
            d = decompose(img)
            rms = np.sqrt(np.mean((d.reconstruct() - img.data) ** 2))
            assert rms <= 1e-3

    def test_reconstruction_with_zeros(self):
        data = np.zeros((32, 32))
        data[8:24, 8:24] = 0.6
        d = decompose(GrayImage(data))
        rms = np.sqrt(np.mean((d.reconstruct() - data) ** 2))
        assert rms <= 1e-3

    def test_texture_recovers_checkerboard_factor(self):
        # composite: smooth ramp times a fine +-20% checkerboard
        size = 64
        yy, xx = np.mgrid[0:size, 0:size] / (size - 1)
        ramp = 0.3 + 0.4 * xx + 0.1 * yy
        checker = np.where((np.indices((size, size)).sum(axis=0) % 2) == 0, 1.2, 0.8)
        img = GrayImage(ramp * checker)
        d = decompose(img)
        expected = checker / checker.mean()
        rms = np.sqrt(np.mean((d.texture.data - expected) ** 2))
        assert rms <= 0.05

    def test_shading_is_smooth(self, rng):
        img = GrayImage(rng.uniform(0.05, 1.0, (48, 48)))
        d = decompose(img)
        grad = np.abs(np.diff(d.shading.data, axis=0)).max()
        assert grad < 0.05

    def test_texture_has_unit_mean(self, rng):
        img = GrayImage(rng.uniform(0.05, 1.0, (40, 40)))
        d = decompose(img)
        assert d.texture.data.mean() == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_image_rejected(self):
        with pytest.raises(DataError):
            decompose(GrayImage(np.zeros((16, 16))))

    def test_base_is_shading_times_material(self):
        img = GrayImage(np.linspace(0.2, 0.8, 32 * 32).reshape(32, 32))
        d = decompose(img)
        np.testing.assert_allclose(
            d.base.data, d.shading.data * d.material.data, atol=1e-15
        )

    def test_sigma_config_respected(self, rng):
        img = GrayImage(rng.uniform(0.1, 0.9, (32, 32)))
        wide = decompose(img, LayerConfig(shading_sigma=16.0))
        narrow = decompose(img, LayerConfig(shading_sigma=4.0))
        # narrower smoothing tracks the image more closely
        err_wide = np.abs(wide.shading.data - img.data).mean()
        err_narrow = np.abs(narrow.shading.data - img.data).mean()
        assert err_narrow < err_wide
