from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import ndimage

from speckletk import EdgeParams, canny_edges, gaussian_blur
from speckletk.edges import gaussian_kernel_1d, sobel_gradients, to_luminance


def vertical_step(h=64, w=64, column=32) -> np.ndarray:
    img = np.zeros((h, w), dtype=np.float64)
    img[:, column:] = 255.0
    return img


class TestGaussianBlur:
    def test_constant_image_unchanged(self):
        img = np.full((16, 16), 42.0)
        assert gaussian_blur(img, 1.0) == pytest.approx(img)

    def test_delta_impulse_matches_analytic_kernel(self):
        # analytic oracle: normalized 2-D Gaussian sampled on the kernel grid
        sigma = 1.0
        radius = math.ceil(3 * sigma)
        img = np.zeros((21, 21))
        img[10, 10] = 1.0
        out = gaussian_blur(img, sigma)
        yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
        analytic = np.exp(-(xx**2 + yy**2) / (2 * sigma**2))
        analytic /= analytic.sum()
        window = out[10 - radius : 10 + radius + 1, 10 - radius : 10 + radius + 1]
        np.testing.assert_allclose(window, analytic, atol=1e-6)

    def test_mass_conserved_under_reflection(self, rng):
        img = rng.random((17, 23)) * 255.0
        out = gaussian_blur(img, 2.3)
        assert out.sum() == pytest.approx(img.sum(), rel=1e-6)

    def test_kernel_radius_rule(self):
        assert gaussian_kernel_1d(1.0).size == 2 * 3 + 1
        assert gaussian_kernel_1d(1.4).size == 2 * math.ceil(4.2) + 1
        assert gaussian_kernel_1d(0.5).size == 2 * 2 + 1

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.zeros((4, 4)), 0.0)


class TestLuminance:
    def test_weights(self):
        rgb = np.zeros((1, 1, 3))
        rgb[0, 0] = (100, 200, 50)
        expected = 0.299 * 100 + 0.587 * 200 + 0.114 * 50
        assert to_luminance(rgb)[0, 0] == pytest.approx(expected)

    def test_gray_passthrough(self, rng):
        img = rng.random((4, 4))
        assert np.array_equal(to_luminance(img), img)


class TestCanny:
    def test_uniform_image_has_no_edges(self):
        edges = canny_edges(np.full((32, 32), 128.0), EdgeParams(sigma=1.0))
        assert edges.dtype == np.uint8
        assert edges.sum() == 0

    def test_vertical_step_single_component(self):
        img = vertical_step(column=32)
        edges = canny_edges(img, EdgeParams(sigma=1.0, high_threshold=0.7))
        assert set(np.unique(edges)) <= {0, 1}
        labels, n = ndimage.label(edges, structure=np.ones((3, 3)))
        assert n == 1
        cols = np.nonzero(edges)[1]
        # the step sits between columns 31 and 32
        assert cols.min() >= 31 and cols.max() <= 32

    def test_d4_equivariance_on_steps(self):
        img = vertical_step(48, 48, 24)
        edges_v = canny_edges(img, EdgeParams(sigma=1.0, high_threshold=0.7))
        edges_h = canny_edges(np.rot90(img), EdgeParams(sigma=1.0, high_threshold=0.7))
        assert np.array_equal(np.rot90(edges_v), edges_h)

    def test_threshold_monotonicity(self, rng):
        img = gaussian_blur(rng.random((48, 48)) * 255.0, 1.0)
        loose = canny_edges(img, EdgeParams(sigma=1.0, high_threshold=0.3))
        tight = canny_edges(img, EdgeParams(sigma=1.0, high_threshold=0.8))
        assert np.all(loose >= tight)

    def test_strong_seed_set_monotone(self, rng):
        img = gaussian_blur(rng.random((32, 32)) * 255.0, 1.0)
        gx, gy = sobel_gradients(gaussian_blur(img, 1.4))
        magnitude = np.hypot(gx, gy)
        seeds_low = magnitude >= 0.4 * magnitude.max()
        seeds_high = magnitude >= 0.7 * magnitude.max()
        assert np.all(seeds_low >= seeds_high)

    def test_rgb_input_reduced_to_luminance(self):
        gray = vertical_step(32, 32, 16)
        rgb = np.stack([gray, gray, gray], axis=-1)
        params = EdgeParams(sigma=1.0, high_threshold=0.7)
        assert np.array_equal(canny_edges(rgb, params), canny_edges(gray, params))

    def test_param_validation(self):
        with pytest.raises(ValueError):
            EdgeParams(sigma=-1.0)
        with pytest.raises(ValueError):
            EdgeParams(high_threshold=1.5)
        with pytest.raises(ValueError):
            EdgeParams(low_ratio=1.0)

    def test_empty_image_rejected(self):
        with pytest.raises(ValueError):
            canny_edges(np.zeros((0, 0)))
