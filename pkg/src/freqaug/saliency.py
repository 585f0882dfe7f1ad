"""Structure-saliency extraction: the residual of an image and its Gaussian blur.

The saliency map psi(x) = x - blur(x) is the self-supervised pretext target.
Blurring uses a separable truncated Gaussian with mirror padding, so the map
of a constant image is exactly zero and borders pick up no halo. The kernel
size follows a deterministic rule proportional to the image size; the rule is
configurable because trained models must be able to pin it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class GaussianKernel:
    """Truncated, normalized 1D Gaussian used separably along both axes."""

    radius: int
    sigma: float
    weights: np.ndarray = field(compare=False, default=None)

    def __post_init__(self):
        if self.radius < 1:
            raise ConfigError(f"kernel radius must be >= 1, got {self.radius}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.weights is None:
            offsets = np.arange(-self.radius, self.radius + 1, dtype=np.float64)
            w = np.exp(-0.5 * (offsets / self.sigma) ** 2)
            object.__setattr__(self, "weights", w / w.sum())

    @property
    def window(self) -> int:
        return 2 * self.radius + 1

    def dense_2d(self) -> np.ndarray:
        """Full (window, window) kernel, for oracles and impulse checks."""
        return np.outer(self.weights, self.weights)


def default_kernel_for(height: int, width: int) -> GaussianKernel:
    """Size-proportional rule: radius = max(1, round(min(H, W) / 32)), sigma = radius / 3."""
    if height < 8 or width < 8:
        raise DataError(f"kernel rule needs at least 8x8 images, got {height}x{width}")
    radius = max(1, round(min(height, width) / 32))
    return GaussianKernel(radius, radius / 3.0)


def _check_kernel_fits(kernel: GaussianKernel, height: int, width: int) -> None:
    if kernel.window > height or kernel.window > width:
        raise DataError(
            f"kernel window {kernel.window} exceeds image {height}x{width}"
        )


def gaussian_blur(img: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Separable 2D Gaussian convolution with mirror (reflective) padding."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3):
        raise DataError(f"image must be 2D or 3D, got shape {img.shape}")
    _check_kernel_fits(kernel, img.shape[0], img.shape[1])
    out = correlate1d(img, kernel.weights, axis=0, mode="mirror")
    out = correlate1d(out, kernel.weights, axis=1, mode="mirror")
    return out


def structure_saliency(img: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Signed saliency map: image minus its Gaussian blur, same shape."""
    img = np.asarray(img, dtype=np.float64)
    return img - gaussian_blur(img, kernel)


def to_preview(saliency: np.ndarray) -> np.ndarray:
    """Affine map of a signed saliency field into [0, 1] for display only."""
    lo, hi = saliency.min(), saliency.max()
    if hi - lo <= 0:
        return np.zeros_like(saliency)
    return (saliency - lo) / (hi - lo)
