"""Exact 2D discrete Fourier transforms with a centered-spectrum convention.

Conventions, fixed once for the whole package:
  * forward transform is unnormalized, the inverse carries the 1/(MN) factor;
  * channels are transformed independently (axis 2, when present);
  * all frequency math is double precision;
  * ``centered`` layout puts the DC bin at (floor(M/2), floor(N/2)),
    ``natural`` layout keeps it at (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .errors import DataError

CENTERED = "centered"
NATURAL = "natural"


@dataclass(frozen=True)
class Spectrum:
    """Per-channel complex spectrum of shape (M, N) or (M, N, C)."""

    data: np.ndarray
    layout: str = CENTERED

    def __post_init__(self):
        if self.data.ndim not in (2, 3):
            raise DataError(f"spectrum must be 2D or 3D, got shape {self.data.shape}")
        if self.layout not in (CENTERED, NATURAL):
            raise DataError(f"unknown spectrum layout {self.layout!r}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]


def _check_spatial_dims(shape) -> None:
    if shape[0] < 2 or shape[1] < 2:
        raise DataError(f"both spatial dimensions must be >= 2, got {shape[0]}x{shape[1]}")


def dft2(img: np.ndarray) -> Spectrum:
    """Unnormalized forward 2D DFT per channel, returned in centered layout."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3):
        raise DataError(f"image must be 2D or 3D, got shape {img.shape}")
    _check_spatial_dims(img.shape)
    spec = _fft.fft2(img, axes=(0, 1))
    return Spectrum(np.fft.fftshift(spec, axes=(0, 1)), CENTERED)


def idft2(spec: Spectrum, return_imag_residue: bool = False):
    """Inverse transform scaled by 1/(MN); returns the real part, unclamped.

    Filtered spectra generally produce values outside [0, 1]; callers decide
    how to renormalize. With ``return_imag_residue`` the maximum absolute
    imaginary component is returned alongside as a diagnostic.
    """
    _check_spatial_dims(spec.data.shape)
    data = spec.data
    if spec.layout == CENTERED:
        data = np.fft.ifftshift(data, axes=(0, 1))
    field = _fft.ifft2(data, axes=(0, 1))
    real = np.ascontiguousarray(field.real)
    if return_imag_residue:
        return real, float(np.max(np.abs(field.imag)))
    return real


def shift_center(spec: Spectrum) -> Spectrum:
    """Relabel a natural-layout spectrum so the DC bin sits at the center."""
    if spec.layout != NATURAL:
        raise DataError("shift_center expects a natural-layout spectrum")
    return Spectrum(np.fft.fftshift(spec.data, axes=(0, 1)), CENTERED)


def unshift_center(spec: Spectrum) -> Spectrum:
    """Inverse of :func:`shift_center`; bitwise round trip."""
    if spec.layout != CENTERED:
        raise DataError("unshift_center expects a centered-layout spectrum")
    return Spectrum(np.fft.ifftshift(spec.data, axes=(0, 1)), NATURAL)


def dc_index(m: int, n: int) -> tuple[int, int]:
    """Index of the DC bin in centered layout."""
    return m // 2, n // 2
