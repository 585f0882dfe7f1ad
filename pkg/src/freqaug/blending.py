"""Homologous sample blending: mix two filtered variants of one source image.

The blend is x = M * x_m + (1 - M) * x_n with a unit-interval mask M. The
default mask is the continuous distance map (distance to a random center,
normalized by the largest corner distance); patch and grid masks exist for
ablation comparisons. Homology is enforced through the parent id carried by
each filtered sample, never by inspecting pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, HomologyError
from .filters import FilteredSample

KIND_CONTINUOUS = "continuous"
KIND_PATCH = "patch"
KIND_GRID = "grid"

PATCH_AREA_RATIO_RANGE = (0.25, 0.75)


@dataclass(frozen=True)
class BlendMask:
    """Unit-interval blend weights plus the parameters that produced them."""

    data: np.ndarray  # (H, W) float64 in [0, 1]
    kind: str
    params: dict

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class BlendedSample:
    """Result of blending two homologous filtered samples."""

    data: np.ndarray  # (H, W, C) float64 in [0, 1]
    parent_id: str
    mask: BlendMask


def continuous_mask(height: int, width: int, center: tuple) -> BlendMask:
    """Distance-map mask: 0 at the center, 1 at the farthest image corner.

    ``center`` is (cx, cy) in pixel coordinates, cx along width.
    """
    cx, cy = center
    if not (0 <= cx < width and 0 <= cy < height):
        raise DataError(f"center {center} outside {width}x{height} image")
    corners = [(0.0, 0.0), (0.0, height - 1.0), (width - 1.0, 0.0), (width - 1.0, height - 1.0)]
    d_max = max(np.hypot(px - cx, py - cy) for px, py in corners)
    yy, xx = np.mgrid[0:height, 0:width]
    data = np.hypot(xx - cx, yy - cy) / d_max
    return BlendMask(data, KIND_CONTINUOUS, {"center": [float(cx), float(cy)]})


def patch_mask(
    height: int,
    width: int,
    rng: np.random.Generator,
    area_ratio_range: tuple = PATCH_AREA_RATIO_RANGE,
) -> BlendMask:
    """Single axis-aligned rectangle of ones on a field of zeros.

    The area ratio is drawn uniformly from ``area_ratio_range``; each side is
    round(dim * sqrt(ratio)), clipped to [1, dim]; the top-left corner is
    uniform over all in-bounds positions. Draw order: ratio, top, left.
    """
    lo, hi = area_ratio_range
    if not 0.0 < lo <= hi <= 1.0:
        raise ConfigError(f"patch area-ratio range must satisfy 0 < lo <= hi <= 1, got {area_ratio_range}")
    ratio = float(rng.uniform(lo, hi))
    side = np.sqrt(ratio)
    ph = int(np.clip(round(height * side), 1, height))
    pw = int(np.clip(round(width * side), 1, width))
    top = int(rng.integers(0, height - ph + 1))
    left = int(rng.integers(0, width - pw + 1))
    data = np.zeros((height, width), dtype=np.float64)
    data[top : top + ph, left : left + pw] = 1.0
    return BlendMask(
        data,
        KIND_PATCH,
        {"top": top, "left": left, "patch_height": ph, "patch_width": pw, "area_ratio": ratio},
    )


def grid_mask(height: int, width: int, cell: int) -> BlendMask:
    """Checkerboard of 0/1 cells; the top-left cell is 1."""
    if cell < 1:
        raise DataError(f"cell must be >= 1, got {cell}")
    if cell > height or cell > width:
        raise DataError(f"cell {cell} larger than {height}x{width} image")
    yy, xx = np.mgrid[0:height, 0:width]
    data = (((yy // cell) + (xx // cell)) % 2 == 0).astype(np.float64)
    return BlendMask(data, KIND_GRID, {"cell": int(cell)})


def default_grid_cell(height: int, width: int) -> int:
    return int(np.ceil(min(height, width) / 8))


def blend(x_m: FilteredSample, x_n: FilteredSample, mask: BlendMask) -> BlendedSample:
    """Elementwise convex combination of two filtered variants under a mask."""
    if x_m.data.shape != x_n.data.shape:
        raise DataError(f"shape mismatch: {x_m.data.shape} vs {x_n.data.shape}")
    if mask.data.shape != x_m.data.shape[:2]:
        raise DataError(f"mask shape {mask.data.shape} does not match image {x_m.data.shape[:2]}")
    if x_m.parent_id is None or x_n.parent_id is None:
        raise HomologyError("blend requires samples with known parent images")
    if x_m.parent_id != x_n.parent_id:
        raise HomologyError(f"parents differ: {x_m.parent_id!r} vs {x_n.parent_id!r}")
    weights = mask.data[:, :, None]
    data = weights * x_m.data + (1.0 - weights) * x_n.data
    return BlendedSample(data, x_m.parent_id, mask)
