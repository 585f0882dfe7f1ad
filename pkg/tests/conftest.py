import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h, w, c=3):
    """Uniform random image in [0, 1]."""
    return rng.random((h, w, c))


def synthetic_photo(seed, h=64, w=64):
    """A natural-looking synthetic image: smooth illumination gradient,
    curvy dark strokes, and mild noise. Used wherever tests want something
    closer to a photograph than white noise."""
    gen = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    gx, gy = gen.uniform(-1, 1, 2)
    base = 0.55 + 0.25 * (gx * (xx / w - 0.5) + gy * (yy / h - 0.5))
    img = np.stack([base * s for s in gen.uniform(0.7, 1.0, 3)], axis=-1)
    for _ in range(4):
        x0, y0 = gen.uniform(0, w), gen.uniform(0, h)
        amp, freq = gen.uniform(3, 8), gen.uniform(0.05, 0.15)
        xs = np.arange(w)
        ys = y0 + amp * np.sin(freq * (xs - x0))
        for t in np.linspace(0, 1, 4 * w):
            xi = int(round((1 - t) * x0 + t * xs[-1])) % w
            yi = int(round(np.interp(xi, xs, ys))) % h
            img[max(0, yi - 1) : yi + 1, max(0, xi - 1) : xi + 1, :] *= 0.45
    img += gen.normal(0, 0.01, img.shape)
    return np.clip(img, 0.0, 1.0)


@pytest.fixture
def photo():
    return synthetic_photo(7)


def fundus_like(seed, size):
    """Retina-photograph stand-in: dominant circular illumination field with a
    gentle color cast, a bright disc blob, and subtle curvy vessels. Matches
    the energy profile of the modality this engine targets (smooth
    low-frequency style carrying most energy, sparse fine structure)."""
    gen = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cy, cx = size / 2 + gen.uniform(-size / 40, size / 40, 2)
    rr = np.hypot(yy - cy, xx - cx)
    field = np.clip(1.05 - (rr / (size * 0.52)) ** 2, 0, 1)
    cast = 1 + 0.1 * (xx - cx) / size * gen.uniform(-1, 1)
    img = np.stack(
        [field * 0.80 * cast, field * 0.45, field * 0.22 / np.maximum(cast, 1e-6)], axis=-1
    )
    img *= gen.uniform(0.9, 1.1, 3)
    by, bx = cy + gen.uniform(-size / 8, size / 8), cx + gen.uniform(-size / 8, size / 8)
    blob = np.exp(-((np.hypot(yy - by, xx - bx) / (size * 0.05)) ** 2))
    img = np.clip(img + blob[:, :, None] * np.array([0.15, 0.12, 0.05]), 0, 1)
    for _ in range(9):
        ang = gen.uniform(0, 2 * np.pi)
        t = np.linspace(0, size * 0.45, size)
        wig = gen.uniform(8, 20) * np.sin(t / gen.uniform(20, 60) + gen.uniform(0, 6))
        ys = np.clip((by + t * np.sin(ang) + wig * np.cos(ang)).astype(int), 1, size - 2)
        xs = np.clip((bx + t * np.cos(ang) - wig * np.sin(ang)).astype(int), 1, size - 2)
        for oy in (-1, 0, 1):
            for ox in (-1, 0, 1):
                img[ys + oy, xs + ox, :] *= 0.88
    img += gen.normal(0, 0.008, img.shape)
    return np.clip(img, 0, 1)
