"""Ideal and Butterworth high-pass filtering in the centered frequency plane.

The Butterworth gain is 1 / (1 + (D0 / D)^(2n)) with the D = 0 singularity
defined away as gain 0 (the limit from above), so the DC component is always
removed. Cutoffs are expressed as fractions of the spectrum radius
r = min(M, N) / 2; the validated augmentation range caps the fraction at
0.04 and the order at 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fourier
from .errors import ConfigError, DataError

D0_FRACTION_MAX = 0.04
ORDER_CHOICES = (1, 2, 3)

KIND_BUTTERWORTH = "butterworth"
KIND_IDEAL = "ideal"

# Per-channel min-max ranges narrower than this are treated as flat fields
# (e.g. a fully attenuated constant channel) and mapped to zeros.
DEGENERATE_RANGE = 1e-9


@dataclass(frozen=True)
class ButterworthParams:
    """Cutoff as a fraction of the spectrum radius, plus the filter order."""

    d0_fraction: float
    order_n: int

    def __post_init__(self):
        if not 0.0 < self.d0_fraction <= D0_FRACTION_MAX:
            raise ConfigError(
                f"d0_fraction must be in (0, {D0_FRACTION_MAX}], got {self.d0_fraction}"
            )
        if self.order_n not in ORDER_CHOICES:
            raise ConfigError(f"order_n must be one of {ORDER_CHOICES}, got {self.order_n}")


@dataclass(frozen=True)
class IdealParams:
    """Hard cutoff as a fraction of the spectrum radius."""

    d0_fraction: float

    def __post_init__(self):
        if not 0.0 < self.d0_fraction <= D0_FRACTION_MAX:
            raise ConfigError(
                f"d0_fraction must be in (0, {D0_FRACTION_MAX}], got {self.d0_fraction}"
            )


@dataclass(frozen=True)
class FilterSpec:
    """One filter per channel; a single entry is shared across all channels."""

    kind: str
    per_channel: tuple

    def __post_init__(self):
        if self.kind not in (KIND_BUTTERWORTH, KIND_IDEAL):
            raise ConfigError(f"unknown filter kind {self.kind!r}")
        if len(self.per_channel) < 1:
            raise ConfigError("FilterSpec needs at least one per-channel entry")
        want = ButterworthParams if self.kind == KIND_BUTTERWORTH else IdealParams
        for p in self.per_channel:
            if not isinstance(p, want):
                raise ConfigError(f"{self.kind} spec holds a {type(p).__name__}")

    def params_for(self, channels: int):
        """Expand to one entry per channel, sharing a single entry if needed."""
        if len(self.per_channel) == channels:
            return self.per_channel
        if len(self.per_channel) == 1:
            return self.per_channel * channels
        raise DataError(
            f"filter spec has {len(self.per_channel)} channel entries, image has {channels}"
        )

    def to_dict(self) -> dict:
        entries = []
        for p in self.per_channel:
            entry = {"d0_fraction": p.d0_fraction}
            if isinstance(p, ButterworthParams):
                entry["order_n"] = p.order_n
            entries.append(entry)
        return {"kind": self.kind, "per_channel": entries}

    @staticmethod
    def from_dict(d: dict) -> "FilterSpec":
        kind = d["kind"]
        if kind == KIND_BUTTERWORTH:
            entries = tuple(
                ButterworthParams(e["d0_fraction"], e["order_n"]) for e in d["per_channel"]
            )
        else:
            entries = tuple(IdealParams(e["d0_fraction"]) for e in d["per_channel"])
        return FilterSpec(kind, entries)


@dataclass(frozen=True)
class ParamRanges:
    """Sampling ranges for random filter specs."""

    d0_min: float = 0.005
    d0_max: float = D0_FRACTION_MAX
    orders: tuple = ORDER_CHOICES

    def __post_init__(self):
        if not 0.0 < self.d0_min <= self.d0_max <= D0_FRACTION_MAX:
            raise ConfigError(
                f"need 0 < d0_min <= d0_max <= {D0_FRACTION_MAX}, "
                f"got [{self.d0_min}, {self.d0_max}]"
            )
        if not self.orders or any(n not in ORDER_CHOICES for n in self.orders):
            raise ConfigError(f"orders must be a nonempty subset of {ORDER_CHOICES}")


@dataclass(frozen=True)
class FilteredSample:
    """High-pass filtered image plus its normalization report and provenance."""

    data: np.ndarray  # (H, W, C) float64 in [0, 1]
    parent_id: str | None
    spec: FilterSpec
    prenorm_min: tuple
    prenorm_max: tuple
    degenerate: tuple
    imag_residue: float


def spectrum_radius(height: int, width: int) -> float:
    """Inscribed-circle radius of the spectrum, in bins."""
    return min(height, width) / 2.0


@lru_cache(maxsize=32)
def distance_field(height: int, width: int) -> np.ndarray:
    """Euclidean distance of each bin from the centered DC bin (cached, read-only)."""
    cy, cx = fourier.dc_index(height, width)
    yy, xx = np.mgrid[0:height, 0:width]
    field = np.hypot(yy - cy, xx - cx)
    field.setflags(write=False)
    return field


def butterworth_response(distance, cutoff, order):
    """High-pass Butterworth gain; 0 at D = 0, 0.5 at D = cutoff, -> 1 as D grows."""
    if cutoff <= 0:
        raise ConfigError(f"cutoff must be positive, got {cutoff}")
    if order < 1 or order != int(order):
        raise ConfigError(f"order must be a positive integer, got {order}")
    d = np.asarray(distance, dtype=np.float64)
    if np.any(d < 0):
        raise DataError("distances must be nonnegative")
    with np.errstate(divide="ignore"):
        ratio_sq = (cutoff / d) ** 2
    term = ratio_sq
    for _ in range(int(order) - 1):
        term = term * ratio_sq
    gain = np.where(d == 0.0, 0.0, 1.0 / (1.0 + term))
    return float(gain) if np.isscalar(distance) else gain


def ideal_response(distance, cutoff):
    """Hard high-pass gain: 0 below the cutoff, 1 at and above it."""
    if cutoff <= 0:
        raise ConfigError(f"cutoff must be positive, got {cutoff}")
    d = np.asarray(distance, dtype=np.float64)
    if np.any(d < 0):
        raise DataError("distances must be nonnegative")
    gain = (d >= cutoff).astype(np.float64)
    return float(gain) if np.isscalar(distance) else gain


def gain_field(spec: FilterSpec, height: int, width: int, channels: int) -> np.ndarray:
    """Per-channel gain array (H, W, C) on the centered frequency grid."""
    dist = distance_field(height, width)
    r = spectrum_radius(height, width)
    per_channel = spec.params_for(channels)
    gains = np.empty((height, width, channels), dtype=np.float64)
    for c, p in enumerate(per_channel):
        cutoff = p.d0_fraction * r
        if spec.kind == KIND_BUTTERWORTH:
            gains[:, :, c] = butterworth_response(dist, cutoff, p.order_n)
        else:
            gains[:, :, c] = ideal_response(dist, cutoff)
    return gains


def _as_hwc(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3:
        raise DataError(f"image must be 2D or 3D, got shape {img.shape}")
    return img


def apply_filter(
    img: np.ndarray,
    spec: FilterSpec,
    parent_id: str | None = None,
    spectrum: fourier.Spectrum | None = None,
) -> FilteredSample:
    """Filter every channel in the frequency domain and renormalize to [0, 1].

    Per channel: forward transform, multiply by the gain field, inverse
    transform, take the real part, then min-max renormalize. Channels whose
    filtered range collapses (a fully attenuated constant channel) come back
    as zeros and are flagged degenerate in the report.

    ``spectrum`` may carry a precomputed centered dft2 of ``img`` so that
    callers producing many variants of one image skip repeated forward
    transforms; results are bitwise identical either way.
    """
    img = _as_hwc(img)
    h, w, c = img.shape
    gains = gain_field(spec, h, w, c)
    if spectrum is None:
        spectrum = fourier.dft2(img)
    elif spectrum.layout != fourier.CENTERED or spectrum.data.shape != img.shape:
        raise DataError("precomputed spectrum must be centered and match the image shape")
    filtered = fourier.Spectrum(spectrum.data * gains, fourier.CENTERED)
    raw, residue = fourier.idft2(filtered, return_imag_residue=True)

    lo = raw.min(axis=(0, 1))
    hi = raw.max(axis=(0, 1))
    span = hi - lo
    degenerate = span <= DEGENERATE_RANGE
    out = np.zeros_like(raw)
    for ch in range(c):
        if not degenerate[ch]:
            out[:, :, ch] = (raw[:, :, ch] - lo[ch]) / span[ch]
    np.clip(out, 0.0, 1.0, out=out)

    return FilteredSample(
        data=out,
        parent_id=parent_id,
        spec=spec,
        prenorm_min=tuple(float(v) for v in lo),
        prenorm_max=tuple(float(v) for v in hi),
        degenerate=tuple(bool(v) for v in degenerate),
        imag_residue=residue,
    )


def sample_filter_spec(
    rng: np.random.Generator,
    channels: int,
    ranges: ParamRanges = ParamRanges(),
    kind: str = KIND_BUTTERWORTH,
    channel_wise: bool = True,
) -> FilterSpec:
    """Draw a random filter spec.

    Draw order is fixed: for each sampled entry, the cutoff fraction first
    (uniform on [d0_min, d0_max]) and then the order (uniform over the order
    choices); entries are drawn channel 0, channel 1, ... With
    ``channel_wise=False`` a single shared entry is drawn.
    """
    if channels < 1:
        raise ConfigError(f"channels must be >= 1, got {channels}")
    count = channels if channel_wise else 1
    entries = []
    for _ in range(count):
        d0 = float(rng.uniform(ranges.d0_min, ranges.d0_max))
        if kind == KIND_BUTTERWORTH:
            n = int(ranges.orders[rng.integers(0, len(ranges.orders))])
            entries.append(ButterworthParams(d0, n))
        elif kind == KIND_IDEAL:
            entries.append(IdealParams(d0))
        else:
            raise ConfigError(f"unknown filter kind {kind!r}")
    return FilterSpec(kind, tuple(entries))
