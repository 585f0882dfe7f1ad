"""Request/response models for the augmentation service.

File-path fields refer to the service host's filesystem: the service is an
engine wrapper for co-located training jobs, not an upload endpoint.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

SizeSpec = Optional[list[int]]  # [width, height]; None keeps native size


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    kind: Literal["config", "data", "io"]
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class AugmentRequest(BaseModel):
    input_dir: str
    out_dir: str
    label_dir: Optional[str] = None
    seed: int = 0
    k: int = Field(10, ge=1)
    epochs: int = Field(1, ge=1)
    d0_min: float = 0.005
    d0_max: float = 0.04
    orders: list[int] = [1, 2, 3]
    filter_kind: Literal["butterworth", "ideal"] = "butterworth"
    channel_wise: bool = True
    mask: Literal["continuous", "patch", "grid"] = "continuous"
    grid_cell: Optional[int] = None
    size: SizeSpec = [512, 512]
    workers: int = Field(1, ge=1)


class AugmentResponse(BaseModel):
    manifest: str
    records: int
    images: int
    warnings: list[str]
    elapsed_sec: float


class FilterRequest(BaseModel):
    image: str
    out: str
    kind: Literal["butterworth", "ideal"] = "butterworth"
    d0: Optional[list[float]] = None  # explicit per-channel cutoffs (1 entry broadcasts)
    orders: Optional[list[int]] = None  # explicit per-channel orders
    seed: Optional[int] = None  # sample parameters instead of giving them
    d0_min: float = 0.005
    d0_max: float = 0.04
    order_choices: list[int] = [1, 2, 3]
    channel_wise: bool = True


class FilterResponse(BaseModel):
    out: str
    spec: dict
    prenorm_min: list[float]
    prenorm_max: list[float]
    degenerate: list[bool]
    imag_residue: float
    sha256: str


class BlendRequest(BaseModel):
    image: str
    out: str
    seed: int = 0
    mask: Literal["continuous", "patch", "grid"] = "continuous"
    grid_cell: Optional[int] = None
    d0_min: float = 0.005
    d0_max: float = 0.04
    orders: list[int] = [1, 2, 3]
    filter_kind: Literal["butterworth", "ideal"] = "butterworth"
    channel_wise: bool = True


class BlendResponse(BaseModel):
    out: str
    filter_m: dict
    filter_n: dict
    mask_kind: str
    mask_params: dict
    sha256: str


class SaliencyRequest(BaseModel):
    image: str
    out: str  # .npy target
    radius: Optional[int] = None   # None -> size-proportional rule
    sigma: Optional[float] = None  # None -> radius / 3
    preview_out: Optional[str] = None


class SaliencyResponse(BaseModel):
    out: str
    radius: int
    sigma: float
    value_min: float
    value_max: float
    preview_out: Optional[str] = None


class LossesRequest(BaseModel):
    pred_saliency: Optional[str] = None    # .npy, (K, H, W, C) or (H, W, C)
    target_saliency: Optional[str] = None  # .npy, (H, W, C)
    pred_seg: Optional[str] = None         # .npy probabilities
    labels: Optional[str] = None           # .npy one-hot or integer map
    pred_mask: Optional[str] = None        # .npy 0/1 or .png (>0 is foreground)
    true_mask: Optional[str] = None
    alpha: float = 1.0


class LossesResponse(BaseModel):
    loss_self: Optional[float] = None
    loss_seg: Optional[float] = None
    loss_total: Optional[float] = None
    dice: Optional[float] = None
    iou: Optional[float] = None
    alpha: float


class PreviewRequest(BaseModel):
    manifest: str
    n: int = Field(4, ge=1)
    out: str


class PreviewResponse(BaseModel):
    out: str
    rows: int
    tiles_per_row: int
    tile_size: list[int]


class BenchRequest(BaseModel):
    n_images: int = Field(20, ge=1)
    k: int = Field(10, ge=1)
    size: list[int] = [512, 512]
    repetitions: int = Field(3, ge=1)
    workers: int = Field(4, ge=2)
    seed: int = 0


class WorkerStats(BaseModel):
    wall_seconds: list[float]
    p50: float
    p90: float
    p100: float
    images_per_sec: float
    views_per_sec: float


class BenchResponse(BaseModel):
    n_images: int
    k: int
    size: list[int]
    repetitions: int
    multi_workers: int
    single: WorkerStats
    multi: WorkerStats
    scaling_factor: float


class ReplayRequest(BaseModel):
    manifest: str
    index: Optional[int] = None  # record line number; or select by keys below
    parent: Optional[str] = None
    epoch: int = 0
    view: int = 0


class ReplayResponse(BaseModel):
    parent: str
    epoch: int
    view: int
    expected_sha256: str
    actual_sha256: str
    match: bool
