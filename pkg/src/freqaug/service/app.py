"""FastAPI wrapper around the augmentation engine.

Every endpoint body lives in a plain ``handle_*`` function taking the request
model and returning the response model; the CLI calls these directly when no
server is configured, so there is exactly one implementation of each command.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import blending, filters, imgio, losses, pipeline, saliency
from ..errors import ConfigError, DataError
from .. import __version__
from . import schemas


def handle_augment(req: schemas.AugmentRequest) -> schemas.AugmentResponse:
    config = pipeline.RunConfig(
        input_dir=req.input_dir,
        out_dir=req.out_dir,
        label_dir=req.label_dir,
        seed=req.seed,
        k=req.k,
        epochs=req.epochs,
        d0_min=req.d0_min,
        d0_max=req.d0_max,
        orders=tuple(req.orders),
        filter_kind=req.filter_kind,
        channel_wise=req.channel_wise,
        mask_kind=req.mask,
        grid_cell=req.grid_cell,
        size=tuple(req.size) if req.size else None,
        workers=req.workers,
    )
    start = time.perf_counter()
    records, warnings = pipeline.run(config)
    n_images = len({r["parent"] for r in records})
    return schemas.AugmentResponse(
        manifest=str(Path(req.out_dir) / "manifest.jsonl"),
        records=len(records),
        images=n_images,
        warnings=warnings,
        elapsed_sec=round(time.perf_counter() - start, 4),
    )


def _explicit_spec(req: schemas.FilterRequest, channels: int) -> filters.FilterSpec:
    d0s = list(req.d0)
    if len(d0s) == 1:
        d0s = d0s * channels
    if len(d0s) != channels:
        raise ConfigError(f"got {len(req.d0)} cutoffs for a {channels}-channel image")
    if req.kind == filters.KIND_IDEAL:
        return filters.FilterSpec(req.kind, tuple(filters.IdealParams(d) for d in d0s))
    orders = list(req.orders or [2])
    if len(orders) == 1:
        orders = orders * channels
    if len(orders) != channels:
        raise ConfigError(f"got {len(req.orders)} orders for a {channels}-channel image")
    return filters.FilterSpec(
        req.kind,
        tuple(filters.ButterworthParams(d, n) for d, n in zip(d0s, orders)),
    )


def handle_filter(req: schemas.FilterRequest) -> schemas.FilterResponse:
    img = imgio.load_image(req.image)
    channels = img.shape[2]
    if req.d0 is not None:
        spec = _explicit_spec(req, channels)
    else:
        if req.seed is None:
            raise ConfigError("give either explicit --d0 parameters or a --seed to sample them")
        rng = np.random.default_rng(np.random.SeedSequence((req.seed,)))
        ranges = filters.ParamRanges(req.d0_min, req.d0_max, tuple(req.order_choices))
        spec = filters.sample_filter_spec(rng, channels, ranges, req.kind, req.channel_wise)
    sample = filters.apply_filter(img, spec, Path(req.image).stem)
    sha = imgio.save_png(req.out, sample.data)
    return schemas.FilterResponse(
        out=req.out,
        spec=spec.to_dict(),
        prenorm_min=list(sample.prenorm_min),
        prenorm_max=list(sample.prenorm_max),
        degenerate=list(sample.degenerate),
        imag_residue=sample.imag_residue,
        sha256=sha,
    )


def handle_blend(req: schemas.BlendRequest) -> schemas.BlendResponse:
    img = imgio.load_image(req.image)
    h, w, c = img.shape
    rng = np.random.default_rng(np.random.SeedSequence((req.seed,)))
    ranges = filters.ParamRanges(req.d0_min, req.d0_max, tuple(req.orders))
    stem = Path(req.image).stem
    # same draw order as a pipeline view: filter m, filter n, then the mask
    spec_m = filters.sample_filter_spec(rng, c, ranges, req.filter_kind, req.channel_wise)
    spec_n = filters.sample_filter_spec(rng, c, ranges, req.filter_kind, req.channel_wise)
    if req.mask == blending.KIND_CONTINUOUS:
        cx, cy = int(rng.integers(0, w)), int(rng.integers(0, h))
        mask = blending.continuous_mask(h, w, (cx, cy))
    elif req.mask == blending.KIND_PATCH:
        mask = blending.patch_mask(h, w, rng)
    else:
        mask = blending.grid_mask(h, w, req.grid_cell or blending.default_grid_cell(h, w))
    x_m = filters.apply_filter(img, spec_m, stem)
    x_n = filters.apply_filter(img, spec_n, stem)
    blended = blending.blend(x_m, x_n, mask)
    sha = imgio.save_png(req.out, blended.data)
    return schemas.BlendResponse(
        out=req.out,
        filter_m=spec_m.to_dict(),
        filter_n=spec_n.to_dict(),
        mask_kind=mask.kind,
        mask_params=mask.params,
        sha256=sha,
    )


def handle_saliency(req: schemas.SaliencyRequest) -> schemas.SaliencyResponse:
    img = imgio.load_image(req.image)
    h, w = img.shape[:2]
    if req.radius is not None:
        kernel = saliency.GaussianKernel(req.radius, req.sigma or req.radius / 3.0)
    else:
        kernel = saliency.default_kernel_for(h, w)
    psi = saliency.structure_saliency(img, kernel)
    imgio.save_npy(req.out, psi)
    if req.preview_out:
        imgio.save_png(req.preview_out, saliency.to_preview(psi))
    return schemas.SaliencyResponse(
        out=req.out,
        radius=kernel.radius,
        sigma=kernel.sigma,
        value_min=float(psi.min()),
        value_max=float(psi.max()),
        preview_out=req.preview_out,
    )


def _load_mask_file(path: str) -> np.ndarray:
    if path.lower().endswith(".npy"):
        return imgio.load_npy(path) > 0.5
    return imgio.load_label(path) > 0


def _coerce_seg_inputs(probs: np.ndarray, labels: np.ndarray):
    """Normalize tensor layouts for the segmentation loss.

    A single-channel probability map is expanded to (background, foreground);
    labels may be one-hot, a single foreground-indicator channel, or an
    integer category map (expanded to the prediction's class count).
    """
    if probs.shape[-1] == 1:
        probs = losses.expand_binary_probs(probs[..., 0])
    c_cat = probs.shape[-1]
    if labels.ndim >= 2 and labels.shape[-1] == c_cat:
        pass  # already one-hot over the same classes
    elif labels.ndim >= 2 and labels.shape[-1] == 1 and c_cat == 2:
        labels = np.concatenate([1.0 - labels, labels], axis=-1)
    else:
        cats = np.rint(labels).astype(np.int64)
        if cats.min() < 0 or cats.max() >= c_cat:
            raise DataError(
                f"label categories span [{cats.min()}, {cats.max()}], "
                f"predictions have {c_cat} classes"
            )
        labels = np.eye(c_cat)[cats]
    return probs, labels


def handle_losses(req: schemas.LossesRequest) -> schemas.LossesResponse:
    out = schemas.LossesResponse(alpha=req.alpha)
    if (req.pred_saliency is None) != (req.target_saliency is None):
        raise ConfigError("self-supervision loss needs both prediction and target tensors")
    if (req.pred_seg is None) != (req.labels is None):
        raise ConfigError("segmentation loss needs both probabilities and labels")
    if (req.pred_mask is None) != (req.true_mask is None):
        raise ConfigError("overlap metrics need both masks")
    computed_any = False
    if req.pred_saliency:
        preds = imgio.load_npy(req.pred_saliency)
        target = imgio.load_npy(req.target_saliency)
        if preds.shape == target.shape:
            preds = preds[None, ...]
        out.loss_self = losses.loss_self(preds, target)
        computed_any = True
    if req.pred_seg:
        probs, labels = _coerce_seg_inputs(
            imgio.load_npy(req.pred_seg).astype(np.float64),
            imgio.load_npy(req.labels).astype(np.float64),
        )
        out.loss_seg = losses.loss_seg(probs, labels)
        computed_any = True
    if out.loss_self is not None and out.loss_seg is not None:
        out.loss_total = losses.loss_total(out.loss_self, out.loss_seg, req.alpha)
    if req.pred_mask:
        dice, iou = losses.dice_and_iou(_load_mask_file(req.pred_mask), _load_mask_file(req.true_mask))
        out.dice = dice
        out.iou = iou
        computed_any = True
    if not computed_any:
        raise ConfigError("no tensor pairs given; nothing to evaluate")
    return out


def handle_preview(req: schemas.PreviewRequest) -> schemas.PreviewResponse:
    report = pipeline.preview(req.manifest, req.n, req.out)
    return schemas.PreviewResponse(
        out=report["out"],
        rows=report["rows"],
        tiles_per_row=report["tiles_per_row"],
        tile_size=report["tile_size"],
    )


def handle_bench(req: schemas.BenchRequest) -> schemas.BenchResponse:
    report = pipeline.bench(
        n_images=req.n_images,
        size=tuple(req.size),
        k=req.k,
        repetitions=req.repetitions,
        workers=req.workers,
        seed=req.seed,
    )
    return schemas.BenchResponse(**report)


def handle_replay(req: schemas.ReplayRequest) -> schemas.ReplayResponse:
    records = pipeline.read_manifest(req.manifest)
    if req.index is not None:
        if not 0 <= req.index < len(records):
            raise DataError(f"record index {req.index} outside manifest of {len(records)}")
        record = records[req.index]
    elif req.parent is not None:
        matches = [
            r
            for r in records
            if r["parent"] == req.parent and r["epoch"] == req.epoch and r["view"] == req.view
        ]
        if not matches:
            raise DataError(f"no record for parent={req.parent} epoch={req.epoch} view={req.view}")
        record = matches[0]
    else:
        raise ConfigError("select a record by --index or by --parent/--epoch/--view")
    return schemas.ReplayResponse(**pipeline.replay_record(record))


def create_app() -> FastAPI:
    app = FastAPI(title="freqaug service", version=__version__)

    def _error(status: int, kind: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": {"kind": kind, "message": message}})

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return _error(400, "config", str(exc))

    @app.exception_handler(DataError)
    async def _data_error(request: Request, exc: DataError):
        return _error(422, "data", str(exc))

    @app.exception_handler(OSError)
    async def _io_error(request: Request, exc: OSError):
        return _error(500, "io", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "config", str(exc))

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    app.post("/augment", response_model=schemas.AugmentResponse)(handle_augment)
    app.post("/filter", response_model=schemas.FilterResponse)(handle_filter)
    app.post("/blend", response_model=schemas.BlendResponse)(handle_blend)
    app.post("/saliency", response_model=schemas.SaliencyResponse)(handle_saliency)
    app.post("/losses", response_model=schemas.LossesResponse)(handle_losses)
    app.post("/preview", response_model=schemas.PreviewResponse)(handle_preview)
    app.post("/bench", response_model=schemas.BenchResponse)(handle_bench)
    app.post("/replay", response_model=schemas.ReplayResponse)(handle_replay)
    return app
