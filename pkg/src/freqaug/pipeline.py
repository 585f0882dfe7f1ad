"""End-to-end augmentation orchestration and its provenance trail.

Each source image gets K augmented views per epoch: every view blends two
freshly sampled filtered variants of that image under a sampled mask, and the
shared pretext target psi(original) is written once per image. Every view is
described by one manifest record carrying all sampled parameters, so any
record can be replayed bitwise later.

Randomness contract: one substream per (master seed, epoch, image index),
consumed in a fixed order per view (filter m, filter n, then mask draws).
Worker count therefore never changes outputs; the manifest is written sorted
by (image index, view index).
"""

from __future__ import annotations

import hashlib
import json
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import blending, filters, fourier, imgio, saliency
from .errors import ConfigError, DataError

MASK_KINDS = (blending.KIND_CONTINUOUS, blending.KIND_PATCH, blending.KIND_GRID)
IMAGE_SUFFIXES_SET = set(imgio.IMAGE_SUFFIXES)


@dataclass(frozen=True)
class RunConfig:
    """Everything an augmentation run needs; defaults follow the training
    recipe the engine was designed around (512x512 inputs, ten views)."""

    input_dir: str
    out_dir: str
    label_dir: str | None = None
    seed: int = 0
    k: int = 10
    epochs: int = 1
    d0_min: float = 0.005
    d0_max: float = filters.D0_FRACTION_MAX
    orders: tuple = filters.ORDER_CHOICES
    filter_kind: str = filters.KIND_BUTTERWORTH
    channel_wise: bool = True
    mask_kind: str = blending.KIND_CONTINUOUS
    grid_cell: int | None = None
    patch_area: tuple = blending.PATCH_AREA_RATIO_RANGE
    size: tuple | None = (512, 512)  # (width, height); None keeps native size
    kernel_radius: int | None = None  # None -> size-proportional rule
    kernel_sigma: float | None = None
    alpha: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.mask_kind not in MASK_KINDS:
            raise ConfigError(f"mask kind must be one of {MASK_KINDS}, got {self.mask_kind!r}")
        if self.size is not None and (self.size[0] < 8 or self.size[1] < 8):
            raise ConfigError(f"target size must be at least 8x8, got {self.size}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be nonnegative, got {self.alpha}")
        self.param_ranges()  # validates d0 bounds and orders

    def param_ranges(self) -> filters.ParamRanges:
        return filters.ParamRanges(self.d0_min, self.d0_max, tuple(self.orders))


@dataclass
class IngestedPair:
    stem: str
    image_path: str
    image: np.ndarray  # (H, W, C) float64 in [0, 1], already resized
    label_path: str | None = None
    label: np.ndarray | None = None  # (H, W) int


def ingest(input_dir, label_dir=None, size=None):
    """Decode a dataset directory into (image, optional label) pairs.

    Returns (pairs, warnings). Unreadable files are skipped with a warning;
    an image/label size mismatch is a hard error for that pair.
    """
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise DataError(f"input directory {input_dir} does not exist")
    label_dir = Path(label_dir) if label_dir else None
    if label_dir and not label_dir.is_dir():
        raise DataError(f"label directory {label_dir} does not exist")

    warnings: list[str] = []
    pairs: list[IngestedPair] = []
    files = sorted(
        (p for p in input_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES_SET),
        key=lambda p: p.stem,
    )
    if not files:
        warnings.append(f"no supported images found in {input_dir}")

    for path in files:
        try:
            img = imgio.load_image(path)
        except DataError as exc:
            warnings.append(f"skipped {path.name}: {exc}")
            continue
        label = None
        label_path = None
        if label_dir:
            label_path = _find_label(label_dir, path.stem)
            if label_path is None:
                warnings.append(f"no label found for {path.stem}")
            else:
                label = imgio.load_label(label_path)
                if label.shape != img.shape[:2]:
                    raise DataError(
                        f"label/image size mismatch for {path.stem}: "
                        f"{label.shape} vs {img.shape[:2]}"
                    )
        if size is not None:
            w, h = size
            img = imgio.resize_image(img, w, h)
            if label is not None:
                label = imgio.resize_label(label, w, h)
        pairs.append(
            IngestedPair(
                stem=path.stem,
                image_path=str(path),
                image=img,
                label_path=str(label_path) if label_path else None,
                label=label,
            )
        )
    return pairs, warnings


def _find_label(label_dir: Path, stem: str):
    for suffix in imgio.IMAGE_SUFFIXES:
        cand = label_dir / f"{stem}{suffix}"
        if cand.exists():
            return cand
    return None


def _image_rng(seed: int, epoch: int, image_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, epoch, image_index)))


def _sample_mask(rng, height, width, config: RunConfig) -> blending.BlendMask:
    if config.mask_kind == blending.KIND_CONTINUOUS:
        cx = int(rng.integers(0, width))
        cy = int(rng.integers(0, height))
        return blending.continuous_mask(height, width, (cx, cy))
    if config.mask_kind == blending.KIND_PATCH:
        return blending.patch_mask(height, width, rng, tuple(config.patch_area))
    cell = config.grid_cell or blending.default_grid_cell(height, width)
    return blending.grid_mask(height, width, cell)


def mask_from_params(kind: str, params: dict, height: int, width: int) -> blending.BlendMask:
    """Rebuild a mask from recorded parameters (replay path, no RNG)."""
    if kind == blending.KIND_CONTINUOUS:
        cx, cy = params["center"]
        return blending.continuous_mask(height, width, (cx, cy))
    if kind == blending.KIND_PATCH:
        data = np.zeros((height, width))
        t, l = params["top"], params["left"]
        data[t : t + params["patch_height"], l : l + params["patch_width"]] = 1.0
        return blending.BlendMask(data, kind, dict(params))
    if kind == blending.KIND_GRID:
        return blending.grid_mask(height, width, params["cell"])
    raise ConfigError(f"unknown mask kind {kind!r}")


def _kernel_for(config: RunConfig, height: int, width: int) -> saliency.GaussianKernel:
    if config.kernel_radius is not None:
        sigma = config.kernel_sigma or config.kernel_radius / 3.0
        return saliency.GaussianKernel(config.kernel_radius, sigma)
    return saliency.default_kernel_for(height, width)


def _render_view(image, spec_m_dict, spec_n_dict, mask_kind, mask_params):
    """Deterministic core of one view: filters + blend from explicit params."""
    h, w = image.shape[:2]
    spec_m = filters.FilterSpec.from_dict(spec_m_dict)
    spec_n = filters.FilterSpec.from_dict(spec_n_dict)
    x_m = filters.apply_filter(image, spec_m, "view")
    x_n = filters.apply_filter(image, spec_n, "view")
    mask = mask_from_params(mask_kind, mask_params, h, w)
    return blending.blend(x_m, x_n, mask), x_m, x_n, mask


def _augment_one_image(index, pair: IngestedPair, config: RunConfig, epoch: int, out_dir: Path):
    rng = _image_rng(config.seed, epoch, index)
    h, w = pair.image.shape[:2]
    c = pair.image.shape[2]
    ranges = config.param_ranges()
    kernel = _kernel_for(config, h, w)
    spectrum = fourier.dft2(pair.image)  # shared by all 2K filtered variants

    records = []
    for k in range(config.k):
        spec_m = filters.sample_filter_spec(
            rng, c, ranges, config.filter_kind, config.channel_wise
        )
        spec_n = filters.sample_filter_spec(
            rng, c, ranges, config.filter_kind, config.channel_wise
        )
        mask = _sample_mask(rng, h, w, config)
        x_m = filters.apply_filter(pair.image, spec_m, pair.stem, spectrum=spectrum)
        x_n = filters.apply_filter(pair.image, spec_n, pair.stem, spectrum=spectrum)
        blended = blending.blend(x_m, x_n, mask)

        image_rel = f"images/{pair.stem}__e{epoch:03d}_k{k:02d}.png"
        digest = imgio.save_png(out_dir / image_rel, blended.data)
        records.append(
            {
                "parent": pair.stem,
                "source": pair.image_path,
                "epoch": epoch,
                "view": k,
                "size": [w, h],
                "filter_m": spec_m.to_dict(),
                "filter_n": spec_n.to_dict(),
                "mask": {"kind": mask.kind, "params": mask.params},
                "kernel": {"radius": kernel.radius, "sigma": kernel.sigma},
                "rng": {"seed": config.seed, "epoch": epoch, "image_index": index},
                "image": image_rel,
                "saliency": f"targets/{pair.stem}.npy",
                "label": f"labels/{pair.stem}.png" if pair.label is not None else None,
                "sha256": digest,
            }
        )

    psi = saliency.structure_saliency(pair.image, kernel)
    imgio.save_npy(out_dir / "targets" / f"{pair.stem}.npy", psi)
    if pair.label is not None:
        imgio.save_label_png(out_dir / "labels" / f"{pair.stem}.png", pair.label)
    return index, records


def augment_epoch(pairs, config: RunConfig, epoch: int = 0):
    """Produce K views per source image plus targets, labels, and manifest.

    Returns the list of manifest records (dicts) in (image, view) order.
    Appends to ``manifest.jsonl`` so multi-epoch runs accumulate one file.
    """
    out_dir = Path(config.out_dir)
    for sub in ("images", "targets", "labels"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    if config.workers == 1:
        results = [
            _augment_one_image(i, pair, config, epoch, out_dir)
            for i, pair in enumerate(pairs)
        ]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_augment_one_image, i, pair, config, epoch, out_dir)
                for i, pair in enumerate(pairs)
            ]
            results = [f.result() for f in futures]

    results.sort(key=lambda item: item[0])
    records = [rec for _, recs in results for rec in recs]
    with open(out_dir / "manifest.jsonl", "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return records


def run(config: RunConfig):
    """Full run over all epochs; returns (records, warnings)."""
    pairs, warnings = ingest(config.input_dir, config.label_dir, config.size)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.jsonl"
    if manifest.exists():
        manifest.unlink()
    all_records = []
    for epoch in range(config.epochs):
        all_records.extend(augment_epoch(pairs, config, epoch))
    return all_records, warnings


def read_manifest(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest {path} does not exist")
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _load_record_source(record) -> np.ndarray:
    img = imgio.load_image(record["source"])
    w, h = record["size"]
    return imgio.resize_image(img, w, h)


def replay_record(record) -> dict:
    """Recompute one view from its recorded parameters and hash the result."""
    image = _load_record_source(record)
    blended, _, _, _ = _render_view(
        image,
        record["filter_m"],
        record["filter_n"],
        record["mask"]["kind"],
        record["mask"]["params"],
    )
    data = imgio.encode_png(blended.data)
    actual = hashlib.sha256(data).hexdigest()
    return {
        "parent": record["parent"],
        "epoch": record["epoch"],
        "view": record["view"],
        "expected_sha256": record["sha256"],
        "actual_sha256": actual,
        "match": actual == record["sha256"],
    }


def _to_rgb(tile: np.ndarray) -> np.ndarray:
    if tile.ndim == 2:
        tile = tile[:, :, None]
    if tile.shape[2] == 1:
        tile = np.repeat(tile, 3, axis=2)
    return tile


def preview(manifest_path, n, out_path) -> dict:
    """Montage of the first n records; tile order per row:
    original, filtered m, filtered n, mask, blended, saliency preview."""
    records = read_manifest(manifest_path)
    if not records:
        raise DataError("manifest holds no records")
    if n > len(records):
        n = len(records)
    rows = []
    for record in records[:n]:
        image = _load_record_source(record)
        blended, x_m, x_n, mask = _render_view(
            image,
            record["filter_m"],
            record["filter_n"],
            record["mask"]["kind"],
            record["mask"]["params"],
        )
        kernel = saliency.GaussianKernel(record["kernel"]["radius"], record["kernel"]["sigma"])
        psi = saliency.structure_saliency(image, kernel)
        tiles = [image, x_m.data, x_n.data, mask.data, blended.data, saliency.to_preview(psi)]
        rows.append(np.concatenate([_to_rgb(t) for t in tiles], axis=1))
    montage = np.concatenate(rows, axis=0)
    imgio.save_png(out_path, montage)
    h, w = records[0]["size"][1], records[0]["size"][0]
    return {"out": str(out_path), "rows": n, "tiles_per_row": 6, "tile_size": [w, h]}


def _bench_image(seed: int, height: int, width: int) -> np.ndarray:
    """Smooth synthetic photo stand-in: low-frequency cosines plus noise."""
    gen = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for _ in range(4):
        fy, fx = gen.uniform(0.5, 3.0, 2)
        phase = gen.uniform(0, 2 * np.pi)
        wave = np.cos(2 * np.pi * (fy * yy / height + fx * xx / width) + phase)
        img += wave[:, :, None] * gen.uniform(0.05, 0.2, 3)
    img += gen.normal(0, 0.02, img.shape)
    img = (img - img.min()) / (img.max() - img.min())
    return img


def bench(n_images, size, k, repetitions, workers, seed=0) -> dict:
    """Measure augmentation throughput, single- versus multi-worker."""
    if n_images < 1:
        raise ConfigError(f"n_images must be >= 1, got {n_images}")
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")
    w, h = size
    multi = max(2, workers)

    with tempfile.TemporaryDirectory(prefix="freqaug-bench-") as tmp:
        src = Path(tmp) / "src"
        src.mkdir()
        for i in range(n_images):
            imgio.save_png(src / f"bench_{i:03d}.png", _bench_image(seed + i, h, w))

        def run_once(worker_count, rep) -> float:
            out = Path(tmp) / f"out_w{worker_count}_r{rep}"
            config = RunConfig(
                input_dir=str(src),
                out_dir=str(out),
                seed=seed,
                k=k,
                size=(w, h),
                workers=worker_count,
            )
            start = time.perf_counter()
            run(config)
            return time.perf_counter() - start

        # warm-up pass keeps one-time import/plan costs out of the samples
        run_once(1, "warmup")
        singles = [run_once(1, r) for r in range(repetitions)]
        multis = [run_once(multi, r) for r in range(repetitions)]

    def summarize(times):
        arr = np.asarray(times)
        med = float(np.median(arr))
        return {
            "wall_seconds": [round(t, 4) for t in times],
            "p50": round(float(np.percentile(arr, 50)), 4),
            "p90": round(float(np.percentile(arr, 90)), 4),
            "p100": round(float(arr.max()), 4),
            "images_per_sec": round(n_images / med, 3),
            "views_per_sec": round(n_images * k / med, 3),
        }

    single_stats = summarize(singles)
    multi_stats = summarize(multis)
    return {
        "n_images": n_images,
        "k": k,
        "size": [w, h],
        "repetitions": repetitions,
        "multi_workers": multi,
        "single": single_stats,
        "multi": multi_stats,
        "scaling_factor": round(
            multi_stats["images_per_sec"] / single_stats["images_per_sec"], 3
        ),
    }
