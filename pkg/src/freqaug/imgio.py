"""Image and tensor file handling.

Images come in as PNG/BMP/PPM/PGM, 8- or 16-bit, and are decoded to float64
arrays in [0, 1] of shape (H, W, C) with C in {1, 3}. Augmented images go out
as 8-bit PNG. Saliency targets travel as float32 ``.npy`` containers so any
consumer with an NPY reader can use them. Labels are integer category maps.
"""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataError

IMAGE_SUFFIXES = (".png", ".bmp", ".ppm", ".pgm")

_16BIT_MODES = ("I;16", "I;16B", "I;16L", "I")


def load_image(path) -> np.ndarray:
    """Decode to (H, W, C) float64 in [0, 1]; 255 -> 1.0, 65535 -> 1.0."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in _16BIT_MODES:
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            elif mode == "L":
                arr = np.asarray(im, dtype=np.float64) / 255.0
            elif mode == "RGB":
                arr = np.asarray(im, dtype=np.float64) / 255.0
            else:
                converted = im.convert("RGB")
                arr = np.asarray(converted, dtype=np.float64) / 255.0
    except (OSError, SyntaxError, ValueError) as exc:
        raise DataError(f"cannot decode image {path}: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return np.clip(arr, 0.0, 1.0)


def load_label(path) -> np.ndarray:
    """Decode an integer category map of shape (H, W)."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("L", "P", "I", "I;16"):
                im = im.convert("L")
            arr = np.asarray(im)
    except (OSError, SyntaxError, ValueError) as exc:
        raise DataError(f"cannot decode label {path}: {exc}") from exc
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    return arr.astype(np.int64)


def encode_png(img01: np.ndarray) -> bytes:
    """Quantize a unit-interval array to 8-bit PNG bytes.

    A fixed low compression level keeps encoding deterministic and cheap;
    these are bulk training artifacts, not archival images.
    """
    arr = np.asarray(img01, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    quantized = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    mode = "L" if quantized.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(quantized, mode=mode).save(buf, format="PNG", compress_level=1)
    return buf.getvalue()


def save_png(path, img01: np.ndarray) -> str:
    data = encode_png(img01)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def save_label_png(path, label: np.ndarray) -> None:
    arr = np.asarray(label)
    if arr.min() < 0 or arr.max() > 255:
        raise DataError("label values must fit 8-bit PNG output")
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path, format="PNG")


def save_npy(path, arr: np.ndarray) -> None:
    np.save(path, np.asarray(arr, dtype=np.float32))


def load_npy(path) -> np.ndarray:
    try:
        return np.load(path)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read tensor file {path}: {exc}") from exc


def resize_image(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize of a unit-interval (H, W, C) array, channel by channel."""
    if img.shape[0] == height and img.shape[1] == width:
        return img
    channels = []
    for c in range(img.shape[2]):
        chan = Image.fromarray(img[:, :, c].astype(np.float32), mode="F")
        channels.append(np.asarray(chan.resize((width, height), Image.BILINEAR), dtype=np.float64))
    return np.clip(np.stack(channels, axis=-1), 0.0, 1.0)


def resize_label(label: np.ndarray, width: int, height: int) -> np.ndarray:
    """Nearest-neighbor resize of an integer category map."""
    if label.shape[0] == height and label.shape[1] == width:
        return label
    im = Image.fromarray(label.astype(np.int32), mode="I")
    return np.asarray(im.resize((width, height), Image.NEAREST)).astype(np.int64)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
