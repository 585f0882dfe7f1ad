"""Loss evaluators for the coupled training objective, plus overlap metrics.

Pure numpy, no gradients: these are the reference implementations a trainer
cross-checks against. Conventions fixed here once:

  * the self-supervision loss is the per-element mean of squared deviations
    between the shared pretext target and each reconstructed view, so its
    scale does not depend on image size or view count;
  * segmentation cross-entropy averages over views and pixels, with
    probabilities clamped at CLAMP_EPS before the log;
  * the total is self + alpha * segmentation (alpha defaults to 1.0);
  * dice/iou of two empty masks is (1, 1).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError

CLAMP_EPS = 1e-7
PROB_TOL = 1e-6
DEFAULT_ALPHA = 1.0


def _as_view_batch(arr, name):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim < 2:
        raise DataError(f"{name} must have at least 2 dimensions, got shape {arr.shape}")
    return arr


def loss_self(preds: np.ndarray, target: np.ndarray) -> float:
    """Mean squared deviation between the pretext target and every view.

    ``preds`` carries K views stacked on axis 0 and must match ``target``'s
    shape after that axis.
    """
    preds = _as_view_batch(preds, "predictions")
    target = np.asarray(target, dtype=np.float64)
    if preds.shape[1:] != target.shape:
        raise DataError(
            f"prediction views {preds.shape[1:]} do not match target {target.shape}"
        )
    if preds.shape[0] < 1:
        raise DataError("need at least one view")
    return float(np.mean((preds - target[None, ...]) ** 2))


def _validate_probabilities(probs):
    if probs.min() < -PROB_TOL or probs.max() > 1.0 + PROB_TOL:
        raise DataError("probabilities leave [0, 1] beyond tolerance")
    sums = probs.sum(axis=-1)
    if np.max(np.abs(sums - 1.0)) > PROB_TOL:
        raise DataError("per-pixel class probabilities must sum to 1")


def _validate_one_hot(labels):
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise DataError("labels must be exactly one-hot")
    if not np.all(labels.sum(axis=-1) == 1.0):
        raise DataError("labels must have exactly one active class per pixel")


def expand_binary_probs(probs: np.ndarray) -> np.ndarray:
    """Expand a single-channel foreground probability map to two classes.

    Channel order is (background, foreground), so a one-hot label built with
    class index 1 = foreground matches.
    """
    probs = np.asarray(probs, dtype=np.float64)
    return np.stack([1.0 - probs, probs], axis=-1)


def loss_seg(pred_probs: np.ndarray, labels_one_hot: np.ndarray) -> float:
    """Cross-entropy averaged over views and pixels.

    ``pred_probs`` is (K, ..., C_cat); ``labels_one_hot`` is either shared
    across views (shape (..., C_cat)) or per view (K, ..., C_cat).
    """
    probs = _as_view_batch(pred_probs, "segmentation predictions")
    labels = np.asarray(labels_one_hot, dtype=np.float64)
    if labels.shape == probs.shape[1:]:
        labels = np.broadcast_to(labels[None, ...], probs.shape)
    elif labels.shape != probs.shape:
        raise DataError(
            f"labels {labels.shape} match neither one view {probs.shape[1:]} "
            f"nor the full batch {probs.shape}"
        )
    _validate_probabilities(probs)
    _validate_one_hot(labels)
    log_probs = np.log(np.clip(probs, CLAMP_EPS, 1.0))
    per_pixel = -(labels * log_probs).sum(axis=-1)
    return float(per_pixel.mean())


def loss_total(l_sel: float, l_seg: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Weighted training objective: self-supervision plus alpha * segmentation."""
    if alpha < 0:
        raise ConfigError(f"alpha must be nonnegative, got {alpha}")
    return float(l_sel + alpha * l_seg)


def dice_and_iou(pred_mask: np.ndarray, true_mask: np.ndarray) -> tuple:
    """Overlap metrics for binary masks; two empty masks score (1, 1)."""
    pred = np.asarray(pred_mask).astype(bool)
    true = np.asarray(true_mask).astype(bool)
    if pred.shape != true.shape:
        raise DataError(f"mask shapes differ: {pred.shape} vs {true.shape}")
    inter = int(np.logical_and(pred, true).sum())
    total = int(pred.sum()) + int(true.sum())
    if total == 0:
        return 1.0, 1.0
    union = total - inter
    dice = 2.0 * inter / total
    iou = inter / union if union else 1.0
    return float(dice), float(iou)
