/**
 * Training losses, matching the augmentation service's reference evaluators:
 * per-element mean of squared deviations for the pretext reconstruction, and
 * cross-entropy with probabilities clamped at 1e-7 for segmentation (the
 * binary sigmoid output is treated as the two-class (background, foreground)
 * distribution, which is what the reference CLI does with single-channel
 * inputs).
 */

import * as tf from "@tensorflow/tfjs";

export const CLAMP_EPS = 1e-7;

export function lossSelf(pred: tf.Tensor, target: tf.Tensor): tf.Scalar {
  return tf.mean(tf.square(tf.sub(pred, target))) as tf.Scalar;
}

export function lossSeg(probs: tf.Tensor, labels: tf.Tensor): tf.Scalar {
  const fg = tf.log(tf.clipByValue(probs, CLAMP_EPS, 1.0));
  const bg = tf.log(tf.clipByValue(tf.sub(1, probs), CLAMP_EPS, 1.0));
  const perPixel = tf.neg(tf.add(tf.mul(labels, fg), tf.mul(tf.sub(1, labels), bg)));
  return tf.mean(perPixel) as tf.Scalar;
}

/** Multi-class cross-entropy over one-hot labels, clamped like the binary path. */
export function lossSegMulti(probs: tf.Tensor, oneHot: tf.Tensor): tf.Scalar {
  const logs = tf.log(tf.clipByValue(probs, CLAMP_EPS, 1.0));
  const perPixel = tf.neg(tf.sum(tf.mul(oneHot, logs), -1));
  return tf.mean(perPixel) as tf.Scalar;
}

export function lossTotal(sel: tf.Scalar, seg: tf.Scalar, alpha: number): tf.Scalar {
  if (alpha < 0) throw new Error(`alpha must be nonnegative, got ${alpha}`);
  return tf.add(sel, tf.mul(seg, alpha)) as tf.Scalar;
}

/**
 * Double-precision evaluators over plain arrays; these are the trainer's
 * canonical loss accounting (the tf versions above are their float32
 * training-graph counterparts) and are what the cross-implementation oracle
 * check certifies.
 */
export function lossSelfValue(pred: ArrayLike<number>, target: ArrayLike<number>): number {
  if (pred.length % target.length !== 0) {
    throw new Error(`prediction length ${pred.length} is not a multiple of target ${target.length}`);
  }
  let acc = 0;
  for (let i = 0; i < pred.length; i++) {
    const d = pred[i] - target[i % target.length];
    acc += d * d;
  }
  return acc / pred.length;
}

export function lossSegValue(probs: ArrayLike<number>, labels: ArrayLike<number>): number {
  if (probs.length % labels.length !== 0) {
    throw new Error(`probability length ${probs.length} is not a multiple of labels ${labels.length}`);
  }
  let acc = 0;
  for (let i = 0; i < probs.length; i++) {
    const p = probs[i];
    const y = labels[i % labels.length];
    acc -= y * Math.log(Math.max(Math.min(p, 1), CLAMP_EPS));
    acc -= (1 - y) * Math.log(Math.max(Math.min(1 - p, 1), CLAMP_EPS));
  }
  return acc / probs.length;
}

export function lossTotalValue(sel: number, seg: number, alpha: number): number {
  if (alpha < 0) throw new Error(`alpha must be nonnegative, got ${alpha}`);
  return sel + alpha * seg;
}

export interface Overlap {
  dice: number;
  iou: number;
}

/** Same conventions as the reference implementation: both empty scores (1, 1). */
export function diceIou(pred: ArrayLike<number>, truth: ArrayLike<number>): Overlap {
  if (pred.length !== truth.length) {
    throw new Error(`mask sizes differ: ${pred.length} vs ${truth.length}`);
  }
  let inter = 0;
  let a = 0;
  let b = 0;
  for (let i = 0; i < pred.length; i++) {
    const p = pred[i] > 0.5 ? 1 : 0;
    const t = truth[i] > 0.5 ? 1 : 0;
    inter += p & t;
    a += p;
    b += t;
  }
  if (a + b === 0) return { dice: 1, iou: 1 };
  const union = a + b - inter;
  return { dice: (2 * inter) / (a + b), iou: union === 0 ? 1 : inter / union };
}
