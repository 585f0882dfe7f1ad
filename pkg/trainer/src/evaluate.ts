/**
 * Inference-side evaluation: original (un-augmented) images in, thresholded
 * masks out, overlap metrics per the reference dice/iou convention. Optional
 * tensor export feeds the cross-implementation oracle check.
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import { diceIou } from "./losses";
import { installFastConv } from "./fastconv";
import { CouplingNet } from "./model";
import { writeNpy } from "./npy";
import { readMask, readPng } from "./png";

export interface EvalResult {
  perImage: { stem: string; dice: number; iou: number }[];
  meanDice: number;
  meanIou: number;
}

export function evaluate(
  net: CouplingNet,
  imagesDir: string,
  labelsDir: string,
  exportDir?: string
): EvalResult {
  installFastConv();
  const stems = fs
    .readdirSync(imagesDir)
    .filter((f) => f.endsWith(".png"))
    .map((f) => f.replace(/\.png$/, ""))
    .sort();
  if (stems.length === 0) throw new Error(`no images in ${imagesDir}`);
  if (exportDir) fs.mkdirSync(exportDir, { recursive: true });

  const perImage = stems.map((stem) => {
    const img = readPng(path.join(imagesDir, `${stem}.png`));
    const truth = readMask(path.join(labelsDir, `${stem}.png`));
    const probs = tf.tidy(() => {
      const x = tf.tensor4d(img.data, [1, img.height, img.width, 3]);
      return net.forward(x).segProbs.dataSync() as Float32Array;
    });
    const pred = Float32Array.from(probs, (p) => (p > 0.5 ? 1 : 0));
    if (exportDir) {
      writeNpy(path.join(exportDir, `${stem}_pred.npy`), [img.height, img.width], pred);
      writeNpy(path.join(exportDir, `${stem}_true.npy`), [img.height, img.width], truth);
    }
    const { dice, iou } = diceIou(pred, truth);
    return { stem, dice, iou };
  });

  return {
    perImage,
    meanDice: perImage.reduce((a, r) => a + r.dice, 0) / perImage.length,
    meanIou: perImage.reduce((a, r) => a + r.iou, 0) / perImage.length,
  };
}
