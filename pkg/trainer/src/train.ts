/**
 * Training loop: batches of augmented views against the shared pretext
 * target and label of their parent image, optimized with Adam under the
 * flat-then-linear-decay schedule, early-stopped on validation loss over a
 * 1:1 train/validation split. Per-step losses stream to metrics.jsonl.
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import { Sample, loadRunDir, splitByParent } from "./data";
import { installFastConv } from "./fastconv";
import { lossSeg, lossSelf, lossTotal } from "./losses";
import { CouplingNet, NetConfig } from "./model";
import { Adam, scheduledLr } from "./optim";
import { mulberry32, randInt } from "./rng";
import { readNpy, writeNpy } from "./npy";

export interface TrainConfig {
  dataDir: string;
  outDir: string;
  levels: number;
  baseWidth: number;
  attention: boolean;
  alpha: number;
  lr: number;
  steps: number;
  batchSize: number;
  seed: number;
  /** evaluate validation loss every N steps */
  valEvery: number;
  /** stop after this many evaluations without improvement; 0 disables */
  earlyStopPatience: number;
}

export const DEFAULT_TRAIN: Omit<TrainConfig, "dataDir" | "outDir"> = {
  levels: 2,
  baseWidth: 8,
  attention: true,
  alpha: 1.0,
  lr: 1e-3,
  steps: 200,
  batchSize: 2,
  seed: 0,
  valEvery: 20,
  earlyStopPatience: 0,
};

export interface TrainResult {
  stepsRun: number;
  firstLoss: number;
  finalLoss: number;
  bestValLoss: number | null;
  checkpointDir: string;
  metricsPath: string;
}

function toBatch(samples: Sample[], indices: number[]) {
  const n = indices.length;
  const { height, width } = samples[indices[0]].image;
  const x = new Float32Array(n * height * width * 3);
  const psi = new Float32Array(n * height * width * 3);
  const y = new Float32Array(n * height * width);
  indices.forEach((idx, i) => {
    x.set(samples[idx].image.data, i * height * width * 3);
    psi.set(samples[idx].psi.data, i * height * width * 3);
    y.set(samples[idx].mask, i * height * width);
  });
  return {
    x: tf.tensor4d(x, [n, height, width, 3]),
    psi: tf.tensor4d(psi, [n, height, width, 3]),
    y: tf.tensor4d(y, [n, height, width, 1]),
  };
}

function batchLosses(net: CouplingNet, batch: { x: tf.Tensor4D; psi: tf.Tensor4D; y: tf.Tensor4D }, alpha: number) {
  const out = net.forward(batch.x);
  const sel = lossSelf(out.saliency, batch.psi);
  const seg = lossSeg(out.segProbs, batch.y);
  return { sel, seg, total: lossTotal(sel, seg, alpha) };
}

function valLoss(net: CouplingNet, samples: Sample[], alpha: number): number {
  return tf.tidy(() => {
    const batch = toBatch(samples, samples.map((_, i) => i));
    return batchLosses(net, batch, alpha).total.dataSync()[0];
  });
}

export function saveCheckpoint(net: CouplingNet, dir: string): void {
  fs.mkdirSync(dir, { recursive: true });
  const index: Record<string, { file: string; shape: number[] }> = {};
  for (const [name, variable] of net.params) {
    const file = `${name}.npy`;
    writeNpy(path.join(dir, file), variable.shape.slice(), variable.dataSync() as Float32Array);
    index[name] = { file, shape: variable.shape.slice() };
  }
  fs.writeFileSync(path.join(dir, "config.json"), JSON.stringify({ net: net.cfg, index }, null, 2));
}

export function loadCheckpoint(dir: string): CouplingNet {
  const meta = JSON.parse(fs.readFileSync(path.join(dir, "config.json"), "utf-8"));
  const net = new CouplingNet(meta.net as NetConfig);
  for (const [name, entry] of Object.entries(meta.index as Record<string, { file: string; shape: number[] }>)) {
    const arr = readNpy(path.join(dir, entry.file));
    const variable = net.params.get(name);
    if (!variable) throw new Error(`checkpoint has unknown parameter ${name}`);
    variable.assign(tf.tensor(arr.data, arr.shape));
  }
  return net;
}

export function train(cfg: TrainConfig): TrainResult {
  installFastConv();
  const samples = loadRunDir(cfg.dataDir);
  const { train: trainSamples, val: valSamples } = splitByParent(samples);
  if (trainSamples.length === 0 || valSamples.length === 0) {
    throw new Error("both train and validation splits need at least one parent image");
  }

  const net = new CouplingNet({
    levels: cfg.levels,
    baseWidth: cfg.baseWidth,
    attention: cfg.attention,
    seed: cfg.seed,
    inChannels: 3,
  });
  const optimizer = new Adam({ lr: cfg.lr });
  const rng = mulberry32(cfg.seed * 31 + 17);

  fs.mkdirSync(cfg.outDir, { recursive: true });
  const metricsPath = path.join(cfg.outDir, "metrics.jsonl");
  fs.writeFileSync(metricsPath, "");
  // synchronous appends: the training loop blocks the event loop, so an
  // async stream would not flush until the very end
  const log = (record: object) => fs.appendFileSync(metricsPath, JSON.stringify(record) + "\n");

  let firstLoss = Number.NaN;
  let finalLoss = Number.NaN;
  let bestVal = Number.POSITIVE_INFINITY;
  let evalsSinceBest = 0;
  let stepsRun = 0;

  for (let step = 0; step < cfg.steps; step++) {
    const lr = scheduledLr(cfg.lr, step, cfg.steps);
    const indices = Array.from({ length: cfg.batchSize }, () => randInt(rng, 0, trainSamples.length));
    const batch = toBatch(trainSamples, indices);
    let selValue = 0;
    let segValue = 0;
    const totalValue = optimizer.step(
      () =>
        tf.tidy(() => {
          const { sel, seg, total } = batchLosses(net, batch, cfg.alpha);
          selValue = sel.dataSync()[0];
          segValue = seg.dataSync()[0];
          return total;
        }),
      net.variables(),
      lr
    );
    batch.x.dispose();
    batch.psi.dispose();
    batch.y.dispose();

    if (step === 0) firstLoss = totalValue;
    finalLoss = totalValue;
    stepsRun = step + 1;
    log({ step, lr, loss_sel: selValue, loss_seg: segValue, loss_total: totalValue });

    if ((step + 1) % cfg.valEvery === 0) {
      const vl = valLoss(net, valSamples, cfg.alpha);
      log({ step, val_loss: vl });
      if (vl < bestVal - 1e-6) {
        bestVal = vl;
        evalsSinceBest = 0;
      } else {
        evalsSinceBest += 1;
        if (cfg.earlyStopPatience > 0 && evalsSinceBest >= cfg.earlyStopPatience) {
          log({ step, early_stop: true });
          break;
        }
      }
    }
  }
  const checkpointDir = path.join(cfg.outDir, "checkpoint");
  saveCheckpoint(net, checkpointDir);
  optimizer.dispose();
  net.dispose();
  return {
    stepsRun,
    firstLoss,
    finalLoss,
    bestValLoss: Number.isFinite(bestVal) ? bestVal : null,
    checkpointDir,
    metricsPath,
  };
}
