import { execFileSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import { installFastConv } from "../src/fastconv";
import { lossSegMulti } from "../src/losses";
import { CouplingNet } from "../src/model";
import { writeNpy } from "../src/npy";

installFastConv();

describe("multi-class segmentation path", () => {
  it("softmax head emits per-class probabilities summing to one", () => {
    const net = new CouplingNet({ levels: 2, baseWidth: 4, seed: 5, numClasses: 4 });
    const x = tf.randomUniform([1, 16, 16, 3], 0, 1, "float32", 8) as tf.Tensor4D;
    tf.tidy(() => {
      const out = net.forward(x);
      expect(out.segProbs.shape).toEqual([1, 16, 16, 4]);
      const sums = tf.sum(out.segProbs, 3).dataSync();
      for (const s of sums) expect(Math.abs(s - 1)).toBeLessThan(1e-5);
      return null;
    });
    x.dispose();
    net.dispose();
  });

  it("zero-initialized head scores ln C on uniform predictions", () => {
    const c = 3;
    const net = new CouplingNet({ levels: 2, baseWidth: 4, seed: 6, numClasses: c, zeroFinal: true });
    const x = tf.randomUniform([1, 16, 16, 3], 0, 1, "float32", 9) as tf.Tensor4D;
    const oneHot = tf.tidy(() =>
      tf.oneHot(tf.randomUniform([1, 16, 16], 0, c, "int32", 10), c).toFloat()
    );
    const value = tf.tidy(() => lossSegMulti(net.forward(x).segProbs, oneHot).dataSync()[0]);
    expect(Math.abs(value - Math.log(c))).toBeLessThan(1e-3);
    x.dispose();
    oneHot.dispose();
    net.dispose();
  });

  it("matches the reference CLI on exported tensors", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "multiclass-"));
    const c = 3;
    const h = 6;
    const w = 5;
    const logits = tf.randomNormal([2, h, w, c], 0, 1, "float32", 11);
    const probs = tf.softmax(logits, 3);
    const cats = tf.randomUniform([h, w], 0, c, "int32", 12);
    const oneHot = tf.oneHot(cats, c).toFloat();

    writeNpy(path.join(dir, "probs.npy"), [2, h, w, c], probs.dataSync() as Float32Array);
    writeNpy(path.join(dir, "labels.npy"), [h, w], Float32Array.from(cats.dataSync()));

    const stdout = execFileSync(
      "freqaug",
      ["losses", "--pred-seg", path.join(dir, "probs.npy"), "--labels", path.join(dir, "labels.npy")],
      { encoding: "utf-8" }
    );
    const reference = JSON.parse(stdout);
    const here = tf.tidy(() => lossSegMulti(probs, tf.expandDims(oneHot, 0)).dataSync()[0]);
    expect(Math.abs(here - reference.loss_seg)).toBeLessThan(1e-5);

    [logits, probs, cats, oneHot].forEach((t) => t.dispose());
    fs.rmSync(dir, { recursive: true, force: true });
  });
});
