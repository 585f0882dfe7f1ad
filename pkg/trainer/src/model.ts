/**
 * Coupled segmentation network: a shared encoder feeding a saliency decoder
 * (with encoder skip connections) and a segmentation decoder that consumes
 * saliency-decoder features gated by channel then spatial attention.
 *
 * Level indexing follows the forward recipe: encoder stage L sees the input
 * at full resolution, stage 1 is the deepest; decoders run 1..L back up to
 * full resolution. Stage l has baseWidth * 2^(L-l) channels. Blocks are two
 * conv+instance-norm+leaky-ReLU layers; downsampling is a stride-2 first
 * conv, upsampling nearest-neighbor.
 */

import * as tf from "@tensorflow/tfjs";

export interface NetConfig {
  levels: number;
  baseWidth: number;
  inChannels: number;
  attention: boolean;
  seed: number;
  /** 1 = binary sigmoid head; >= 2 switches to per-class softmax */
  numClasses: number;
  /** zero-init the two output heads so the first prediction is uniform */
  zeroFinal?: boolean;
}

export const DEFAULT_CONFIG: NetConfig = {
  levels: 4,
  baseWidth: 8,
  inChannels: 3,
  attention: true,
  seed: 0,
  numClasses: 1,
};

export interface ForwardTrace {
  /** spatial side length per encoder stage, index 0 = stage L (shallowest) */
  encoderSizes: number[];
  saliency: tf.Tensor4D; // (B, H, W, inChannels), signed
  /** (B, H, W, 1) sigmoid probabilities, or (B, H, W, numClasses) softmax */
  segProbs: tf.Tensor4D;
  segLogits: tf.Tensor4D;
  /** sigmoid attention gates, populated when forward() collects them */
  attentionGates?: tf.Tensor[];
}

const ATTENTION_REDUCTION = 4;
const SA_KERNEL = 5;
const LEAK = 0.1;
const NORM_EPS = 1e-5;

let instanceCounter = 0;

export class CouplingNet {
  readonly cfg: NetConfig;
  /** keyed by logical parameter name; the engine-level variable names carry
   * a per-instance prefix because tfjs requires global uniqueness */
  readonly params = new Map<string, tf.Variable>();
  private readonly uid: number;
  private seedCounter: number;

  constructor(cfg: Partial<NetConfig> = {}) {
    this.cfg = { ...DEFAULT_CONFIG, ...cfg };
    if (this.cfg.levels < 2) {
      throw new Error(`levels must be >= 2, got ${this.cfg.levels}`);
    }
    this.uid = instanceCounter++;
    this.seedCounter = this.cfg.seed * 7919 + 1;
    this.build();
  }

  width(l: number): number {
    return this.cfg.baseWidth * 2 ** (this.cfg.levels - l);
  }

  private nextSeed(): number {
    return this.seedCounter++;
  }

  private addVar(name: string, tensor: tf.Tensor): void {
    this.params.set(name, tf.variable(tensor, true, `net${this.uid}/${name}`));
  }

  private addConv(name: string, k: number, cin: number, cout: number, zero = false): void {
    const std = Math.sqrt(2 / (k * k * cin));
    const kernel = zero
      ? tf.zeros([k, k, cin, cout])
      : tf.randomNormal([k, k, cin, cout], 0, std, "float32", this.nextSeed());
    this.addVar(`${name}.kernel`, kernel);
    this.addVar(`${name}.bias`, tf.zeros([cout]));
  }

  private addNorm(name: string, c: number): void {
    this.addVar(`${name}.gamma`, tf.ones([c]));
    this.addVar(`${name}.beta`, tf.zeros([c]));
  }

  private addBlock(name: string, cin: number, cout: number): void {
    this.addConv(`${name}.conv1`, 3, cin, cout);
    this.addNorm(`${name}.norm1`, cout);
    this.addConv(`${name}.conv2`, 3, cout, cout);
    this.addNorm(`${name}.norm2`, cout);
  }

  private addDense(name: string, cin: number, cout: number): void {
    const std = Math.sqrt(2 / cin);
    this.addVar(`${name}.weight`, tf.randomNormal([cin, cout], 0, std, "float32", this.nextSeed()));
    this.addVar(`${name}.bias`, tf.zeros([cout]));
  }

  private build(): void {
    const L = this.cfg.levels;
    this.addBlock(`enc${L}`, this.cfg.inChannels, this.width(L));
    for (let l = L - 1; l >= 1; l--) {
      this.addBlock(`enc${l}`, this.width(l + 1), this.width(l));
    }
    this.addBlock("dsel1", this.width(1), this.width(1));
    this.addBlock("dseg1", this.width(1), this.width(1));
    for (let l = 2; l <= L; l++) {
      const cin = 2 * this.width(l - 1);
      this.addBlock(`dsel${l}`, cin, this.width(l));
      this.addBlock(`dseg${l}`, cin, this.width(l));
      if (this.cfg.attention) {
        const hidden = Math.max(1, Math.floor(cin / ATTENTION_REDUCTION));
        this.addDense(`ca${l}.fc1`, cin, hidden);
        this.addDense(`ca${l}.fc2`, hidden, cin);
        this.addConv(`sa${l}.conv`, SA_KERNEL, 2, 1);
      }
    }
    this.addConv("selHead", 1, this.width(L), this.cfg.inChannels, this.cfg.zeroFinal);
    this.addConv("segHead", 1, this.width(L), Math.max(1, this.cfg.numClasses), this.cfg.zeroFinal);
  }

  private p(name: string): tf.Variable {
    const v = this.params.get(name);
    if (!v) throw new Error(`unknown parameter ${name}`);
    return v;
  }

  private conv(x: tf.Tensor4D, name: string, stride: 1 | 2): tf.Tensor4D {
    const y = tf.conv2d(x, this.p(`${name}.kernel`) as tf.Tensor4D, stride, "same");
    return tf.add(y, this.p(`${name}.bias`));
  }

  private instanceNorm(x: tf.Tensor4D, name: string): tf.Tensor4D {
    const { mean, variance } = tf.moments(x, [1, 2], true);
    const normed = tf.div(tf.sub(x, mean), tf.sqrt(tf.add(variance, NORM_EPS)));
    return tf.add(tf.mul(normed, this.p(`${name}.gamma`)), this.p(`${name}.beta`));
  }

  private block(x: tf.Tensor4D, name: string, downsample: boolean): tf.Tensor4D {
    let h = this.conv(x, `${name}.conv1`, downsample ? 2 : 1);
    h = tf.leakyRelu(this.instanceNorm(h, `${name}.norm1`), LEAK);
    h = this.conv(h, `${name}.conv2`, 1);
    return tf.leakyRelu(this.instanceNorm(h, `${name}.norm2`), LEAK);
  }

  private gateSink: tf.Tensor[] | null = null;

  private channelAttention(z: tf.Tensor4D, l: number): tf.Tensor4D {
    const mlp = (v: tf.Tensor2D): tf.Tensor2D => {
      const hidden = tf.relu(
        tf.add(tf.matMul(v, this.p(`ca${l}.fc1.weight`) as tf.Tensor2D), this.p(`ca${l}.fc1.bias`))
      );
      return tf.add(
        tf.matMul(hidden, this.p(`ca${l}.fc2.weight`) as tf.Tensor2D),
        this.p(`ca${l}.fc2.bias`)
      ) as tf.Tensor2D;
    };
    const avg = tf.mean(z, [1, 2]) as tf.Tensor2D;
    const max = tf.max(z, [1, 2]) as tf.Tensor2D;
    const gate = tf.sigmoid(tf.add(mlp(avg), mlp(max)));
    if (this.gateSink) this.gateSink.push(gate);
    const c = z.shape[3] as number;
    return tf.mul(z, tf.reshape(gate, [-1, 1, 1, c]));
  }

  private spatialAttention(z: tf.Tensor4D, l: number): tf.Tensor4D {
    const pooled = tf.concat(
      [tf.mean(z, 3, true), tf.max(z, 3, true)],
      3
    ) as tf.Tensor4D;
    const gate = tf.sigmoid(this.conv(pooled, `sa${l}.conv`, 1));
    if (this.gateSink) this.gateSink.push(gate);
    return tf.mul(z, gate);
  }

  private upsample(x: tf.Tensor4D): tf.Tensor4D {
    const [, h, w] = x.shape;
    return tf.image.resizeNearestNeighbor(x, [h * 2, w * 2]);
  }

  forward(x: tf.Tensor4D, collectGates = false): ForwardTrace {
    this.gateSink = collectGates ? [] : null;
    const L = this.cfg.levels;
    const [, h, w] = x.shape;
    const div = 2 ** (L - 1);
    if (h % div !== 0 || w % div !== 0) {
      throw new Error(`input ${h}x${w} not divisible by 2^(L-1) = ${div}`);
    }

    const fE = new Map<number, tf.Tensor4D>();
    fE.set(L, this.block(x, `enc${L}`, false));
    for (let l = L - 1; l >= 1; l--) {
      fE.set(l, this.block(fE.get(l + 1)!, `enc${l}`, true));
    }

    const fSel = new Map<number, tf.Tensor4D>();
    const fSeg = new Map<number, tf.Tensor4D>();
    fSel.set(1, this.block(fE.get(1)!, "dsel1", false));
    fSeg.set(1, this.block(fE.get(1)!, "dseg1", false));
    for (let l = 2; l <= L; l++) {
      const selIn = this.upsample(tf.concat([fE.get(l - 1)!, fSel.get(l - 1)!], 3) as tf.Tensor4D);
      fSel.set(l, this.block(selIn, `dsel${l}`, false));

      let segIn = tf.concat([fSel.get(l - 1)!, fSeg.get(l - 1)!], 3) as tf.Tensor4D;
      if (this.cfg.attention) {
        segIn = this.spatialAttention(this.channelAttention(segIn, l), l);
      }
      fSeg.set(l, this.block(this.upsample(segIn), `dseg${l}`, false));
    }

    const saliency = this.conv(fSel.get(L)!, "selHead", 1);
    const segLogits = this.conv(fSeg.get(L)!, "segHead", 1);
    const segProbs = (this.cfg.numClasses >= 2
      ? tf.softmax(segLogits, 3)
      : tf.sigmoid(segLogits)) as tf.Tensor4D;
    const encoderSizes = [];
    for (let l = L; l >= 1; l--) {
      encoderSizes.push(fE.get(l)!.shape[1]);
    }
    const attentionGates = this.gateSink ?? undefined;
    this.gateSink = null;
    return { encoderSizes, saliency, segProbs, segLogits, attentionGates };
  }

  variables(): tf.Variable[] {
    return [...this.params.values()];
  }

  dispose(): void {
    for (const v of this.params.values()) v.dispose();
    this.params.clear();
  }
}
