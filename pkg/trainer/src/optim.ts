/** Manual Adam with the paper-style schedule: flat then linear decay to zero. */

import * as tf from "@tensorflow/tfjs";

export interface AdamConfig {
  lr: number;
  beta1: number;
  beta2: number;
  eps: number;
}

export const DEFAULT_ADAM: AdamConfig = { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 };

/** Constant for the first 40% of steps, then linear decay to zero. */
export function scheduledLr(base: number, step: number, totalSteps: number): number {
  const flat = 0.4 * totalSteps;
  if (step < flat) return base;
  return (base * (totalSteps - step)) / (totalSteps - flat);
}

export class Adam {
  private readonly cfg: AdamConfig;
  private readonly m = new Map<string, tf.Tensor>();
  private readonly v = new Map<string, tf.Tensor>();
  private t = 0;

  constructor(cfg: Partial<AdamConfig> = {}) {
    this.cfg = { ...DEFAULT_ADAM, ...cfg };
  }

  /** One update; returns the loss value. `lr` overrides the base rate. */
  step(lossFn: () => tf.Scalar, vars: tf.Variable[], lr?: number): number {
    const rate = lr ?? this.cfg.lr;
    const { value, grads } = tf.variableGrads(lossFn, vars);
    this.t += 1;
    const { beta1, beta2, eps } = this.cfg;
    const correction1 = 1 - beta1 ** this.t;
    const correction2 = 1 - beta2 ** this.t;
    for (const variable of vars) {
      const g = grads[variable.name];
      if (!g) continue;
      const prevM = this.m.get(variable.name) ?? tf.zeros(g.shape);
      const prevV = this.v.get(variable.name) ?? tf.zeros(g.shape);
      const nextM = tf.tidy(() => tf.add(tf.mul(prevM, beta1), tf.mul(g, 1 - beta1)));
      const nextV = tf.tidy(() => tf.add(tf.mul(prevV, beta2), tf.mul(tf.square(g), 1 - beta2)));
      tf.tidy(() => {
        const mHat = tf.div(nextM, correction1);
        const vHat = tf.div(nextV, correction2);
        variable.assign(tf.sub(variable, tf.mul(tf.div(mHat, tf.add(tf.sqrt(vHat), eps)), rate)));
      });
      prevM.dispose();
      prevV.dispose();
      this.m.set(variable.name, nextM);
      this.v.set(variable.name, nextV);
      g.dispose();
    }
    const loss = value.dataSync()[0];
    value.dispose();
    return loss;
  }

  dispose(): void {
    for (const t of this.m.values()) t.dispose();
    for (const t of this.v.values()) t.dispose();
    this.m.clear();
    this.v.clear();
  }
}
