/**
 * Entry point: `fixture` writes the synthetic circles datasets, `train` fits
 * the coupling network on an augmentation run directory, `evaluate` scores a
 * checkpoint on raw images. All results print as JSON.
 */

import { parseArgs } from "node:util";

import { writeFixture, DEFAULT_FIXTURE } from "./fixture";
import { train, DEFAULT_TRAIN, loadCheckpoint } from "./train";
import { evaluate } from "./evaluate";

function fail(message: string): never {
  console.error(JSON.stringify({ error: message }));
  process.exit(1);
}

function main(): void {
  const [command, ...rest] = process.argv.slice(2);
  if (command === "fixture") {
    const { values } = parseArgs({
      args: rest,
      options: {
        out: { type: "string" },
        size: { type: "string" },
        count: { type: "string" },
        seed: { type: "string" },
      },
    });
    if (!values.out) fail("fixture needs --out");
    const paths = writeFixture({
      out: values.out,
      size: values.size ? parseInt(values.size, 10) : DEFAULT_FIXTURE.size,
      count: values.count ? parseInt(values.count, 10) : DEFAULT_FIXTURE.count,
      seed: values.seed ? parseInt(values.seed, 10) : DEFAULT_FIXTURE.seed,
    });
    console.log(JSON.stringify(paths));
    return;
  }
  if (command === "train") {
    const { values } = parseArgs({
      args: rest,
      options: {
        data: { type: "string" },
        out: { type: "string" },
        levels: { type: "string" },
        "base-width": { type: "string" },
        alpha: { type: "string" },
        lr: { type: "string" },
        steps: { type: "string" },
        batch: { type: "string" },
        seed: { type: "string" },
        "val-every": { type: "string" },
        patience: { type: "string" },
        "no-attention": { type: "boolean" },
      },
    });
    if (!values.data || !values.out) fail("train needs --data and --out");
    const result = train({
      ...DEFAULT_TRAIN,
      dataDir: values.data,
      outDir: values.out,
      levels: values.levels ? parseInt(values.levels, 10) : DEFAULT_TRAIN.levels,
      baseWidth: values["base-width"] ? parseInt(values["base-width"], 10) : DEFAULT_TRAIN.baseWidth,
      alpha: values.alpha ? parseFloat(values.alpha) : DEFAULT_TRAIN.alpha,
      lr: values.lr ? parseFloat(values.lr) : DEFAULT_TRAIN.lr,
      steps: values.steps ? parseInt(values.steps, 10) : DEFAULT_TRAIN.steps,
      batchSize: values.batch ? parseInt(values.batch, 10) : DEFAULT_TRAIN.batchSize,
      seed: values.seed ? parseInt(values.seed, 10) : DEFAULT_TRAIN.seed,
      valEvery: values["val-every"] ? parseInt(values["val-every"], 10) : DEFAULT_TRAIN.valEvery,
      earlyStopPatience: values.patience
        ? parseInt(values.patience, 10)
        : DEFAULT_TRAIN.earlyStopPatience,
      attention: !values["no-attention"],
    });
    console.log(JSON.stringify(result));
    return;
  }
  if (command === "evaluate") {
    const { values } = parseArgs({
      args: rest,
      options: {
        checkpoint: { type: "string" },
        images: { type: "string" },
        labels: { type: "string" },
        export: { type: "string" },
      },
    });
    if (!values.checkpoint || !values.images || !values.labels) {
      fail("evaluate needs --checkpoint, --images, --labels");
    }
    const net = loadCheckpoint(values.checkpoint);
    const result = evaluate(net, values.images, values.labels, values.export);
    net.dispose();
    console.log(JSON.stringify(result));
    return;
  }
  fail(`unknown command ${command ?? "(none)"}; use fixture | train | evaluate`);
}

main();
