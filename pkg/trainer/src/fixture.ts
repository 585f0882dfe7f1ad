/**
 * Synthetic circles datasets for the toy training experiments: a "source
 * domain" split with one palette and a structurally identical held-out split
 * whose intensities are shifted (brighter, hue-rotated), standing in for an
 * acquisition-device change.
 */

import * as fs from "fs";
import * as path from "path";

import { ImageTensor, writePng } from "./png";
import { Rng, gaussian, mulberry32, uniform } from "./rng";

export interface FixtureConfig {
  out: string;
  size: number;
  count: number;
  seed: number;
}

export const DEFAULT_FIXTURE: FixtureConfig = { out: "fixture", size: 64, count: 16, seed: 300 };

type Palette = { bg: [number, number, number]; fg: [number, number, number] };

const SOURCE_PALETTE: Palette = { bg: [0.22, 0.28, 0.35], fg: [0.78, 0.55, 0.4] };
const SHIFTED_PALETTE: Palette = { bg: [0.35, 0.45, 0.25], fg: [0.55, 0.85, 0.75] };

function circleImage(rng: Rng, size: number, palette: Palette): { image: ImageTensor; mask: ImageTensor } {
  const cy = uniform(rng, size * 0.3, size * 0.7);
  const cx = uniform(rng, size * 0.3, size * 0.7);
  const radius = uniform(rng, size * 0.15, size * 0.28);
  const bgScale = uniform(rng, 0.9, 1.1);
  const fgScale = uniform(rng, 0.9, 1.1);
  const img = new Float32Array(size * size * 3);
  const mask = new Float32Array(size * size * 3);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const inside = Math.hypot(y - cy, x - cx) <= radius;
      const grad = 0.08 * (x / size - 0.5);
      for (let c = 0; c < 3; c++) {
        const base = inside ? palette.fg[c] * fgScale : palette.bg[c] * bgScale;
        const v = base + grad + gaussian(rng, 0, 0.015);
        img[(y * size + x) * 3 + c] = Math.min(1, Math.max(0, v));
        mask[(y * size + x) * 3 + c] = inside ? 1 : 0;
      }
    }
  }
  return {
    image: { height: size, width: size, channels: 3, data: img },
    mask: { height: size, width: size, channels: 3, data: mask },
  };
}

function writeSplit(root: string, cfg: FixtureConfig, palette: Palette, seedOffset: number): void {
  fs.mkdirSync(path.join(root, "images"), { recursive: true });
  fs.mkdirSync(path.join(root, "labels"), { recursive: true });
  for (let i = 0; i < cfg.count; i++) {
    const rng = mulberry32(cfg.seed + seedOffset + i);
    const { image, mask } = circleImage(rng, cfg.size, palette);
    const stem = `c${String(i).padStart(2, "0")}`;
    writePng(path.join(root, "images", `${stem}.png`), image);
    writePng(path.join(root, "labels", `${stem}.png`), mask);
  }
}

export function writeFixture(cfg: FixtureConfig): { train: string; evalShifted: string } {
  const train = path.join(cfg.out, "train");
  const evalShifted = path.join(cfg.out, "eval_shifted");
  writeSplit(train, cfg, SOURCE_PALETTE, 0);
  writeSplit(evalShifted, cfg, SHIFTED_PALETTE, 5000);
  return { train, evalShifted };
}
