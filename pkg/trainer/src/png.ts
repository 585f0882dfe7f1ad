/** PNG decode/encode helpers around pngjs, in unit-interval HWC layout. */

import * as fs from "fs";
import { PNG } from "pngjs";

export interface ImageTensor {
  height: number;
  width: number;
  channels: number;
  /** HWC order, values in [0, 1] */
  data: Float32Array;
}

export function readPng(path: string, channels: 1 | 3 = 3): ImageTensor {
  const png = PNG.sync.read(fs.readFileSync(path));
  const { width, height } = png;
  const out = new Float32Array(width * height * channels);
  for (let i = 0; i < width * height; i++) {
    if (channels === 3) {
      out[i * 3] = png.data[i * 4] / 255;
      out[i * 3 + 1] = png.data[i * 4 + 1] / 255;
      out[i * 3 + 2] = png.data[i * 4 + 2] / 255;
    } else {
      out[i] = png.data[i * 4] / 255;
    }
  }
  return { height, width, channels, data: out };
}

/** Binary mask: any channel value above 127 counts as foreground. */
export function readMask(path: string): Float32Array {
  const png = PNG.sync.read(fs.readFileSync(path));
  const out = new Float32Array(png.width * png.height);
  for (let i = 0; i < out.length; i++) {
    out[i] = png.data[i * 4] > 127 ? 1 : 0;
  }
  return out;
}

export function writePng(path: string, img: ImageTensor): void {
  const png = new PNG({ width: img.width, height: img.height });
  for (let i = 0; i < img.width * img.height; i++) {
    const r = img.channels === 3 ? img.data[i * 3] : img.data[i];
    const g = img.channels === 3 ? img.data[i * 3 + 1] : img.data[i];
    const b = img.channels === 3 ? img.data[i * 3 + 2] : img.data[i];
    png.data[i * 4] = Math.max(0, Math.min(255, Math.round(r * 255)));
    png.data[i * 4 + 1] = Math.max(0, Math.min(255, Math.round(g * 255)));
    png.data[i * 4 + 2] = Math.max(0, Math.min(255, Math.round(b * 255)));
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}
