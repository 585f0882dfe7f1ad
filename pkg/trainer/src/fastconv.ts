/**
 * Fast CPU convolution kernels registered over the stock tfjs ones.
 *
 * The pure-JS backend's Conv2DBackpropFilter is orders of magnitude slower
 * than a straightforward typed-array loop (it dominates training step time
 * ~10:1), so the three conv kernels used here are replaced with tight NHWC
 * implementations. Unsupported configurations (dilations, exotic padding,
 * non-NHWC) fall back to the originals.
 */

import * as tf from "@tensorflow/tfjs";

interface PadInfo {
  outH: number;
  outW: number;
  padTop: number;
  padLeft: number;
}

function padInfo(
  inH: number,
  inW: number,
  kH: number,
  kW: number,
  sH: number,
  sW: number,
  pad: unknown
): PadInfo | null {
  if (pad === "same") {
    const outH = Math.ceil(inH / sH);
    const outW = Math.ceil(inW / sW);
    const alongH = Math.max((outH - 1) * sH + kH - inH, 0);
    const alongW = Math.max((outW - 1) * sW + kW - inW, 0);
    return { outH, outW, padTop: Math.floor(alongH / 2), padLeft: Math.floor(alongW / 2) };
  }
  if (pad === "valid") {
    return {
      outH: Math.ceil((inH - kH + 1) / sH),
      outW: Math.ceil((inW - kW + 1) / sW),
      padTop: 0,
      padLeft: 0,
    };
  }
  if (typeof pad === "number") {
    return {
      outH: Math.floor((inH - kH + 2 * pad) / sH) + 1,
      outW: Math.floor((inW - kW + 2 * pad) / sW) + 1,
      padTop: pad,
      padLeft: pad,
    };
  }
  return null;
}

function normStrides(strides: unknown): [number, number] {
  return typeof strides === "number" ? [strides, strides] : (strides as [number, number]);
}

function dilationsAreOne(dilations: unknown): boolean {
  if (dilations == null) return true;
  if (typeof dilations === "number") return dilations === 1;
  return (dilations as number[]).every((d) => d === 1);
}

type KernelArgs = {
  inputs: Record<string, { dataId: object; shape: number[]; dtype: string }>;
  attrs: Record<string, unknown>;
  backend: {
    data: { get(id: object): { values: Float32Array } };
    makeTensorInfo(shape: number[], dtype: string, values: Float32Array): unknown;
  };
};

type KernelFunc = (args: KernelArgs) => unknown;

function convForward(args: KernelArgs, fallback: KernelFunc): unknown {
  const { x, filter } = args.inputs;
  const { strides, pad, dataFormat, dilations } = args.attrs;
  const [sH, sW] = normStrides(strides);
  const [batch, inH, inW, cIn] = x.shape;
  const [kH, kW, , cOut] = filter.shape;
  const info = padInfo(inH, inW, kH, kW, sH, sW, pad);
  if (!info || dataFormat !== "NHWC" || !dilationsAreOne(dilations)) return fallback(args);

  const xv = args.backend.data.get(x.dataId).values;
  const wv = args.backend.data.get(filter.dataId).values;
  const { outH, outW, padTop, padLeft } = info;
  const out = new Float32Array(batch * outH * outW * cOut);

  for (let b = 0; b < batch; b++) {
    const xBatch = b * inH * inW * cIn;
    const yBatch = b * outH * outW * cOut;
    for (let oy = 0; oy < outH; oy++) {
      const iyBase = oy * sH - padTop;
      for (let ox = 0; ox < outW; ox++) {
        const ixBase = ox * sW - padLeft;
        const yOff = yBatch + (oy * outW + ox) * cOut;
        for (let ky = 0; ky < kH; ky++) {
          const iy = iyBase + ky;
          if (iy < 0 || iy >= inH) continue;
          for (let kx = 0; kx < kW; kx++) {
            const ix = ixBase + kx;
            if (ix < 0 || ix >= inW) continue;
            const xOff = xBatch + (iy * inW + ix) * cIn;
            const wRow = (ky * kW + kx) * cIn * cOut;
            for (let ci = 0; ci < cIn; ci++) {
              const xVal = xv[xOff + ci];
              if (xVal === 0) continue;
              const wOff = wRow + ci * cOut;
              for (let co = 0; co < cOut; co++) {
                out[yOff + co] += xVal * wv[wOff + co];
              }
            }
          }
        }
      }
    }
  }
  return args.backend.makeTensorInfo([batch, outH, outW, cOut], "float32", out);
}

function convBackpropFilter(args: KernelArgs, fallback: KernelFunc): unknown {
  const { x, dy } = args.inputs;
  const { strides, pad, dataFormat, filterShape } = args.attrs;
  const [sH, sW] = normStrides(strides);
  const [batch, inH, inW, cIn] = x.shape;
  const [kH, kW, , cOut] = filterShape as number[];
  const info = padInfo(inH, inW, kH, kW, sH, sW, pad);
  if (!info || dataFormat !== "NHWC") return fallback(args);

  const xv = args.backend.data.get(x.dataId).values;
  const dyv = args.backend.data.get(dy.dataId).values;
  const { outH, outW, padTop, padLeft } = info;
  const dw = new Float32Array(kH * kW * cIn * cOut);

  for (let b = 0; b < batch; b++) {
    const xBatch = b * inH * inW * cIn;
    const yBatch = b * outH * outW * cOut;
    for (let oy = 0; oy < outH; oy++) {
      const iyBase = oy * sH - padTop;
      for (let ox = 0; ox < outW; ox++) {
        const ixBase = ox * sW - padLeft;
        const dyOff = yBatch + (oy * outW + ox) * cOut;
        for (let ky = 0; ky < kH; ky++) {
          const iy = iyBase + ky;
          if (iy < 0 || iy >= inH) continue;
          for (let kx = 0; kx < kW; kx++) {
            const ix = ixBase + kx;
            if (ix < 0 || ix >= inW) continue;
            const xOff = xBatch + (iy * inW + ix) * cIn;
            const wRow = (ky * kW + kx) * cIn * cOut;
            for (let ci = 0; ci < cIn; ci++) {
              const xVal = xv[xOff + ci];
              if (xVal === 0) continue;
              const wOff = wRow + ci * cOut;
              for (let co = 0; co < cOut; co++) {
                dw[wOff + co] += xVal * dyv[dyOff + co];
              }
            }
          }
        }
      }
    }
  }
  return args.backend.makeTensorInfo([kH, kW, cIn, cOut], "float32", dw);
}

function convBackpropInput(args: KernelArgs, fallback: KernelFunc): unknown {
  const { dy, filter } = args.inputs;
  const { strides, pad, dataFormat, inputShape } = args.attrs;
  const [sH, sW] = normStrides(strides);
  const [batch, inH, inW, cIn] = inputShape as number[];
  const [kH, kW, , cOut] = filter.shape;
  const info = padInfo(inH, inW, kH, kW, sH, sW, pad);
  if (!info || dataFormat !== "NHWC") return fallback(args);

  const dyv = args.backend.data.get(dy.dataId).values;
  const wv = args.backend.data.get(filter.dataId).values;
  const { outH, outW, padTop, padLeft } = info;
  const dx = new Float32Array(batch * inH * inW * cIn);

  for (let b = 0; b < batch; b++) {
    const xBatch = b * inH * inW * cIn;
    const yBatch = b * outH * outW * cOut;
    for (let oy = 0; oy < outH; oy++) {
      const iyBase = oy * sH - padTop;
      for (let ox = 0; ox < outW; ox++) {
        const ixBase = ox * sW - padLeft;
        const dyOff = yBatch + (oy * outW + ox) * cOut;
        for (let ky = 0; ky < kH; ky++) {
          const iy = iyBase + ky;
          if (iy < 0 || iy >= inH) continue;
          for (let kx = 0; kx < kW; kx++) {
            const ix = ixBase + kx;
            if (ix < 0 || ix >= inW) continue;
            const xOff = xBatch + (iy * inW + ix) * cIn;
            const wRow = (ky * kW + kx) * cIn * cOut;
            for (let ci = 0; ci < cIn; ci++) {
              const wOff = wRow + ci * cOut;
              let acc = 0;
              for (let co = 0; co < cOut; co++) {
                acc += wv[wOff + co] * dyv[dyOff + co];
              }
              dx[xOff + ci] += acc;
            }
          }
        }
      }
    }
  }
  return args.backend.makeTensorInfo([batch, inH, inW, cIn], "float32", dx);
}

let installed = false;

export function installFastConv(): void {
  if (installed) return;
  installed = true;
  tf.enableProdMode();
  const replacements: [string, (args: KernelArgs, fallback: KernelFunc) => unknown][] = [
    ["Conv2D", convForward],
    ["Conv2DBackpropFilter", convBackpropFilter],
    ["Conv2DBackpropInput", convBackpropInput],
  ];
  for (const [name, impl] of replacements) {
    const original = tf.getKernel(name, "cpu");
    if (!original) continue;
    const fallback = original.kernelFunc as unknown as KernelFunc;
    tf.unregisterKernel(name, "cpu");
    tf.registerKernel({
      kernelName: name,
      backendName: "cpu",
      kernelFunc: ((args: KernelArgs) => impl(args, fallback)) as never,
    });
  }
}
