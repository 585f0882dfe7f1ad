/**
 * Minimal NPY (v1.0) reader/writer for the tensor files the augmentation
 * service produces and consumes: C-order, little-endian float32/float64/uint8.
 */

import * as fs from "fs";

export interface NpyArray {
  shape: number[];
  data: Float32Array;
}

const MAGIC = "\x93NUMPY";

export function readNpy(path: string): NpyArray {
  const buf = fs.readFileSync(path);
  if (buf.toString("latin1", 0, 6) !== MAGIC) {
    throw new Error(`${path} is not an NPY file`);
  }
  const major = buf.readUInt8(6);
  const headerLen = major >= 2 ? buf.readUInt32LE(8) : buf.readUInt16LE(8);
  const headerEnd = (major >= 2 ? 12 : 10) + headerLen;
  const header = buf.toString("latin1", major >= 2 ? 12 : 10, headerEnd);

  const dtypeMatch = header.match(/'descr':\s*'([^']+)'/);
  const orderMatch = header.match(/'fortran_order':\s*(True|False)/);
  const shapeMatch = header.match(/'shape':\s*\(([^)]*)\)/);
  if (!dtypeMatch || !orderMatch || !shapeMatch) {
    throw new Error(`unparseable NPY header in ${path}`);
  }
  if (orderMatch[1] === "True") {
    throw new Error(`${path}: fortran-order arrays are not supported`);
  }
  const shape = shapeMatch[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => parseInt(s, 10));
  const count = shape.reduce((a, b) => a * b, 1);
  const dtype = dtypeMatch[1];
  const body = buf.subarray(headerEnd);

  let data: Float32Array;
  if (dtype === "<f4") {
    data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = body.readFloatLE(i * 4);
  } else if (dtype === "<f8") {
    data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = body.readDoubleLE(i * 8);
  } else if (dtype === "|u1") {
    data = Float32Array.from(body.subarray(0, count));
  } else {
    throw new Error(`${path}: unsupported dtype ${dtype}`);
  }
  return { shape, data };
}

export function writeNpy(path: string, shape: number[], data: Float32Array | number[]): void {
  const values = data instanceof Float32Array ? data : Float32Array.from(data);
  const count = shape.reduce((a, b) => a * b, 1);
  if (values.length !== count) {
    throw new Error(`shape ${JSON.stringify(shape)} holds ${count} values, got ${values.length}`);
  }
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(", ")})`;
  let header = `{'descr': '<f4', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const unpadded = 10 + header.length + 1;
  header = header + " ".repeat((64 - (unpadded % 64)) % 64) + "\n";

  const head = Buffer.alloc(10 + header.length);
  head.write(MAGIC, 0, "latin1");
  head.writeUInt8(1, 6);
  head.writeUInt8(0, 7);
  head.writeUInt16LE(header.length, 8);
  head.write(header, 10, "latin1");

  const body = Buffer.alloc(values.length * 4);
  for (let i = 0; i < values.length; i++) body.writeFloatLE(values[i], i * 4);
  fs.writeFileSync(path, Buffer.concat([head, body]));
}
