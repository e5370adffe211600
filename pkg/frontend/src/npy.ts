/**
 * Minimal npy (version 1.0) encode/decode for 2-D little-endian float64
 * payloads, the exact dialect the CLI accepts and emits.
 */
import { Matrix } from "./matrix";

const MAGIC = Uint8Array.from([0x93, 0x4e, 0x55, 0x4d, 0x50, 0x59]); // \x93NUMPY

export function encodeNpy(m: Matrix): Uint8Array {
  let header = `{'descr': '<f8', 'fortran_order': False, 'shape': (${m.rows}, ${m.cols}), }`;
  const unpadded = MAGIC.length + 2 + 2 + header.length + 1;
  header = header + " ".repeat((64 - (unpadded % 64)) % 64) + "\n";

  const total = MAGIC.length + 2 + 2 + header.length + m.data.length * 8;
  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  let offset = 0;
  out.set(MAGIC, offset);
  offset += MAGIC.length;
  out[offset++] = 1; // major version
  out[offset++] = 0; // minor version
  view.setUint16(offset, header.length, true);
  offset += 2;
  for (let i = 0; i < header.length; i++) {
    out[offset++] = header.charCodeAt(i);
  }
  for (let i = 0; i < m.data.length; i++) {
    view.setFloat64(offset, m.data[i], true);
    offset += 8;
  }
  return out;
}

export function decodeNpy(raw: Uint8Array): Matrix {
  for (let i = 0; i < MAGIC.length; i++) {
    if (raw[i] !== MAGIC[i]) {
      throw new Error("not an npy payload (bad magic)");
    }
  }
  if (raw[6] !== 1 || raw[7] !== 0) {
    throw new Error(`unsupported npy version ${raw[6]}.${raw[7]}`);
  }
  const view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
  const headerLen = view.getUint16(8, true);
  const header = Buffer.from(raw.subarray(10, 10 + headerLen)).toString("latin1");
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shape = /'shape':\s*\((\d+),\s*(\d+)\s*\)/.exec(header);
  if (descr !== "<f8" || fortran !== "False" || !shape) {
    throw new Error(`unsupported npy header: ${header.trim()}`);
  }
  const rows = Number(shape[1]);
  const cols = Number(shape[2]);
  const start = 10 + headerLen;
  const expected = rows * cols * 8;
  if (raw.byteLength - start !== expected) {
    throw new Error(`npy payload is ${raw.byteLength - start} bytes, expected ${expected}`);
  }
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = view.getFloat64(start + i * 8, true);
  }
  return { rows, cols, data };
}
