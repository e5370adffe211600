import { Matrix } from "../src/matrix";

/** splitmix64-style deterministic generator so test instances are reproducible */
export class Rand {
  private state: bigint;

  constructor(seed: number) {
    this.state = BigInt(seed) & 0xffffffffffffffffn;
  }

  next(): number {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    z = z ^ (z >> 31n);
    return Number(z >> 11n) / 2 ** 53;
  }

  int(lo: number, hi: number): number {
    return lo + Math.floor(this.next() * (hi - lo + 1));
  }

  gauss(): number {
    // Box-Muller; plain uniforms are fine for test payloads
    const u = Math.max(this.next(), 1e-12);
    const v = this.next();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  matrix(rows: number, cols: number, shift = 0): Matrix {
    const data = new Float64Array(rows * cols);
    for (let i = 0; i < data.length; i++) {
      data[i] = this.gauss() + shift;
    }
    return { rows, cols, data };
  }
}

/**
 * JSON text re-serialized canonically with the run-specific blocks removed:
 * timing, and the inputs' source paths (temp files differ per invocation;
 * the content digests stay and still pin the payloads).
 */
export function canonicalReport(jsonText: string): string {
  const doc = JSON.parse(jsonText) as Record<string, unknown>;
  delete doc.timing;
  const inputs = doc.inputs as Record<string, Record<string, unknown>> | undefined;
  if (inputs) {
    for (const block of Object.values(inputs)) {
      delete block.source;
      delete block.label;
    }
  }
  return JSON.stringify(sortKeys(doc));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeys);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as object).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}
