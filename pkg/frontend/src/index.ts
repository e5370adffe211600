/**
 * Stateless bindings over the metrics CLI: each call serializes its matrices
 * to npy files in a private temp dir, invokes the CLI, and parses the
 * machine-readable output. Values are therefore bit-identical to what the
 * CLI reports for the same data.
 */
import { readFileSync } from "node:fs";

import { CliOptions, runCli, withMatrixFiles } from "./cli";
import { Matrix } from "./matrix";
import { decodeNpy } from "./npy";

export { Matrix, matrixFromArrays, validateMatrix } from "./matrix";
export { encodeNpy, decodeNpy } from "./npy";
export {
  BarcodeCliError, CapacityError, DataError, FormatError, IoError,
  NumericalError, ParameterError, ShapeError, UsageError,
} from "./errors";
export { CliOptions, resolveCommand, runCli } from "./cli";

export interface BarcodeValues {
  fidelity_pq: number;
  fidelity_pp: number;
  fidelity_qq: number;
  diversity_pq: number;
  diversity_pp: number;
  diversity_qq: number;
  relative_fidelity: number | null;
  relative_diversity: number | null;
  degenerate_flags: Record<string, boolean>;
  convention: string;
}

export interface PrdcValues {
  precision: number;
  recall: number;
  density: number;
  coverage: number;
  k: number;
}

export interface MetricReport {
  inputs: Record<string, unknown>;
  projection: { dims: number; explainability: number; centered: boolean } | null;
  barcode: BarcodeValues | null;
  prdc: PrdcValues | null;
  fid: number | null;
  outlier_policy: { prob: number; position: string } | null;
  engine: Record<string, unknown>;
  timing: Record<string, number>;
}

export interface MetricOptions {
  metrics?: Array<"barcode" | "prdc" | "fid">;
  k?: number;
  dims?: number;
  minExplainability?: number;
  center?: boolean;
  outlierProb?: number;
  outlierPosition?: "in" | "out" | "both";
  convention?: "survival" | "cdf";
  exactLimit?: number;
  includeSelfPairs?: boolean;
  seed?: number;
  cli?: CliOptions;
}

function computeFlags(options: MetricOptions): string[] {
  const flags: string[] = [];
  flags.push("--metrics", (options.metrics ?? ["barcode"]).join(","));
  if (options.k !== undefined) flags.push("--k", String(options.k));
  if (options.dims !== undefined) flags.push("--dims", String(options.dims));
  if (options.minExplainability !== undefined) {
    flags.push("--min-explainability", String(options.minExplainability));
  }
  if (options.center) flags.push("--center");
  if (options.outlierProb !== undefined) {
    flags.push("--outlier-prob", String(options.outlierProb));
  }
  if (options.outlierPosition) flags.push("--outlier-pos", options.outlierPosition);
  if (options.convention) flags.push("--fidelity-convention", options.convention);
  if (options.exactLimit !== undefined) {
    flags.push("--exact-limit", String(options.exactLimit));
  }
  if (options.includeSelfPairs) flags.push("--include-self-pairs");
  if (options.seed !== undefined) flags.push("--seed", String(options.seed));
  return flags;
}

/** Full metric report for a pair of in-memory matrices. */
export function boundMetricReport(
  real: Matrix,
  fake: Matrix,
  options: MetricOptions = {},
): MetricReport {
  return withMatrixFiles({ real, fake }, (paths) => {
    const run = runCli(
      ["compute", paths.real, paths.fake, ...computeFlags(options)],
      options.cli,
    );
    return JSON.parse(run.stdout) as MetricReport;
  });
}

/** Barcode fidelity/diversity block (the report's barcode section). */
export function boundBarcodeMetrics(
  real: Matrix,
  fake: Matrix,
  options: MetricOptions = {},
): BarcodeValues {
  const report = boundMetricReport(real, fake, {
    ...options,
    metrics: ["barcode"],
  });
  return report.barcode as BarcodeValues;
}

export function boundPrdc(
  real: Matrix,
  fake: Matrix,
  k = 5,
  options: MetricOptions = {},
): PrdcValues {
  const report = boundMetricReport(real, fake, { ...options, metrics: ["prdc"], k });
  return report.prdc as PrdcValues;
}

export function boundFid(real: Matrix, fake: Matrix, options: MetricOptions = {}): number {
  const report = boundMetricReport(real, fake, { ...options, metrics: ["fid"] });
  return report.fid as number;
}

export interface CurvePoint {
  lambda: number;
  below: number;
  alive: number;
}

/** Sampled threshold curve of the pair-distance multiset. */
export function boundCurve(
  real: Matrix,
  fake: Matrix,
  resolution = 101,
  options: { exactLimit?: number; cli?: CliOptions } = {},
): CurvePoint[] {
  return withMatrixFiles({ real, fake }, (paths) => {
    const args = ["barcode-plot", paths.real, paths.fake,
                  "--resolution", String(resolution)];
    if (options.exactLimit !== undefined) {
      args.push("--exact-limit", String(options.exactLimit));
    }
    const run = runCli(args, options.cli);
    const lines = run.stdout.trim().split("\n").slice(1);
    return lines.map((line) => {
      const [lambda, below, alive] = line.split(",").map(Number);
      return { lambda, below, alive };
    });
  });
}

export interface ProjectionResult {
  dims: number;
  explainability: number;
  real: Matrix;
  fake: Matrix;
}

/** Fit a joint projection on the pair and return both sets projected. */
export function boundProjection(
  real: Matrix,
  fake: Matrix,
  target: { dims?: number; minExplainability?: number; center?: boolean },
  options: { cli?: CliOptions } = {},
): ProjectionResult {
  if ((target.dims === undefined) === (target.minExplainability === undefined)) {
    throw new RangeError("pass exactly one of dims or minExplainability");
  }
  return withMatrixFiles({ real, fake }, (paths, dir) => {
    const outReal = `${dir}/projected-real.npy`;
    const outFake = `${dir}/projected-fake.npy`;
    const args = ["project", paths.real, paths.fake,
                  "--out-real", outReal, "--out-fake", outFake];
    if (target.dims !== undefined) args.push("--dims", String(target.dims));
    if (target.minExplainability !== undefined) {
      args.push("--min-explainability", String(target.minExplainability));
    }
    if (target.center) args.push("--center");
    const run = runCli(args, options.cli);
    const info = JSON.parse(run.stdout) as { dims: number; explainability: number };
    return {
      dims: info.dims,
      explainability: info.explainability,
      real: decodeNpy(readFileSync(outReal)),
      fake: decodeNpy(readFileSync(outFake)),
    };
  });
}
