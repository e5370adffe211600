/** Locate and invoke the metrics CLI, with temp-file plumbing for matrices. */
import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { errorFromCli } from "./errors";
import { Matrix, validateMatrix } from "./matrix";
import { encodeNpy } from "./npy";

export interface CliOptions {
  /** command + leading args; default from BARCODE_METRICS_CLI or "barcode-metrics" */
  command?: string[];
}

export function resolveCommand(options?: CliOptions): string[] {
  if (options?.command && options.command.length > 0) {
    return options.command;
  }
  const env = process.env.BARCODE_METRICS_CLI;
  if (env && env.trim().length > 0) {
    return env.trim().split(/\s+/);
  }
  return ["barcode-metrics"];
}

export interface CliRun {
  stdout: string;
  stderr: string;
}

export function runCli(args: string[], options?: CliOptions): CliRun {
  const [command, ...lead] = resolveCommand(options);
  const proc = spawnSync(command, [...lead, ...args], {
    encoding: "utf8",
    maxBuffer: 1 << 28,
  });
  if (proc.error) {
    throw proc.error;
  }
  if (proc.status !== 0) {
    throw errorFromCli(proc.stderr ?? "", proc.status ?? -1);
  }
  return { stdout: proc.stdout ?? "", stderr: proc.stderr ?? "" };
}

/** Write matrices to a fresh temp dir, run the body, always clean up. */
export function withMatrixFiles<T>(
  matrices: Record<string, Matrix>,
  body: (paths: Record<string, string>, dir: string) => T,
): T {
  for (const [name, m] of Object.entries(matrices)) {
    validateMatrix(m, name);
  }
  const dir = mkdtempSync(join(tmpdir(), "barcode-metrics-"));
  try {
    const paths: Record<string, string> = {};
    for (const [name, m] of Object.entries(matrices)) {
      const path = join(dir, `${name}.npy`);
      writeFileSync(path, encodeNpy(m));
      paths[name] = path;
    }
    return body(paths, dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
