/** Error classes mirroring the CLI's error categories one to one. */

export class BarcodeCliError extends Error {
  constructor(
    message: string,
    readonly category: string,
    readonly exitCode: number,
  ) {
    super(message);
    this.name = new.target.name;
  }
}

export class UsageError extends BarcodeCliError {}
export class FormatError extends BarcodeCliError {}
export class DataError extends BarcodeCliError {}
export class ShapeError extends BarcodeCliError {}
export class ParameterError extends BarcodeCliError {}
export class CapacityError extends BarcodeCliError {}
export class NumericalError extends BarcodeCliError {}
export class IoError extends BarcodeCliError {}

const BY_CATEGORY: Record<string, new (m: string, c: string, e: number) => BarcodeCliError> = {
  usage: UsageError,
  format: FormatError,
  data: DataError,
  shape: ShapeError,
  parameter: ParameterError,
  config: DataError, // config problems surface as bad input data client-side
  capacity: CapacityError,
  numerical: NumericalError,
  io: IoError,
};

const BY_EXIT_CODE: Record<number, string> = {
  64: "usage",
  65: "data",
  66: "shape",
  69: "capacity",
  70: "numerical",
  74: "io",
};

/** Build the typed error for a failed CLI run from its stderr and exit code. */
export function errorFromCli(stderr: string, exitCode: number): BarcodeCliError {
  const match = /^error:([a-z]+):\s*(.*)$/m.exec(stderr);
  const category = match?.[1] ?? BY_EXIT_CODE[exitCode] ?? "unknown";
  const message = match?.[2] ?? stderr.trim() ?? `CLI exited with code ${exitCode}`;
  const cls = BY_CATEGORY[category] ?? BarcodeCliError;
  return new cls(message, category, exitCode);
}
