/** A dense row-major float64 matrix handed across the CLI boundary. */
export interface Matrix {
  rows: number;
  cols: number;
  /** length rows * cols, row-major */
  data: Float64Array;
}

export function matrixFromArrays(values: number[][]): Matrix {
  const rows = values.length;
  const cols = rows > 0 ? values[0].length : 0;
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < rows; i++) {
    if (values[i].length !== cols) {
      throw new RangeError(`row ${i} has ${values[i].length} columns, expected ${cols}`);
    }
    data.set(values[i], i * cols);
  }
  return { rows, cols, data };
}

export function validateMatrix(m: Matrix, name: string): void {
  if (!Number.isInteger(m.rows) || !Number.isInteger(m.cols) || m.rows < 1 || m.cols < 1) {
    throw new RangeError(`${name} must have at least one row and one column`);
  }
  if (m.data.length !== m.rows * m.cols) {
    throw new RangeError(
      `${name} data length ${m.data.length} does not match ${m.rows}x${m.cols}`,
    );
  }
  for (let i = 0; i < m.data.length; i++) {
    if (!Number.isFinite(m.data[i])) {
      throw new RangeError(`${name} has a non-finite entry at flat index ${i}`);
    }
  }
}
