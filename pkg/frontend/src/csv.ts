/**
 * Strict reader for the sweep CSV contract: comma-separated, LF endings,
 * first line is the header, empty cells mean "value not computed" (e.g. a
 * measure on an error-annotated row).
 */

export class CsvParseError extends Error {
  readonly line: number;

  constructor(message: string, line: number) {
    super(`line ${line}: ${message}`);
    this.name = "CsvParseError";
    this.line = line;
  }
}

export class MissingColumnError extends Error {
  readonly column: string;

  constructor(column: string, available: string[]) {
    super(`column "${column}" not found; header has: ${available.join(", ")}`);
    this.name = "MissingColumnError";
    this.column = column;
  }
}

export interface SweepTable {
  header: string[];
  /** row-major cells; null marks an empty cell */
  rows: (string | null)[][];
}

export function parseCsv(text: string): SweepTable {
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new CsvParseError("empty file", 1);
  }
  const header = lines[0].split(",");
  if (header.some((h) => h.trim() === "")) {
    throw new CsvParseError("header has an unnamed column", 1);
  }
  const rows: (string | null)[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new CsvParseError(
        `expected ${header.length} cells, found ${cells.length}`,
        i + 1,
      );
    }
    rows.push(cells.map((c) => (c === "" ? null : c)));
  }
  return { header, rows };
}

export function columnIndex(table: SweepTable, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.header);
  }
  return idx;
}

/** Numeric column; null cells and non-numeric cells become null entries. */
export function numericColumn(table: SweepTable, name: string): (number | null)[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row, i) => {
    const cell = row[idx];
    if (cell === null) {
      return null;
    }
    const v = Number(cell);
    if (!Number.isFinite(v)) {
      throw new CsvParseError(`column "${name}" has non-numeric cell "${cell}"`, i + 2);
    }
    return v;
  });
}
