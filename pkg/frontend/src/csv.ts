/** Minimal CSV reader for the parabranch CLI outputs.
 *
 * The files are plain comma-separated tables with a header row, optionally
 * preceded by `# manifest: {...}` comment lines.  No quoting is used by the
 * producer, so none is supported here.
 */

export interface Table {
  columns: string[];
  rows: string[][];
  manifest: string | null;
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  let manifest: string | null = null;
  let start = 0;
  while (start < lines.length && lines[start].startsWith("#")) {
    const m = lines[start].match(/^#\s*manifest:\s*(.*)$/);
    if (m) manifest = m[1];
    start += 1;
  }
  if (start >= lines.length) {
    throw new Error("CSV has no header row");
  }
  const columns = lines[start].split(",").map((c) => c.trim());
  const rows: string[][] = [];
  for (let i = start + 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `CSV row ${i + 1} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    rows.push(cells);
  }
  return { columns, rows, manifest };
}

/** Column accessor that fails loudly when a required column is missing. */
export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `required column '${name}' missing (have: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((r, k) => {
    const cell = r[idx];
    if (cell === "") return NaN;
    const v = Number(cell);
    if (Number.isNaN(v) && cell !== "nan") {
      throw new Error(`row ${k + 1}: cell '${cell}' in column '${name}' is not numeric`);
    }
    return v;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = columnIndex(table, name);
  return table.rows.map((r) => r[idx]);
}
