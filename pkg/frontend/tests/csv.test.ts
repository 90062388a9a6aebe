import { describe, expect, it } from "vitest";

import { columnIndex, numericColumn, parseCsv, stringColumn } from "../src/csv.js";

const SAMPLE = `# manifest: {"subcommand":"demo"}
a,b,c
1,x,2.5
3,y,
`;

describe("parseCsv", () => {
  it("reads header, rows and manifest", () => {
    const t = parseCsv(SAMPLE);
    expect(t.columns).toEqual(["a", "b", "c"]);
    expect(t.rows).toHaveLength(2);
    expect(t.manifest).toContain("demo");
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/expected 2/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/no header/);
  });
});

describe("column access", () => {
  const t = parseCsv(SAMPLE);

  it("finds columns and fails loudly otherwise", () => {
    expect(columnIndex(t, "b")).toBe(1);
    expect(() => columnIndex(t, "zz")).toThrow(/required column 'zz' missing/);
  });

  it("parses numerics with empty cells as NaN", () => {
    expect(numericColumn(t, "a")).toEqual([1, 3]);
    const c = numericColumn(t, "c");
    expect(c[0]).toBe(2.5);
    expect(Number.isNaN(c[1])).toBe(true);
  });

  it("rejects non-numeric cells", () => {
    expect(() => numericColumn(t, "b")).toThrow(/not numeric/);
  });

  it("reads strings", () => {
    expect(stringColumn(t, "b")).toEqual(["x", "y"]);
  });
});
