import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { REGION_COLORS } from "../src/kinds.js";
import { render } from "../src/render.js";

const DATA = join(__dirname, "..", "testdata");

function load(name: string): string {
  return readFileSync(join(DATA, name), "utf8");
}

describe("phase_pair", () => {
  const svg = render("phase_pair", load("phase_pair.csv"));

  it("renders all three region colors and the legend", () => {
    for (const key of ["green", "orange", "red"] as const) {
      expect(svg).toContain(REGION_COLORS[key]);
    }
    expect(svg).toContain("deterministic extinct, random survives");
  });

  it("is a complete SVG document", () => {
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
  });

  it("is pure (same input, same bytes)", () => {
    expect(render("phase_pair", load("phase_pair.csv"))).toBe(svg);
  });

  it("fails loudly on schema mismatch", () => {
    expect(() => render("phase_pair", load("boundary_scatter.csv")))
      .toThrow(/required column 'g_over_r' missing/);
  });
});

describe("boundary_scatter", () => {
  const svg = render("boundary_scatter", load("boundary_scatter.csv"));

  it("draws the deterministic curve and the mode clouds", () => {
    expect(svg).toContain("deterministic (1 mode)");
    expect(svg).toContain("2 modes");
    expect(svg).toContain("20 modes");
    expect(svg).toContain("<polyline");   // the 1-mode curve
    expect((svg.match(/<line/g) ?? []).length).toBeGreaterThan(40); // crosses
  });

  it("fails on the wrong input kind", () => {
    expect(() => render("boundary_scatter", load("kernel_density.csv")))
      .toThrow(/required column 'vartheta' missing/);
  });
});

describe("kernel_density", () => {
  const svg = render("kernel_density", load("kernel_density.csv"));

  it("draws curves for continuous kernels and stems for atoms", () => {
    expect((svg.match(/<polyline/g) ?? []).length).toBeGreaterThanOrEqual(4);
    expect(svg).toContain("equal");
    expect(svg).toContain("det:z=0.25");
  });

  it("keeps the symmetric shape (same density at mirrored thetas)", () => {
    // spot-check the rendered curve for beta:alpha=4.0 is symmetric by
    // re-parsing the csv rather than the svg
    const lines = load("kernel_density.csv").split("\n")
      .filter((l) => l.startsWith("beta:alpha=4.0"));
    const vals = lines.map((l) => l.split(","))
      .filter((c) => c[2] !== "")
      .map((c) => [Number(c[1]), Number(c[2])] as const);
    const first = vals[0];
    const last = vals[vals.length - 1];
    expect(first[1]).toBeCloseTo(last[1], 10);
    expect(first[0]).toBeCloseTo(1 - last[0], 10);
  });
});

describe("kind dispatch", () => {
  it("rejects unknown kinds", () => {
    expect(() => render("heatmap", "a\n1\n")).toThrow(/unknown figure kind/);
  });
});
