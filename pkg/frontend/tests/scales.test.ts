import { describe, expect, it } from "vitest";

import { extent, linearScale, ticks } from "../src/scales.js";

describe("linearScale", () => {
  it("maps the domain onto the range", () => {
    const s = linearScale([0, 10], [100, 200]);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
    expect(s(5)).toBe(150);
  });

  it("inverts direction for SVG y axes", () => {
    const s = linearScale([0, 1], [400, 40]);
    expect(s(0)).toBe(400);
    expect(s(1)).toBe(40);
  });
});

describe("ticks", () => {
  it("produces round steps covering the domain", () => {
    const t = ticks(0, 1, 6);
    expect(t[0]).toBeCloseTo(0);
    expect(t[t.length - 1]).toBeCloseTo(1);
    expect(t).toContain(0.4);
  });

  it("handles negative spans", () => {
    const t = ticks(-3, 7, 6);
    expect(t).toContain(0);
    expect(Math.min(...t)).toBeGreaterThanOrEqual(-3);
    expect(Math.max(...t)).toBeLessThanOrEqual(7 + 1e-9);
  });
});

describe("extent", () => {
  it("skips non-finite values", () => {
    expect(extent([1, NaN, 3, Infinity])).toEqual([1, 3]);
  });

  it("pads degenerate extents", () => {
    expect(extent([2, 2])).toEqual([1.5, 2.5]);
  });

  it("throws when nothing is finite", () => {
    expect(() => extent([NaN])).toThrow(/no finite/);
  });
});
