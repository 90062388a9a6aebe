/** The three figure kinds rendered from parabranch CSV outputs. */

import { Table, numericColumn, stringColumn } from "./csv.js";
import { extent, linearScale } from "./scales.js";
import { FRAME, SvgDoc, plotArea } from "./svg.js";

// region colors follow the survival legend: green = survival under both
// kernels, orange = deterministic extinct / random survives, red = both extinct
export const REGION_COLORS: Record<string, string> = {
  green: "#2e9e4f",
  orange: "#f29e38",
  red: "#d7372f",
  invalid: "#b026c4",
};

const SERIES_PALETTE = [
  "#3567c4", "#f29e38", "#2e9e4f", "#d7372f", "#8450b0", "#4fb8c9",
  "#b5851e", "#777777",
];

export function renderKernelDensity(table: Table): string {
  const kernels = stringColumn(table, "kernel");
  const thetas = numericColumn(table, "theta");
  const densities = numericColumn(table, "density");
  const masses = numericColumn(table, "mass");

  const names = [...new Set(kernels)];
  const doc = new SvgDoc();
  const a = plotArea();
  const finiteDens = densities.filter(Number.isFinite);
  const finiteMass = masses.filter(Number.isFinite);
  const yMax = Math.max(
    finiteDens.length ? Math.max(...finiteDens) : 0,
    finiteMass.length ? Math.max(...finiteMass) : 0,
    1e-12,
  );
  const x = linearScale([0, 1], [a.x0, a.x1]);
  const y = linearScale([0, yMax * 1.05], [a.y0, a.y1]);
  doc.axes(x, y, "theta", "density / atom mass");
  doc.title("partitioning kernels");

  names.forEach((name, k) => {
    const color = SERIES_PALETTE[k % SERIES_PALETTE.length];
    const curve: Array<[number, number]> = [];
    for (let i = 0; i < kernels.length; i++) {
      if (kernels[i] !== name) continue;
      if (Number.isFinite(densities[i])) {
        curve.push([x(thetas[i]), y(densities[i])]);
      } else if (Number.isFinite(masses[i])) {
        const px = x(thetas[i]);
        doc.line(px, y(0), px, y(masses[i]), color, 2);
        doc.rect(px - 2.5, y(masses[i]) - 2.5, 5, 5, color);
      }
    }
    if (curve.length > 1) doc.polyline(curve, color);
    doc.rect(a.x0 + 10, a.y1 + 6 + 16 * k, 10, 10, color);
    doc.text(a.x0 + 26, a.y1 + 15 + 16 * k, name);
  });
  return doc.toString();
}

export function renderPhasePair(table: Table): string {
  const grs = numericColumn(table, "g_over_r");
  const params = numericColumn(table, "param");
  const colors = stringColumn(table, "color");
  // the remaining schema columns must exist even if unused visually
  for (const col of ["m_det", "d_det", "m_rand", "d_rand"]) numericColumn(table, col);
  for (const col of ["regime_det", "regime_rand"]) stringColumn(table, col);

  const xs = [...new Set(params)].sort((p, q) => p - q);
  const ys = [...new Set(grs.map((g) => Math.log(g)))].sort((p, q) => p - q);
  const xIndex = new Map(xs.map((v, i) => [v, i]));
  const yIndex = new Map(ys.map((v, i) => [v, i]));

  const grid: string[][] = ys.map(() => xs.map(() => "invalid"));
  for (let i = 0; i < grs.length; i++) {
    const xi = xIndex.get(params[i])!;
    const yi = yIndex.get(Math.log(grs[i]))!;
    grid[yi][xi] = colors[i];
  }

  const doc = new SvgDoc();
  const a = plotArea();
  const x = linearScale(extent(xs), [a.x0, a.x1]);
  const y = linearScale(extent(ys), [a.y0, a.y1]);
  const cw = (a.x1 - a.x0) / xs.length;
  doc.axes(x, y, "kernel parameter (alpha / z_alpha pairing)", "ln(g/r)");
  doc.title("fate of the mean population: deterministic vs random partitioning");

  // vertical run-length merging keeps the SVG small on 200x200 grids
  const cellH = ys.length > 1 ? Math.abs(y(ys[0]) - y(ys[1])) : 8;
  for (let xi = 0; xi < xs.length; xi++) {
    let yi = 0;
    while (yi < ys.length) {
      let yj = yi;
      while (yj + 1 < ys.length && grid[yj + 1][xi] === grid[yi][xi]) yj++;
      const color = REGION_COLORS[grid[yi][xi]] ?? REGION_COLORS.invalid;
      const top = y(ys[yj]) - cellH / 2;
      const height = y(ys[yi]) - y(ys[yj]) + cellH;
      doc.rect(x(xs[xi]) - cw / 2, top, cw + 0.5, height, color);
      yi = yj + 1;
    }
  }
  const legend: Array<[string, string]> = [
    ["green", "both survive"],
    ["orange", "deterministic extinct, random survives"],
    ["red", "both extinct"],
  ];
  legend.forEach(([key, label], k) => {
    doc.rect(a.x0 + 10, a.y1 + 6 + 16 * k, 10, 10, REGION_COLORS[key]);
    doc.text(a.x0 + 26, a.y1 + 15 + 16 * k, label, ' fill="#111"');
  });
  return doc.toString();
}

export function renderBoundaryScatter(table: Table): string {
  const vts = numericColumn(table, "vartheta");
  const bounds = numericColumn(table, "boundary");
  const modes = numericColumn(table, "n_modes");
  numericColumn(table, "seed");
  numericColumn(table, "draw_index");

  const doc = new SvgDoc();
  const a = plotArea();
  const lnB = bounds.map(Math.log);
  const x = linearScale([0, 0.5], [a.x0, a.x1]);
  const y = linearScale(extent(lnB), [a.y0, a.y1]);
  doc.axes(x, y, "expected minimal share", "ln(critical g/r)");
  doc.title("survival boundaries of finite-point kernels");

  const groups = [...new Set(modes)].sort((p, q) => p - q);
  groups.forEach((n, k) => {
    const color = n === 1 ? "#2e9e4f" : SERIES_PALETTE[k % SERIES_PALETTE.length];
    const pts: Array<[number, number, number]> = [];
    for (let i = 0; i < vts.length; i++) {
      if (modes[i] === n) pts.push([vts[i], lnB[i], i]);
    }
    pts.sort((p, q) => p[0] - q[0]);
    if (n === 1) {
      // single-mode draws are the deterministic family: draw them as a curve
      doc.polyline(pts.map(([vx, vy]) => [x(vx), y(vy)]), color, 2);
    } else {
      for (const [vx, vy] of pts) doc.cross(x(vx), y(vy), 3.2, color);
    }
    doc.rect(a.x0 + 10, a.y1 + 6 + 16 * k, 10, 10, color);
    doc.text(a.x0 + 26, a.y1 + 15 + 16 * k,
      n === 1 ? "deterministic (1 mode)" : `${n} modes`);
  });
  return doc.toString();
}
