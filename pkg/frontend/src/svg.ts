/** String-building SVG document with a fixed plotting frame.
 *
 * Rendering is pure: the same inputs produce the same bytes (no
 * timestamps, no randomness).
 */

import { Scale, ticks } from "./scales.js";

const XML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeXml(s: string): string {
  return s.replace(/[&<>"]/g, (c) => XML_ESCAPES[c]);
}

export const FRAME = {
  width: 720,
  height: 480,
  margin: { left: 64, right: 24, top: 36, bottom: 52 },
};

export function plotArea() {
  const { width, height, margin } = FRAME;
  return {
    x0: margin.left,
    x1: width - margin.right,
    y0: height - margin.bottom, // y grows downward in SVG: y0 is the axis line
    y1: margin.top,
  };
}

export class SvgDoc {
  private parts: string[] = [];

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${extra}/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  cross(x: number, y: number, size: number, stroke: string): void {
    this.line(x - size, y - size, x + size, y + size, stroke, 1.2);
    this.line(x - size, y + size, x + size, y - size, stroke, 1.2);
  }

  text(x: number, y: number, content: string, extra = ""): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" font-size="12"${extra}>${escapeXml(content)}</text>`,
    );
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string): void {
    const a = plotArea();
    this.line(a.x0, a.y0, a.x1, a.y0, "#222");
    this.line(a.x0, a.y0, a.x0, a.y1, "#222");
    for (const t of ticks(xScale.domain[0], xScale.domain[1])) {
      const x = xScale(t);
      if (x < a.x0 - 1e-6 || x > a.x1 + 1e-6) continue;
      this.line(x, a.y0, x, a.y0 + 5, "#222");
      this.text(x, a.y0 + 18, trimNum(t), ' text-anchor="middle"');
    }
    for (const t of ticks(yScale.domain[0], yScale.domain[1])) {
      const y = yScale(t);
      if (y > a.y0 + 1e-6 || y < a.y1 - 1e-6) continue;
      this.line(a.x0 - 5, y, a.x0, y, "#222");
      this.text(a.x0 - 8, y + 4, trimNum(t), ' text-anchor="end"');
    }
    this.text((a.x0 + a.x1) / 2, FRAME.height - 12, xLabel, ' text-anchor="middle"');
    this.text(16, (a.y0 + a.y1) / 2, yLabel,
      ` text-anchor="middle" transform="rotate(-90 16 ${fmt((a.y0 + a.y1) / 2)})"`);
  }

  title(content: string): void {
    this.text(FRAME.width / 2, 20, content, ' text-anchor="middle" font-weight="bold"');
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${FRAME.width}" height="${FRAME.height}" viewBox="0 0 ${FRAME.width} ${FRAME.height}">\n` +
      `<rect x="0" y="0" width="${FRAME.width}" height="${FRAME.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

function trimNum(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e5 || a < 1e-3)) return v.toExponential(1);
  return Number(v.toPrecision(6)).toString();
}
