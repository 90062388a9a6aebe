import { parseCsv } from "./csv.js";
import { renderBoundaryScatter, renderKernelDensity, renderPhasePair } from "./kinds.js";

export const KINDS = ["kernel_density", "phase_pair", "boundary_scatter"] as const;
export type Kind = (typeof KINDS)[number];

export function render(kind: string, csvText: string): string {
  const table = parseCsv(csvText);
  switch (kind) {
    case "kernel_density":
      return renderKernelDensity(table);
    case "phase_pair":
      return renderPhasePair(table);
    case "boundary_scatter":
      return renderBoundaryScatter(table);
    default:
      throw new Error(`unknown figure kind '${kind}' (expected ${KINDS.join(" | ")})`);
  }
}
