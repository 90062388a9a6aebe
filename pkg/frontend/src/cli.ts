#!/usr/bin/env node
/** parabranch-render: turn parabranch CSV outputs into SVG figures.
 *
 *   parabranch-render render --kind phase_pair --in phase.csv --out phase.svg
 *
 * Exit codes: 0 ok, 2 argument/format errors.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { KINDS, render } from "./render.js";

export function main(argv: string[]): number {
  if (argv[0] !== "render") {
    process.stderr.write("usage: parabranch-render render --kind <k> --in <csv> --out <svg>\n");
    return 2;
  }
  let values: { kind?: string; in?: string; out?: string };
  try {
    ({ values } = parseArgs({
      args: argv.slice(1),
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
      },
    }));
  } catch (err) {
    process.stderr.write(`parabranch-render: ${(err as Error).message}\n`);
    return 2;
  }
  if (!values.kind || !values.in || !values.out) {
    process.stderr.write(
      `parabranch-render: need --kind (${KINDS.join("|")}), --in and --out\n`,
    );
    return 2;
  }
  let csvText: string;
  try {
    csvText = readFileSync(values.in, "utf8");
  } catch (err) {
    process.stderr.write(`parabranch-render: cannot read ${values.in}: ${(err as Error).message}\n`);
    return 2;
  }
  try {
    const svg = render(values.kind, csvText);
    writeFileSync(values.out, svg);
  } catch (err) {
    process.stderr.write(`parabranch-render: ${(err as Error).message}\n`);
    return 2;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
