import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

const ROOT = join(__dirname, "..");
const CLI = join(ROOT, "dist", "cli.js");
const DATA = join(ROOT, "testdata");

const built = existsSync(CLI);
const maybe = built ? describe : describe.skip;

maybe("cli (built)", () => {
  it("renders each kind end to end", () => {
    const dir = mkdtempSync(join(tmpdir(), "pbr-"));
    for (const [kind, file] of [
      ["phase_pair", "phase_pair.csv"],
      ["boundary_scatter", "boundary_scatter.csv"],
      ["kernel_density", "kernel_density.csv"],
    ] as const) {
      const out = join(dir, `${kind}.svg`);
      execFileSync("node", [CLI, "render", "--kind", kind,
        "--in", join(DATA, file), "--out", out]);
      const svg = readFileSync(out, "utf8");
      expect(svg).toContain("<svg ");
    }
  });

  it("exits 2 on a bad kind", () => {
    let code = 0;
    try {
      execFileSync("node", [CLI, "render", "--kind", "pie",
        "--in", join(DATA, "phase_pair.csv"), "--out", "/tmp/x.svg"],
        { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(2);
  });

  it("exits 2 on a missing input file", () => {
    let code = 0;
    try {
      execFileSync("node", [CLI, "render", "--kind", "phase_pair",
        "--in", "/nonexistent.csv", "--out", "/tmp/x.svg"], { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(2);
  });
});
