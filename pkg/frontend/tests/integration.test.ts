/** End-to-end checks against the real render service.
 *
 * Spawns `python3 -m lfsweep.cli serve` from the repository root, scrubs
 * the quilt views, and cross-checks the split-mode PSNR header against the
 * CLI `compare` report.  Skipped when the Python package is unavailable
 * (LFSWEEP_SKIP_INTEGRATION=1 also skips).
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

const ROOT = resolve(__dirname, "..", "..");
const SCENE = "synthetic:shell";
const PORT = 18000 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;

function pythonReady(): boolean {
  if (process.env.LFSWEEP_SKIP_INTEGRATION === "1") return false;
  const probe = spawnSync("python3", ["-c", "import lfsweep"], { cwd: ROOT });
  return probe.status === 0;
}

const enabled = pythonReady();
const suite = enabled ? describe : describe.skip;

let service: ChildProcess | null = null;

suite("live service integration", () => {
  beforeAll(async () => {
    service = spawn(
      "python3",
      ["-m", "lfsweep.cli", "serve", "--scene", SCENE, "--port", String(PORT)],
      { cwd: ROOT, stdio: ["ignore", "pipe", "pipe"] },
    );
    const deadline = Date.now() + 180_000;
    for (;;) {
      try {
        const resp = await fetch(`${BASE}/api/scene`);
        if (resp.ok) break;
      } catch {
        /* not up yet */
      }
      if (Date.now() > deadline) throw new Error("render service did not come up");
      await new Promise((r) => setTimeout(r, 500));
    }
  }, 200_000);

  afterAll(() => {
    service?.kill("SIGTERM");
  });

  it("serves scene metadata", async () => {
    const meta = (await (await fetch(`${BASE}/api/scene`)).json()) as { kind: string; count: number };
    expect(meta.kind).toBe("gaussian");
    expect(meta.count).toBeGreaterThan(0);
  });

  it("split-mode PSNR matches the CLI compare report", async () => {
    // the fresh session sits at the default config and pose, exactly what
    // the CLI renders; compare the center view
    const resp = await fetch(`${BASE}/api/frame?view=5&mode=split`);
    expect(resp.status).toBe(200);
    const headerPsnr = Number(resp.headers.get("x-psnr"));
    expect(Number.isFinite(headerPsnr)).toBe(true);

    const dir = mkdtempSync(join(tmpdir(), "lfsweep-it-"));
    try {
      const out = join(dir, "compare.json");
      const cli = spawnSync(
        "python3",
        ["-m", "lfsweep.cli", "compare", "--scene", SCENE, "--out", out],
        { cwd: ROOT, timeout: 180_000 },
      );
      expect(cli.status).toBe(0);
      const report = JSON.parse(readFileSync(out, "utf-8")) as {
        per_view: Array<{ view_col: number; view_row: number; psnr: number }>;
      };
      const center = report.per_view.find((r) => r.view_col === 5 && r.view_row === 1);
      expect(center).toBeDefined();
      expect(Math.abs(center!.psnr - headerPsnr)).toBeLessThan(0.01);
    } finally {
      rmSync(dir, { recursive: true, force: true });
    }
  }, 200_000);

  it("scrubbing nine views fetches nine distinct frames", async () => {
    const checksums = new Set<string>();
    for (let view = 1; view <= 9; view++) {
      const resp = await fetch(`${BASE}/api/frame?view=${view}&mode=sweep`);
      expect(resp.status).toBe(200);
      const bytes = Buffer.from(await resp.arrayBuffer());
      checksums.add(createHash("sha1").update(bytes).digest("hex"));
    }
    expect(checksums.size).toBe(9);
  }, 120_000);

  it("repeated frames are cache hits", async () => {
    await fetch(`${BASE}/api/frame?view=3&mode=sweep`);
    const again = await fetch(`${BASE}/api/frame?view=3&mode=sweep`);
    expect(again.headers.get("x-cache")).toBe("hit");
  });

  it("rejects invalid knob values with field errors", async () => {
    const resp = await fetch(`${BASE}/api/config`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ display: { fov_x: 300 } }),
    });
    expect(resp.status).toBe(422);
  });
});
