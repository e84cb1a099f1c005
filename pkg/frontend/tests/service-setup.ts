/** Spawns the layout service (offline mode) for the integration tests. */

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const SERVICE_PORT = 8437;
export const SERVICE_URL = `http://127.0.0.1:${SERVICE_PORT}`;

let child: ChildProcess | null = null;

export async function setup(): Promise<void> {
  const dataDir = mkdtempSync(join(tmpdir(), "kgscape-ui-test-"));
  child = spawn(
    "python3",
    ["-m", "uvicorn", "kgscape.service:create_app", "--factory", "--port", String(SERVICE_PORT)],
    {
      cwd: join(__dirname, "..", ".."),
      env: { ...process.env, KGSCAPE_OFFLINE: "1", KGSCAPE_DATA_DIR: dataDir },
      stdio: "ignore",
    },
  );
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${SERVICE_URL}/sessions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ graph: "academic", seed: 1 }),
      });
      if (response.ok || response.status === 201) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("layout service did not come up within 30s");
}

export async function teardown(): Promise<void> {
  if (child) {
    child.kill("SIGTERM");
    child = null;
  }
}
