/** Scripted review session against the real service (mock LLM backend).
 *
 * Spawns the Python service, enqueues 5 items through POST /v1/explain, then
 * drives the controller exactly like the browser would: 3 approvals, 2 flags;
 * the flagged items must reappear with revision + 1, and no submission may
 * carry a value outside {1, 2, 3} (the service would 400 it).
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { ReviewController } from "../src/controller.js";
import { METRIC_KEYS } from "../src/types.js";
import type { LikertValue } from "../src/types.js";
import { MemoryStorage } from "./fake_server.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;

const pythonAvailable =
  spawnSync("python3", ["-c", "import kgexplain"], { timeout: 30_000 }).status === 0;

let proc: ChildProcess | null = null;

async function waitForHealth(timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/v1/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service did not become healthy");
}

describe.skipIf(!pythonAvailable)("live service session", () => {
  beforeAll(async () => {
    const storeDir = mkdtempSync(join(tmpdir(), "kgx-review-"));
    proc = spawn("python3", [join(__dirname, "serve_fixture.py"), String(PORT), storeDir], {
      stdio: "ignore",
    });
    await waitForHealth();
  }, 30_000);

  afterAll(() => {
    proc?.kill();
  });

  it("reviews 5 items end to end: 3 approvals, 2 flags with revision+1", async () => {
    const itemIds: string[] = [];
    for (let i = 0; i < 5; i++) {
      const resp = await fetch(`${BASE}/v1/explain`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          question: `case ${i}: what do cats chase around the garden?`,
          options: ["mice", "yarn", "cars", "dreams", "shadows"],
        }),
      });
      expect(resp.status).toBe(200);
      const doc = (await resp.json()) as { review_item_id: string };
      itemIds.push(doc.review_item_id);
    }

    const api = new ReviewApi(BASE);
    const controller = new ReviewController(api, new MemoryStorage(), () => {}, "e2e", 100, 100);
    const toFlag = new Set([itemIds[1], itemIds[3]]);
    const seenAfterFlag: string[] = [];

    // regenerated items return to the front of the queue: flag the two
    // designated items on first sight, approve everything else
    for (let guard = 0; guard < 20; guard++) {
      await controller.loadNext();
      const state = controller.getState();
      if (state.phase === "empty") break;
      const item = state.item!;
      if (toFlag.has(item.item_id) && item.revision === 0) {
        controller.setFlagNote("the why text should cite the reason elements");
        expect(await controller.submitFlag()).toBe(true);
      } else {
        if (toFlag.has(item.item_id)) {
          expect(item.revision).toBe(1);
          expect(item.status).toBe("pending");
          seenAfterFlag.push(item.item_id);
        }
        for (const [i, key] of METRIC_KEYS.entries()) {
          controller.select(key, ((i % 3) + 1) as LikertValue);
        }
        expect(await controller.submitScores()).toBe(true);
      }
    }

    expect(controller.getState().phase).toBe("empty");
    expect(new Set(seenAfterFlag)).toEqual(toFlag);

    const items = (await (await fetch(`${BASE}/v1/review/items`)).json()) as {
      items: Array<{ item_id: string; status: string; revision: number }>;
    };
    expect(items.items).toHaveLength(5);
    for (const item of items.items) {
      expect(item.status).toBe("approved");
      expect(item.revision).toBe(toFlag.has(item.item_id) ? 1 : 0);
    }
  }, 60_000);

  it("rejects an out-of-scale submission the guard would never send", async () => {
    // bypass the controller on purpose: the service itself is the backstop
    const resp = await fetch(`${BASE}/v1/explain`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        question: "backstop case: what do cats chase around the garden?",
        options: ["mice", "yarn", "cars", "dreams", "shadows"],
      }),
    });
    const { review_item_id } = (await resp.json()) as { review_item_id: string };
    const bad = await fetch(`${BASE}/v1/review/${review_item_id}/scores`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ...Object.fromEntries(METRIC_KEYS.map((k) => [k, 3])), accuracy: 5 }),
    });
    expect(bad.status).toBe(400);
  }, 30_000);
});
