/** In-memory implementation of the /v1 review contract for controller tests.
 *
 * Mirrors the service state machine (flag -> async regeneration with
 * revision+1 -> pending; refinement bound of 3 -> needs-manual-review) and
 * records every scores body it receives so tests can assert the UI never
 * sends an out-of-scale value or a partial form.
 */

import { METRIC_KEYS } from "../src/types.js";
import type { ExplanationRecord, ReviewItem } from "../src/types.js";

const LEVELS = new Set([1, 2, 3]);

export function makeRecord(question: string, revisionTag = 0): ExplanationRecord {
  return {
    question,
    answers: ["mice", "yarn", "cars", "dreams", "shadows"],
    label: "mice",
    predicted_label: "mice",
    label_matched: true,
    concept: Array.from({ length: 50 }, (_, i) => `element_${i}`),
    topk: Array.from({ length: 5 }, (_, i) => `element_${i}`),
    explanation_why: `why text (rev ${revisionTag}) for: ${question}`,
    explanation_why_not: `why-not text (rev ${revisionTag}) for: ${question}`,
    debugger_score: "Faithfulness: 4 | Completeness: 3 | Accuracy: 4",
    embedding: [0, 0, 0, 0],
  };
}

export class FakeReviewServer {
  items = new Map<string, ReviewItem>();
  scoresReceived: Array<Record<string, unknown>> = [];
  flagsReceived: Array<{ itemId: string; note: string }> = [];
  regenerationDelayMs = 5;
  maxRefinements = 3;
  failNextWith: number | null = null;
  private seq = 0;

  enqueue(question: string): ReviewItem {
    this.seq += 1;
    const item: ReviewItem = {
      item_id: `item-${String(this.seq).padStart(6, "0")}`,
      instance: makeRecord(question),
      status: "pending",
      flags: [],
      submitted_scores: null,
      revision: 0,
      revision_history: [],
      created_seq: this.seq,
    };
    this.items.set(item.item_id, item);
    return item;
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private nextPending(): ReviewItem | null {
    const pending = [...this.items.values()].filter((i) => i.status === "pending");
    pending.sort((a, b) => a.created_seq - b.created_seq);
    return pending[0] ?? null;
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    if (this.failNextWith !== null) {
      const status = this.failNextWith;
      this.failNextWith = null;
      return this.json(status, { error: "injected failure" });
    }
    const path = new URL(url, "http://fake").pathname;
    const method = init?.method ?? "GET";
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    if (path === "/v1/health") return this.json(200, { status: "ok" });
    if (path === "/v1/review/next") return this.json(200, { item: this.nextPending() });
    if (path === "/v1/review/items") return this.json(200, { items: [...this.items.values()] });

    const match = path.match(/^\/v1\/review\/([^/]+)\/(scores|flag)$/);
    if (!match || method !== "POST") return this.json(404, { error: `no route ${method} ${path}` });
    const [, itemId, action] = match;
    const item = this.items.get(itemId);
    if (!item) return this.json(404, { error: `unknown review item '${itemId}'` });

    if (action === "scores") {
      this.scoresReceived.push(body);
      for (const key of METRIC_KEYS) {
        const v = body[key];
        if (typeof v !== "number" || !LEVELS.has(v)) {
          return this.json(400, { error: `metric ${key} must be one of 1, 2, 3` });
        }
      }
      if (item.status !== "pending") {
        return this.json(409, { error: `cannot score an item in status '${item.status}'` });
      }
      item.status = "approved";
      item.submitted_scores = body;
      return this.json(200, { item });
    }

    const note = body.note;
    if (typeof note !== "string" || note.trim() === "") {
      return this.json(400, { error: "note must be a nonempty string" });
    }
    if (item.status !== "pending") {
      return this.json(409, { error: `cannot flag an item in status '${item.status}'` });
    }
    this.flagsReceived.push({ itemId, note });
    item.flags.push(note);
    if (item.revision >= this.maxRefinements) {
      item.status = "needs-manual-review";
      return this.json(200, { item });
    }
    item.status = "flagged";
    setTimeout(() => {
      if (item.status !== "flagged") return;
      item.revision_history.push(item.instance);
      item.revision += 1;
      item.instance = makeRecord(item.instance.question, item.revision);
      item.status = "pending";
    }, this.regenerationDelayMs);
    return this.json(200, { item });
  };
}

export class MemoryStorage {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}
