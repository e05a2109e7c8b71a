/** Review session state machine, independent of the DOM.
 *
 * Guarantees enforced here (and asserted by the tests):
 * - a score submission always carries all seven metrics, values in {1,2,3};
 * - submit stays disabled until the form is complete or a flag note exists;
 * - drafts survive page reloads via the injected storage;
 * - optimistic submissions roll back (form kept) on 4xx; 409 reloads the item.
 */

import { ApiError, ReviewApi } from "./api.js";
import { METRIC_KEYS } from "./types.js";
import type { LikertValue, MetricKey, ReviewItem, ScoresBody } from "./types.js";

export interface DraftStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export type Phase = "loading" | "reviewing" | "empty" | "error" | "regenerating";

export interface ControllerState {
  phase: Phase;
  item: ReviewItem | null;
  selections: Partial<Record<MetricKey, LikertValue>>;
  flagNote: string;
  banner: string | null;
  reviewedCount: number;
}

interface Draft {
  selections: Partial<Record<MetricKey, LikertValue>>;
  flagNote: string;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class ReviewController {
  private state: ControllerState = {
    phase: "loading",
    item: null,
    selections: {},
    flagNote: "",
    banner: null,
    reviewedCount: 0,
  };

  constructor(
    private api: ReviewApi,
    private storage: DraftStorage,
    private onChange: (state: ControllerState) => void = () => {},
    private evaluator: string = "reviewer",
    private pollIntervalMs: number = 250,
    private pollAttempts: number = 40,
  ) {}

  getState(): ControllerState {
    return { ...this.state, selections: { ...this.state.selections } };
  }

  private emit(patch: Partial<ControllerState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.getState());
  }

  private draftKey(itemId: string): string {
    return `review-draft:${itemId}`;
  }

  private persistDraft(): void {
    if (!this.state.item) return;
    const draft: Draft = { selections: this.state.selections, flagNote: this.state.flagNote };
    this.storage.setItem(this.draftKey(this.state.item.item_id), JSON.stringify(draft));
  }

  private restoreDraft(itemId: string): Draft {
    const raw = this.storage.getItem(this.draftKey(itemId));
    if (!raw) return { selections: {}, flagNote: "" };
    try {
      const draft = JSON.parse(raw) as Draft;
      const selections: Partial<Record<MetricKey, LikertValue>> = {};
      for (const key of METRIC_KEYS) {
        const v = draft.selections?.[key];
        if (v === 1 || v === 2 || v === 3) selections[key] = v;
      }
      return { selections, flagNote: typeof draft.flagNote === "string" ? draft.flagNote : "" };
    } catch {
      return { selections: {}, flagNote: "" };
    }
  }

  async loadNext(): Promise<void> {
    this.emit({ phase: "loading", banner: null });
    let item: ReviewItem | null;
    try {
      item = await this.api.nextItem();
    } catch (err) {
      this.emit({ phase: "error", banner: `Could not reach the review service (${String(err)}). Retry?` });
      return;
    }
    if (!item) {
      this.emit({ phase: "empty", item: null, selections: {}, flagNote: "" });
      return;
    }
    const draft = this.restoreDraft(item.item_id);
    this.emit({ phase: "reviewing", item, selections: draft.selections, flagNote: draft.flagNote });
  }

  select(metric: MetricKey, value: number): void {
    if (value !== 1 && value !== 2 && value !== 3) {
      throw new Error(`score ${value} is outside the three-point scale`);
    }
    if (!METRIC_KEYS.includes(metric)) {
      throw new Error(`unknown metric ${metric}`);
    }
    this.emit({ selections: { ...this.state.selections, [metric]: value as LikertValue } });
    this.persistDraft();
  }

  setFlagNote(text: string): void {
    this.emit({ flagNote: text });
    this.persistDraft();
  }

  /** Normalized [0,1] preview of a selection: (v - 1) / 2. */
  normalizedPreview(metric: MetricKey): number | null {
    const v = this.state.selections[metric];
    return v === undefined ? null : (v - 1) / 2;
  }

  formComplete(): boolean {
    return METRIC_KEYS.every((key) => this.state.selections[key] !== undefined);
  }

  canSubmit(): boolean {
    return this.formComplete() || this.state.flagNote.trim() !== "";
  }

  private buildScoresBody(): ScoresBody {
    const body = { evaluator: this.evaluator } as ScoresBody;
    for (const key of METRIC_KEYS) {
      const v = this.state.selections[key];
      if (v !== 1 && v !== 2 && v !== 3) {
        throw new Error(`metric ${key} is not selected`);
      }
      body[key] = v;
    }
    return body;
  }

  async submitScores(): Promise<boolean> {
    const item = this.state.item;
    if (!item) return false;
    if (!this.formComplete()) {
      this.emit({ banner: "Select a score for all seven questions (or flag the item)." });
      return false;
    }
    const body = this.buildScoresBody();
    try {
      await this.api.submitScores(item.item_id, body);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.emit({ banner: "Item changed under you; reloading." });
        await this.loadNext();
        return false;
      }
      // 4xx/5xx: optimistic UI rolls back, entered values stay
      this.emit({ banner: `Submission failed: ${String(err)}` });
      return false;
    }
    this.storage.removeItem(this.draftKey(item.item_id));
    this.emit({ reviewedCount: this.state.reviewedCount + 1, selections: {}, flagNote: "" });
    await this.loadNext();
    return true;
  }

  /** Flag the item and wait for it to leave regeneration (or go to manual review). */
  async submitFlag(): Promise<boolean> {
    const item = this.state.item;
    if (!item) return false;
    const note = this.state.flagNote.trim();
    if (!note) {
      this.emit({ banner: "Describe the discrepancy before flagging." });
      return false;
    }
    let flagged: ReviewItem;
    try {
      flagged = await this.api.flagItem(item.item_id, note);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.emit({ banner: "Item changed under you; reloading." });
        await this.loadNext();
        return false;
      }
      this.emit({ banner: `Flag failed: ${String(err)}` });
      return false;
    }
    this.storage.removeItem(this.draftKey(item.item_id));
    if (flagged.status === "needs-manual-review") {
      this.emit({ banner: `${item.item_id} exhausted its refinement rounds; sent to manual review.` });
      await this.loadNext();
      return true;
    }
    this.emit({ phase: "regenerating", selections: {}, flagNote: "" });
    await this.waitForRegeneration(item.item_id, item.revision);
    await this.loadNext();
    return true;
  }

  private async waitForRegeneration(itemId: string, priorRevision: number): Promise<void> {
    for (let attempt = 0; attempt < this.pollAttempts; attempt++) {
      let current: ReviewItem | null = null;
      try {
        current = await this.api.getItem(itemId);
      } catch {
        // transient poll failure: keep waiting
      }
      if (current && current.status === "pending" && current.revision === priorRevision + 1) {
        return;
      }
      if (current && current.status === "needs-manual-review") {
        return;
      }
      await sleep(this.pollIntervalMs);
    }
    this.emit({ banner: `Regeneration of ${itemId} is taking long; it will reappear in the queue.` });
  }
}
