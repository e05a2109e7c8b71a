/** Thin typed client over the /v1 review endpoints. */

import type { ReviewItem, ScoresBody } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ReviewApi {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (body as { error?: string }).error ?? resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  async health(): Promise<boolean> {
    try {
      await this.request<{ status: string }>("/v1/health");
      return true;
    } catch {
      return false;
    }
  }

  async nextItem(): Promise<ReviewItem | null> {
    const doc = await this.request<{ item: ReviewItem | null }>("/v1/review/next");
    return doc.item;
  }

  async listItems(): Promise<ReviewItem[]> {
    const doc = await this.request<{ items: ReviewItem[] }>("/v1/review/items");
    return doc.items;
  }

  async getItem(itemId: string): Promise<ReviewItem | null> {
    const items = await this.listItems();
    return items.find((i) => i.item_id === itemId) ?? null;
  }

  async submitScores(itemId: string, body: ScoresBody): Promise<ReviewItem> {
    const doc = await this.request<{ item: ReviewItem }>(`/v1/review/${itemId}/scores`, {
      method: "POST",
      body: JSON.stringify(body),
    });
    return doc.item;
  }

  async flagItem(itemId: string, note: string): Promise<ReviewItem> {
    const doc = await this.request<{ item: ReviewItem }>(`/v1/review/${itemId}/flag`, {
      method: "POST",
      body: JSON.stringify({ note }),
    });
    return doc.item;
  }
}
