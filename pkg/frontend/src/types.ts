/** Wire types mirroring the service's dataset-record field names. */

export type MetricKey =
  | "overall_quality"
  | "understandability"
  | "trustworthiness"
  | "satisfaction"
  | "sufficiency"
  | "completeness"
  | "accuracy";

export const METRIC_KEYS: MetricKey[] = [
  "overall_quality",
  "understandability",
  "trustworthiness",
  "satisfaction",
  "sufficiency",
  "completeness",
  "accuracy",
];

export type LikertValue = 1 | 2 | 3;

export interface ExplanationRecord {
  question: string;
  answers: string[];
  label: string;
  predicted_label: string;
  label_matched: boolean;
  concept: string[];
  topk: string[];
  explanation_why: string;
  explanation_why_not: string;
  debugger_score: string;
  embedding: number[];
  id?: string;
}

export type ItemStatus = "pending" | "approved" | "flagged" | "needs-manual-review";

export interface ReviewItem {
  item_id: string;
  instance: ExplanationRecord;
  status: ItemStatus;
  flags: string[];
  submitted_scores: Record<string, unknown> | null;
  revision: number;
  revision_history: ExplanationRecord[];
  created_seq: number;
}

export interface ScoresBody extends Record<MetricKey, LikertValue> {
  evaluator: string;
}
