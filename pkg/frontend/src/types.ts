/** Wire types for the triage HTTP API. */

export type Category =
  | "machine_superior"
  | "clinician_superior"
  | "same_low_specificity"
  | "indeterminate";

export const CATEGORIES: Category[] = [
  "machine_superior",
  "clinician_superior",
  "same_low_specificity",
  "indeterminate",
];

export const CATEGORY_LABELS: Record<Category, string> = {
  machine_superior: "Machine note superior",
  clinician_superior: "Clinician note superior",
  same_low_specificity: "Same diagnosis, low specificity",
  indeterminate: "Cannot determine",
};

export interface ReviewItem {
  encounter_id: string;
  note_a: string;
  note_b: string;
  judge_context: Record<string, unknown>;
  status: "pending" | "done";
  blinding_note: string;
  verdict?: VerdictRecord;
}

export interface QueuePayload {
  pending: ReviewItem[];
  total: number;
  done: number;
}

export interface VerdictRequest {
  encounter_id: string;
  category: Category;
  rationale: string;
  reviewer_id?: string;
}

export interface VerdictRecord {
  encounter_id: string;
  category: Category;
  rationale: string;
  reviewer_id: string;
  timestamp: string;
}

export interface VerdictAck {
  status: "recorded" | "duplicate";
  encounter_id: string;
}

export interface SummaryPayload {
  counts: Record<Category, number>;
  shares: Record<Category, number>;
  total_reviewed: number;
  total_pending: number;
}

export interface ExportPayload {
  verdicts: VerdictRecord[];
}
