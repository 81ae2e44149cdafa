/** Shared types mirroring the labeling API payloads. */

export type Category =
  | "match_significant"
  | "match_insignificant"
  | "refusal_copyright"
  | "refusal_other"
  | "hallucination"
  | "non_literal"
  | "other";

/** Most specific first; button order and shortcut digits follow this. */
export const CATEGORIES: readonly Category[] = [
  "match_significant",
  "match_insignificant",
  "refusal_copyright",
  "refusal_other",
  "hallucination",
  "non_literal",
  "other",
];

export const CATEGORY_LABELS: Record<Category, string> = {
  match_significant: "Match – significant",
  match_insignificant: "Match – insignificant",
  refusal_copyright: "Refusal – copyright",
  refusal_other: "Refusal – other",
  hallucination: "Hallucination",
  non_literal: "Non-literal",
  other: "Other",
};

/** [start, end, matchedChars] character offsets into the output text. */
export type Highlight = [number, number, number];

export interface ReviewItem {
  record_id: string;
  model_id: string;
  corpus_tag: string;
  prompt_text: string;
  output_text: string;
  highlights: Highlight[];
  suggestion: Category | null;
}

export interface QueueResponse {
  items: ReviewItem[];
  remaining: number;
}

export interface DistributionResponse {
  total: number;
  proportions: Partial<Record<Category, number>>;
  categories: Category[];
}

export interface LabelCommit {
  record_id: string;
  labels: Category[];
  annotator: string;
  note: string;
}
