/** Shared types mirroring the labeling API payloads. */
/** Most specific first; button order and shortcut digits follow this. */
export const CATEGORIES = [
    "match_significant",
    "match_insignificant",
    "refusal_copyright",
    "refusal_other",
    "hallucination",
    "non_literal",
    "other",
];
export const CATEGORY_LABELS = {
    match_significant: "Match – significant",
    match_insignificant: "Match – insignificant",
    refusal_copyright: "Refusal – copyright",
    refusal_other: "Refusal – other",
    hallucination: "Hallucination",
    non_literal: "Non-literal",
    other: "Other",
};
