import { describe, expect, it } from "vitest";

import {
  beginCommit,
  canCommit,
  commitFailed,
  commitSelection,
  commitSucceeded,
  currentItem,
  initialState,
  loadQueue,
  toggleCategory,
  toggleMultiMode,
} from "../src/state.js";
import { CATEGORIES, type ReviewItem } from "../src/types.js";

function item(id: string, suggestion: ReviewItem["suggestion"] = null): ReviewItem {
  return {
    record_id: id,
    model_id: "m",
    corpus_tag: "public_domain",
    prompt_text: "p",
    output_text: "o",
    highlights: [],
    suggestion,
  };
}

describe("session state", () => {
  it("prefills the server suggestion without committing it", () => {
    const s = loadQueue(initialState(), [item("r1", "match_significant")]);
    expect(s.selected).toEqual(["match_significant"]);
    expect(s.labeledCount).toBe(0);
  });

  it("single-label mode replaces the selection", () => {
    let s = loadQueue(initialState(), [item("r1")]);
    s = toggleCategory(s, "hallucination");
    s = toggleCategory(s, "other");
    expect(s.selected).toEqual(["other"]);
  });

  it("multi-label mode toggles categories", () => {
    let s = loadQueue(initialState(), [item("r1")]);
    s = toggleMultiMode(s);
    s = toggleCategory(s, "refusal_copyright");
    s = toggleCategory(s, "non_literal");
    expect(commitSelection(s)).toEqual(["refusal_copyright", "non_literal"]);
    s = toggleCategory(s, "refusal_copyright");
    expect(s.selected).toEqual(["non_literal"]);
  });

  it("commit selection is ordered most specific first", () => {
    let s = loadQueue(initialState(), [item("r1")]);
    s = toggleMultiMode(s);
    s = toggleCategory(s, "other");
    s = toggleCategory(s, "match_significant");
    expect(commitSelection(s)).toEqual(["match_significant", "other"]);
  });

  it("successful commit advances and re-applies suggestions", () => {
    let s = loadQueue(initialState(), [
      item("r1"),
      item("r2", "match_insignificant"),
    ]);
    s = toggleCategory(s, "hallucination");
    s = commitSucceeded(beginCommit(s));
    expect(s.labeledCount).toBe(1);
    expect(currentItem(s)?.record_id).toBe("r2");
    expect(s.selected).toEqual(["match_insignificant"]);
  });

  it("failed commit keeps the selection intact", () => {
    let s = loadQueue(initialState(), [item("r1")]);
    s = toggleCategory(s, "refusal_other");
    s = commitFailed(beginCommit(s), "boom");
    expect(s.error).toBe("boom");
    expect(s.selected).toEqual(["refusal_other"]);
    expect(currentItem(s)?.record_id).toBe("r1");
    expect(canCommit(s)).toBe(true);
  });

  it("cannot commit with nothing selected or an empty queue", () => {
    const empty = initialState();
    expect(canCommit(empty)).toBe(false);
    const s = loadQueue(initialState(), [item("r1")]);
    expect(canCommit(s)).toBe(false); // no suggestion, nothing picked
  });

  it("leaving multi mode collapses to the most specific choice", () => {
    let s = loadQueue(initialState(), [item("r1")]);
    s = toggleMultiMode(s);
    s = toggleCategory(s, "non_literal");
    s = toggleCategory(s, "refusal_copyright");
    s = toggleMultiMode(s);
    expect(s.multiMode).toBe(false);
    expect(s.selected).toEqual(["refusal_copyright"]);
  });

  it("button order constant matches the taxonomy order", () => {
    expect(CATEGORIES).toEqual([
      "match_significant",
      "match_insignificant",
      "refusal_copyright",
      "refusal_other",
      "hallucination",
      "non_literal",
      "other",
    ]);
  });
});
