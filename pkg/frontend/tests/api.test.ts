import { describe, expect, it } from "vitest";

import { ApiError, createApi, type FetchLike } from "../src/api.js";
import { keyToAction } from "../src/keyboard.js";
import type { Category } from "../src/types.js";

/** In-memory stand-in for the labeling server: commits feed distribution. */
function fakeServer() {
  const labels = new Map<string, Category>();
  const precedence: Category[] = [
    "match_significant", "match_insignificant", "refusal_copyright",
    "refusal_other", "hallucination", "non_literal", "other",
  ];
  const fetchImpl: FetchLike = async (input, init) => {
    if (input.startsWith("/api/labels")) {
      const body = JSON.parse(init!.body!) as {
        record_id: string;
        labels: Category[];
      };
      if (body.labels.some((l) => !precedence.includes(l))) {
        return { ok: false, status: 400, json: async () => ({}) };
      }
      const primary = precedence.find((c) => body.labels.includes(c))!;
      labels.set(body.record_id, primary);
      return { ok: true, status: 200, json: async () => ({ primary }) };
    }
    if (input.startsWith("/api/distribution")) {
      const total = labels.size;
      const proportions: Partial<Record<Category, number>> = {};
      for (const cat of labels.values()) {
        proportions[cat] = (proportions[cat] ?? 0) + 1 / total;
      }
      return {
        ok: true,
        status: 200,
        json: async () => ({ total, proportions, categories: precedence }),
      };
    }
    return { ok: false, status: 404, json: async () => ({}) };
  };
  return { fetchImpl, labels };
}

describe("api client", () => {
  it("posts commits and reads back the matching distribution", async () => {
    const server = fakeServer();
    const api = createApi(server.fetchImpl);
    await api.commitLabel({
      record_id: "r1", labels: ["hallucination"], annotator: "a", note: "",
    });
    await api.commitLabel({
      record_id: "r2", labels: ["non_literal", "refusal_copyright"],
      annotator: "a", note: "",
    });
    expect(server.labels.get("r2")).toBe("refusal_copyright");
    const dist = await api.fetchDistribution();
    expect(dist.total).toBe(2);
    expect(dist.proportions.hallucination).toBeCloseTo(0.5);
    expect(dist.proportions.refusal_copyright).toBeCloseTo(0.5);
  });

  it("raises ApiError with the status on failure", async () => {
    const api = createApi(fakeServer().fetchImpl);
    await expect(
      api.commitLabel({
        record_id: "r1", labels: ["sarcasm" as Category],
        annotator: "a", note: "",
      }),
    ).rejects.toThrowError(ApiError);
  });
});

describe("keyboard map", () => {
  it("maps digits to categories in precedence order", () => {
    expect(keyToAction("1")).toEqual({
      kind: "select", category: "match_significant",
    });
    expect(keyToAction("7")).toEqual({ kind: "select", category: "other" });
    expect(keyToAction("8")).toBeNull();
  });

  it("maps enter, m, and escape", () => {
    expect(keyToAction("Enter")).toEqual({ kind: "commit" });
    expect(keyToAction("m")).toEqual({ kind: "toggle-multi" });
    expect(keyToAction("Escape")).toEqual({ kind: "dismiss-error" });
    expect(keyToAction("x")).toBeNull();
  });
});
