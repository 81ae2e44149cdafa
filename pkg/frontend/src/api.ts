/** Thin typed client for the labeling API; fetch is injectable for tests. */

import type {
  DistributionResponse,
  LabelCommit,
  QueueResponse,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface ApiClient {
  fetchQueue(k: number, model?: string, corpus?: string): Promise<QueueResponse>;
  commitLabel(commit: LabelCommit): Promise<void>;
  fetchDistribution(
    model?: string,
    corpus?: string,
  ): Promise<DistributionResponse>;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export function createApi(fetchImpl: FetchLike, base = ""): ApiClient {
  async function getJson<T>(url: string): Promise<T> {
    const resp = await fetchImpl(base + url);
    if (!resp.ok) {
      throw new ApiError(`GET ${url} failed`, resp.status);
    }
    return (await resp.json()) as T;
  }

  return {
    fetchQueue(k, model, corpus) {
      const params = new URLSearchParams({ k: String(k) });
      if (model) params.set("model", model);
      if (corpus) params.set("corpus", corpus);
      return getJson<QueueResponse>(`/api/queue?${params}`);
    },

    async commitLabel(commit) {
      const resp = await fetchImpl(`${base}/api/labels`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(commit),
      });
      if (!resp.ok) {
        throw new ApiError("label commit failed", resp.status);
      }
    },

    fetchDistribution(model, corpus) {
      const params = new URLSearchParams();
      if (model) params.set("model", model);
      if (corpus) params.set("corpus", corpus);
      const qs = params.toString();
      return getJson<DistributionResponse>(
        `/api/distribution${qs ? `?${qs}` : ""}`,
      );
    },
  };
}
