/** Thin typed client for the labeling API; fetch is injectable for tests. */
export class ApiError extends Error {
    constructor(message, status) {
        super(message);
        this.status = status;
    }
}
export function createApi(fetchImpl, base = "") {
    async function getJson(url) {
        const resp = await fetchImpl(base + url);
        if (!resp.ok) {
            throw new ApiError(`GET ${url} failed`, resp.status);
        }
        return (await resp.json());
    }
    return {
        fetchQueue(k, model, corpus) {
            const params = new URLSearchParams({ k: String(k) });
            if (model)
                params.set("model", model);
            if (corpus)
                params.set("corpus", corpus);
            return getJson(`/api/queue?${params}`);
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
            if (model)
                params.set("model", model);
            if (corpus)
                params.set("corpus", corpus);
            const qs = params.toString();
            return getJson(`/api/distribution${qs ? `?${qs}` : ""}`);
        },
    };
}
