/** Wire the session state, API client, and renderers together. */
import { ApiError, createApi } from "./api.js";
import { distributionCsv } from "./export.js";
import { keyToAction } from "./keyboard.js";
import { renderDistribution, renderError, renderItem } from "./render.js";
import { beginCommit, canCommit, commitFailed, commitSelection, commitSucceeded, currentItem, dismissError, initialState, loadQueue, toggleCategory, toggleMultiMode, } from "./state.js";
const QUEUE_SIZE = 260;
const api = createApi((input, init) => fetch(input, init));
let state = initialState();
const itemRoot = document.getElementById("item");
const errorRoot = document.getElementById("error");
const distRoot = document.getElementById("distribution");
function annotator() {
    const stored = localStorage.getItem("annotator");
    if (stored)
        return stored;
    const name = window.prompt("Annotator identifier?") || "anonymous";
    localStorage.setItem("annotator", name);
    return name;
}
function redraw() {
    renderItem(itemRoot, state, select, commit);
    renderError(errorRoot, state, commit);
}
function select(category) {
    state = toggleCategory(state, category);
    redraw();
}
function exportCsv(csv) {
    const blob = new Blob([csv], { type: "text/csv" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "label-distribution.csv";
    link.click();
    URL.revokeObjectURL(link.href);
}
async function refreshDistribution() {
    try {
        const dist = await api.fetchDistribution();
        renderDistribution(distRoot, dist, () => exportCsv(distributionCsv(dist)));
    }
    catch {
        renderDistribution(distRoot, null);
    }
}
async function commit() {
    if (!canCommit(state))
        return;
    const item = currentItem(state);
    const labels = commitSelection(state);
    state = beginCommit(state);
    redraw();
    try {
        await api.commitLabel({
            record_id: item.record_id,
            labels,
            annotator: annotator(),
            note: "",
        });
        state = commitSucceeded(state);
        redraw();
        void refreshDistribution();
    }
    catch (err) {
        const detail = err instanceof ApiError ? ` (HTTP ${err.status})` : "";
        state = commitFailed(state, `Commit failed${detail}`);
        redraw();
    }
}
document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement)
        return;
    const action = keyToAction(event.key);
    if (!action)
        return;
    event.preventDefault();
    switch (action.kind) {
        case "select":
            select(action.category);
            break;
        case "commit":
            void commit();
            break;
        case "toggle-multi":
            state = toggleMultiMode(state);
            redraw();
            break;
        case "dismiss-error":
            state = dismissError(state);
            redraw();
            break;
    }
});
async function start() {
    try {
        const queue = await api.fetchQueue(QUEUE_SIZE);
        state = loadQueue(state, queue.items);
    }
    catch {
        state = commitFailed(state, "Could not load the review queue");
    }
    redraw();
    void refreshDistribution();
}
void start();
