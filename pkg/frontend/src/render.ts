/** DOM construction for the review queue and the distribution panel. */

import { segmentOutput } from "./segments.js";
import {
  CATEGORIES,
  CATEGORY_LABELS,
  type Category,
  type DistributionResponse,
} from "./types.js";
import type { SessionState } from "./state.js";
import { currentItem } from "./state.js";

function el(
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderItem(
  root: HTMLElement,
  state: SessionState,
  onSelect: (category: Category) => void,
  onCommit: () => void,
): void {
  root.replaceChildren();
  const item = currentItem(state);
  if (item === null) {
    const done = el("div", "done-panel");
    done.append(
      el("h2", undefined, "Queue finished"),
      el("p", undefined,
         `${state.labeledCount} output(s) labeled this session.`),
    );
    root.append(done);
    return;
  }

  const header = el("div", "item-header");
  header.append(
    el("span", "badge", item.model_id),
    el("span", "badge", item.corpus_tag),
    el("span", "badge muted", item.record_id),
  );
  if (item.suggestion) {
    header.append(
      el("span", "badge suggestion",
         `suggested: ${CATEGORY_LABELS[item.suggestion]}`),
    );
  }
  root.append(header);

  const prompt = el("section", "prompt-box");
  prompt.append(el("h3", undefined, "Prompt"),
                el("pre", undefined, item.prompt_text));
  root.append(prompt);

  const output = el("section", "output-box");
  output.append(el("h3", undefined, "Model output"));
  const body = el("pre", "output-text");
  if (item.output_text === "") {
    body.append(el("em", "empty-output", "(empty output)"));
  } else {
    for (const seg of segmentOutput(item.output_text, item.highlights)) {
      if (seg.matchedChars === null) {
        body.append(document.createTextNode(seg.text));
      } else {
        const mark = el("mark", "match", seg.text);
        const badge = el("sup", "matchlen", String(seg.matchedChars));
        body.append(mark, badge);
      }
    }
  }
  output.append(body);
  root.append(output);

  const buttons = el("div", "category-buttons");
  CATEGORIES.forEach((category, i) => {
    const btn = el("button", "category", `${i + 1} ${CATEGORY_LABELS[category]}`);
    if (state.selected.includes(category)) btn.classList.add("selected");
    btn.addEventListener("click", () => onSelect(category));
    buttons.append(btn);
  });
  root.append(buttons);

  const controls = el("div", "controls");
  const mode = el("span", "mode",
                  state.multiMode ? "multi-label (m)" : "single label (m)");
  const commit = el("button", "commit",
                    state.committing ? "committing…" : "Commit (Enter)");
  (commit as HTMLButtonElement).disabled =
    state.committing || state.selected.length === 0;
  commit.addEventListener("click", onCommit);
  controls.append(mode, commit);
  root.append(controls);
}

export function renderError(
  root: HTMLElement,
  state: SessionState,
  onRetry: () => void,
): void {
  root.replaceChildren();
  if (!state.error) return;
  const banner = el("div", "error-banner");
  banner.append(
    el("span", undefined,
       `${state.error} — nothing was lost, your selection is intact.`),
  );
  const retry = el("button", undefined, "Retry");
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  root.append(banner);
}

export function renderDistribution(
  root: HTMLElement,
  dist: DistributionResponse | null,
  onExport?: () => void,
): void {
  root.replaceChildren();
  root.append(el("h3", undefined, "Label distribution"));
  if (!dist || dist.total === 0) {
    root.append(el("p", "muted", "No labels committed yet."));
    return;
  }
  const table = el("table", "distribution");
  for (const category of CATEGORIES) {
    const row = el("tr");
    const share = dist.proportions[category] ?? 0;
    row.append(
      el("td", undefined, CATEGORY_LABELS[category]),
      el("td", "pct", `${(share * 100).toFixed(1)}%`),
    );
    table.append(row);
  }
  root.append(table, el("p", "muted", `${dist.total} labeled`));
  if (onExport) {
    const btn = el("button", "export", "Export CSV");
    btn.addEventListener("click", onExport);
    root.append(btn);
  }
}
