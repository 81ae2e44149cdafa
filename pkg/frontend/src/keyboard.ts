/** Keyboard mapping: digits pick categories, Enter commits, m toggles
 * multi-label mode. Returns null for keys the annotator did not bind. */

import { CATEGORIES, type Category } from "./types.js";

export type KeyAction =
  | { kind: "select"; category: Category }
  | { kind: "commit" }
  | { kind: "toggle-multi" }
  | { kind: "dismiss-error" };

export function keyToAction(key: string): KeyAction | null {
  if (key >= "1" && key <= "7") {
    return { kind: "select", category: CATEGORIES[Number(key) - 1] };
  }
  if (key === "Enter") {
    return { kind: "commit" };
  }
  if (key === "m" || key === "M") {
    return { kind: "toggle-multi" };
  }
  if (key === "Escape") {
    return { kind: "dismiss-error" };
  }
  return null;
}
