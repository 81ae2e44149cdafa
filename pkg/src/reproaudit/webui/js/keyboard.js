/** Keyboard mapping: digits pick categories, Enter commits, m toggles
 * multi-label mode. Returns null for keys the annotator did not bind. */
import { CATEGORIES } from "./types.js";
export function keyToAction(key) {
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
