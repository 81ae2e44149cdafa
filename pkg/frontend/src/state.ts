/** Review-session state machine, kept pure so it is directly testable.
 *
 * The client never decides precedence: it collects categories and ships
 * them; the server derives the primary label. Selection survives a failed
 * commit so nothing an annotator chose is ever lost to a network error.
 */

import { CATEGORIES, type Category, type ReviewItem } from "./types.js";

export interface SessionState {
  queue: ReviewItem[];
  position: number;
  selected: Category[];
  multiMode: boolean;
  committing: boolean;
  error: string | null;
  labeledCount: number;
}

export function initialState(): SessionState {
  return {
    queue: [],
    position: 0,
    selected: [],
    multiMode: false,
    committing: false,
    error: null,
    labeledCount: 0,
  };
}

export function currentItem(state: SessionState): ReviewItem | null {
  return state.position < state.queue.length
    ? state.queue[state.position]
    : null;
}

export function loadQueue(
  state: SessionState,
  items: ReviewItem[],
): SessionState {
  const next = {
    ...state,
    queue: items,
    position: 0,
    selected: [] as Category[],
    error: null,
  };
  return applySuggestion(next);
}

/** Pre-select the server's suggestion; it is never auto-committed. */
function applySuggestion(state: SessionState): SessionState {
  const item = currentItem(state);
  if (item?.suggestion && state.selected.length === 0) {
    return { ...state, selected: [item.suggestion] };
  }
  return state;
}

export function toggleCategory(
  state: SessionState,
  category: Category,
): SessionState {
  if (!CATEGORIES.includes(category) || currentItem(state) === null) {
    return state;
  }
  if (!state.multiMode) {
    return { ...state, selected: [category] };
  }
  const has = state.selected.includes(category);
  const selected = has
    ? state.selected.filter((c) => c !== category)
    : [...state.selected, category];
  return { ...state, selected };
}

export function toggleMultiMode(state: SessionState): SessionState {
  if (state.multiMode && state.selected.length > 1) {
    // leaving multi mode keeps only the most specific choice
    const first = CATEGORIES.find((c) => state.selected.includes(c));
    return { ...state, multiMode: false, selected: first ? [first] : [] };
  }
  return { ...state, multiMode: !state.multiMode };
}

/** Categories to ship, ordered most specific first. */
export function commitSelection(state: SessionState): Category[] {
  return CATEGORIES.filter((c) => state.selected.includes(c));
}

export function beginCommit(state: SessionState): SessionState {
  return { ...state, committing: true, error: null };
}

export function commitSucceeded(state: SessionState): SessionState {
  const next = {
    ...state,
    committing: false,
    position: state.position + 1,
    selected: [] as Category[],
    labeledCount: state.labeledCount + 1,
  };
  return applySuggestion(next);
}

/** Keep everything the annotator chose; just surface the failure. */
export function commitFailed(
  state: SessionState,
  message: string,
): SessionState {
  return { ...state, committing: false, error: message };
}

export function dismissError(state: SessionState): SessionState {
  return { ...state, error: null };
}

export function canCommit(state: SessionState): boolean {
  return (
    !state.committing &&
    state.selected.length > 0 &&
    currentItem(state) !== null
  );
}
