/** Split an output text into plain and highlighted segments for rendering. */

import type { Highlight } from "./types.js";

export interface Segment {
  text: string;
  matchedChars: number | null; // null for unmatched text
}

export function segmentOutput(
  text: string,
  highlights: Highlight[],
): Segment[] {
  const segments: Segment[] = [];
  let cursor = 0;
  const ordered = [...highlights].sort((a, b) => a[0] - b[0]);
  for (const [start, end, chars] of ordered) {
    if (start < cursor || end > text.length || start >= end) {
      continue; // defensive: server guarantees sane, non-overlapping ranges
    }
    if (start > cursor) {
      segments.push({ text: text.slice(cursor, start), matchedChars: null });
    }
    segments.push({ text: text.slice(start, end), matchedChars: chars });
    cursor = end;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), matchedChars: null });
  }
  return segments;
}
