/** Pure scroll-anchor -> active-segment resolution. */

import type { ChapterDoc, SegmentKey } from "./types.js";
import { segmentKey } from "./types.js";

export interface SegmentSpan {
  chapter: number;
  segment: number;
  firstPar: number; // 1-based, inclusive
  lastPar: number;
}

/** Flatten chapter documents into the ordered list of segment spans. */
export function buildLayout(chapters: ChapterDoc[]): SegmentSpan[] {
  const spans: SegmentSpan[] = [];
  for (const doc of [...chapters].sort((a, b) => a.chapter - b.chapter)) {
    for (const seg of [...doc.segments].sort((a, b) => a.segment - b.segment)) {
      spans.push({
        chapter: doc.chapter,
        segment: seg.segment,
        firstPar: seg.first_par,
        lastPar: seg.last_par,
      });
    }
  }
  return spans;
}

/**
 * The active segment is the one whose paragraph range contains the
 * paragraph at the viewport midpoint. A paragraph that starts a segment
 * belongs to that (later) segment by construction of the disjoint
 * ranges. Anchors before the first paragraph resolve to the first
 * segment, anchors past the end to the last one.
 */
export function resolveActiveSegment(
  chapter: number,
  paragraph: number,
  layout: SegmentSpan[],
): SegmentKey {
  if (layout.length === 0) {
    throw new Error("empty segment layout");
  }
  const first = layout[0]!;
  const last = layout[layout.length - 1]!;
  if (chapter < first.chapter) {
    return segmentKey(first.chapter, first.segment);
  }
  if (chapter > last.chapter) {
    return segmentKey(last.chapter, last.segment);
  }
  let best: SegmentSpan | null = null;
  for (const span of layout) {
    if (span.chapter !== chapter) {
      continue;
    }
    if (paragraph >= span.firstPar && paragraph <= span.lastPar) {
      return segmentKey(span.chapter, span.segment);
    }
    // clamp within the chapter when the paragraph index is out of range
    if (paragraph < span.firstPar && best === null) {
      best = span;
    }
    if (paragraph > span.lastPar) {
      best = span;
    }
  }
  if (best === null) {
    return segmentKey(first.chapter, first.segment);
  }
  return segmentKey(best.chapter, best.segment);
}
