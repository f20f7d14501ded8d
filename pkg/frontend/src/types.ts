/** Shapes of the exported bundle files the reader consumes. */

export interface ManifestEntry {
  chapter: number;
  segment: number;
  paragraph_range: [number, number];
  track_id: string;
  audio_in_s: number;
  audio_out_s: number;
  loop: boolean;
  crossfade_ms: number;
  provenance: { kind: "movie_cue" | "emotion"; scene_ids?: number[] };
  text_emotion: string;
  music_mode: string;
  estimated_read_minutes: number;
  /** asset path relative to the bundle root, added by the exporter */
  audio: string;
}

export interface Manifest {
  version: number;
  book_id: string;
  seed: number;
  entries: ManifestEntry[];
}

export interface ChapterParagraph {
  index: number;
  segment: number;
  text: string;
}

export interface ChapterSegmentRange {
  segment: number;
  first_par: number;
  last_par: number;
}

export interface ChapterDoc {
  chapter: number;
  title: string;
  paragraphs: ChapterParagraph[];
  segments: ChapterSegmentRange[];
}

/** (chapter, segment) identity of a manifest entry. */
export type SegmentKey = string;

export function segmentKey(chapter: number, segment: number): SegmentKey {
  return `${chapter}:${segment}`;
}
