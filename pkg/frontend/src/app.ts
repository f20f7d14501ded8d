/**
 * Reading app bootstrap: fetch the bundle, render chapters, track the
 * viewport-midpoint paragraph on scroll, and hand segment changes to the
 * dual-deck player. The next segment's audio is prefetched once the
 * reader enters the last quarter of the current one.
 */

import { buildLayout, resolveActiveSegment, SegmentSpan } from "./segments.js";
import { DualDeckPlayer } from "./player.js";
import {
  ChapterDoc,
  Manifest,
  ManifestEntry,
  SegmentKey,
  segmentKey,
} from "./types.js";

const params = new URLSearchParams(location.search);
const BUNDLE = params.get("bundle") ?? "./bundle";
const DEBUG = params.has("debug");

function banner(message: string): void {
  const el = document.getElementById("banner")!;
  el.textContent = message;
  el.classList.add("visible");
}

async function fetchJson<T>(path: string): Promise<T> {
  const res = await fetch(`${BUNDLE}/${path}`);
  if (!res.ok) {
    throw new Error(`failed to load ${path}: ${res.status}`);
  }
  return (await res.json()) as T;
}

function renderChapter(doc: ChapterDoc, host: HTMLElement): void {
  const section = document.createElement("section");
  const title = document.createElement("h2");
  title.textContent = doc.title;
  section.appendChild(title);
  for (const par of doc.paragraphs) {
    const p = document.createElement("p");
    p.textContent = par.text;
    p.dataset.chapter = String(doc.chapter);
    p.dataset.par = String(par.index);
    section.appendChild(p);
  }
  host.appendChild(section);
}

interface App {
  layout: SegmentSpan[];
  entries: Map<SegmentKey, ManifestEntry>;
  order: SegmentKey[];
  player: DualDeckPlayer;
  paragraphs: HTMLElement[];
  active: SegmentKey | null;
}

function paragraphAtMidpoint(app: App): HTMLElement | null {
  const midY = window.innerHeight / 2;
  let nearest: HTMLElement | null = null;
  let nearestDist = Infinity;
  for (const el of app.paragraphs) {
    const rect = el.getBoundingClientRect();
    if (rect.top <= midY && rect.bottom >= midY) {
      return el;
    }
    const dist = Math.min(Math.abs(rect.top - midY), Math.abs(rect.bottom - midY));
    if (dist < nearestDist) {
      nearestDist = dist;
      nearest = el;
    }
  }
  return nearest;
}

function updateOverlay(app: App, key: SegmentKey): void {
  if (!DEBUG) {
    return;
  }
  const entry = app.entries.get(key);
  const overlay = document.getElementById("overlay")!;
  overlay.classList.add("visible");
  overlay.textContent = entry
    ? `segment ${key} | ${entry.provenance.kind} | ${entry.text_emotion} text, ` +
      `${entry.music_mode} music | ${entry.track_id}`
    : `segment ${key}`;
}

function onScroll(app: App): void {
  const el = paragraphAtMidpoint(app);
  if (!el) {
    return;
  }
  const chapter = Number(el.dataset.chapter);
  const paragraph = Number(el.dataset.par);
  const key = resolveActiveSegment(chapter, paragraph, app.layout);
  const entry = app.entries.get(key);
  if (!entry) {
    return;
  }
  if (key !== app.active) {
    app.active = key;
    void app.player.transition(entry.audio, entry.crossfade_ms);
    updateOverlay(app, key);
  }
  // prefetch the next excerpt in the last quarter of this segment
  const span = app.layout.find(
    (s) => segmentKey(s.chapter, s.segment) === key,
  );
  if (span) {
    const length = span.lastPar - span.firstPar + 1;
    const progress = (paragraph - span.firstPar + 1) / length;
    if (progress >= 0.75) {
      const at = app.order.indexOf(key);
      const nextKey = app.order[at + 1];
      const next = nextKey ? app.entries.get(nextKey) : undefined;
      if (next) {
        void app.player.prefetch(next.audio);
      }
    }
  }
}

async function main(): Promise<void> {
  let manifest: Manifest;
  try {
    manifest = await fetchJson<Manifest>("manifest.json");
  } catch (err) {
    banner(`bundle not found at ${BUNDLE} - pass ?bundle=<path>`);
    throw err;
  }
  const chapterIds = [...new Set(manifest.entries.map((e) => e.chapter))].sort(
    (a, b) => a - b,
  );
  const docs: ChapterDoc[] = [];
  for (const c of chapterIds) {
    docs.push(await fetchJson<ChapterDoc>(`chapters/${c}.json`));
  }

  const host = document.getElementById("book")!;
  for (const doc of docs) {
    renderChapter(doc, host);
  }

  const entries = new Map<SegmentKey, ManifestEntry>();
  for (const entry of manifest.entries) {
    entries.set(segmentKey(entry.chapter, entry.segment), entry);
  }
  const app: App = {
    layout: buildLayout(docs),
    entries,
    order: manifest.entries.map((e) => segmentKey(e.chapter, e.segment)),
    player: new DualDeckPlayer(BUNDLE, 2000, (asset) =>
      banner(`missing audio asset: ${asset}`),
    ),
    paragraphs: Array.from(document.querySelectorAll("p[data-chapter]")),
    active: null,
  };

  let scheduled = false;
  const schedule = () => {
    if (!scheduled) {
      scheduled = true;
      requestAnimationFrame(() => {
        scheduled = false;
        onScroll(app);
      });
    }
  };
  window.addEventListener("scroll", schedule, { passive: true });
  window.addEventListener("resize", schedule);
  // audio can only start after a user gesture; the first interaction
  // also triggers the initial transition
  window.addEventListener("pointerdown", schedule, { once: true });
  schedule();
}

void main();
