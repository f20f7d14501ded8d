/**
 * Smoke test against the real exported bundle: every asset the manifest
 * references must exist and the chapter documents must agree with the
 * segment resolver. Builds the demo bundle first if it is absent
 * (READER_BUNDLE overrides the location).
 */

import { execSync } from "node:child_process";
import { existsSync, readFileSync, readdirSync } from "node:fs";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { buildLayout, resolveActiveSegment } from "../src/segments.js";
import type { ChapterDoc, Manifest } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const repo = resolve(here, "..", "..");

function bundleDir(): string {
  if (process.env.READER_BUNDLE) {
    return process.env.READER_BUNDLE;
  }
  const fallback = join(repo, "build", "minicorpus", "out", "bundle");
  if (!existsSync(join(fallback, "manifest.json"))) {
    execSync(`python3 ${join(repo, "scripts", "build_minicorpus.py")} --if-missing`, {
      stdio: "inherit",
      timeout: 180_000,
    });
  }
  return fallback;
}

function readJson<T>(path: string): T {
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

describe("exported bundle", () => {
  it("loads with zero missing assets and consistent segment layout", () => {
    const bundle = bundleDir();
    const manifest = readJson<Manifest>(join(bundle, "manifest.json"));
    expect(manifest.entries.length).toBeGreaterThan(0);

    const missing: string[] = [];
    for (const entry of manifest.entries) {
      expect(entry.audio).toMatch(/^audio\//);
      if (!existsSync(join(bundle, entry.audio))) {
        missing.push(entry.audio);
      }
      expect(entry.audio_in_s).toBeLessThan(entry.audio_out_s);
      expect(entry.loop).toBe(true);
      expect(entry.crossfade_ms).toBeGreaterThanOrEqual(0);
    }
    expect(missing).toEqual([]);

    const chapterIds = [...new Set(manifest.entries.map((e) => e.chapter))].sort(
      (a, b) => a - b,
    );
    const docs: ChapterDoc[] = chapterIds.map((c) =>
      readJson<ChapterDoc>(join(bundle, "chapters", `${c}.json`)),
    );
    // every chapter file the manifest implies exists, and nothing extra
    const onDisk = readdirSync(join(bundle, "chapters")).sort();
    expect(onDisk).toEqual(chapterIds.map((c) => `${c}.json`));

    const layout = buildLayout(docs);
    const manifestKeys = new Set(
      manifest.entries.map((e) => `${e.chapter}:${e.segment}`),
    );
    const layoutKeys = new Set(
      layout.map((s) => `${s.chapter}:${s.segment}`),
    );
    expect(layoutKeys).toEqual(manifestKeys);

    // paragraphs are covered exactly once and resolve to their segment
    for (const doc of docs) {
      const covered = new Set<number>();
      for (const seg of doc.segments) {
        for (let p = seg.first_par; p <= seg.last_par; p += 1) {
          expect(covered.has(p)).toBe(false);
          covered.add(p);
        }
      }
      expect(covered.size).toBe(doc.paragraphs.length);
      for (const par of doc.paragraphs) {
        expect(resolveActiveSegment(doc.chapter, par.index, layout)).toBe(
          `${doc.chapter}:${par.segment}`,
        );
        expect(par.text.length).toBeGreaterThan(0);
      }
    }
  }, 240_000);
});
