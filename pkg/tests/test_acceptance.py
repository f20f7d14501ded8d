"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the criterion
lines as they execute.
"""

import itertools
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from bookscore.align import (
    ChapterSceneSimilarity,
    dtw_attribute_speakers,
    dtw_path,
    lcs_distance,
    shortest_path_align,
)
from bookscore.config import parse_config
from bookscore.corpus.model import Cue, SubtitleTrack
from bookscore.corpus.srt import parse_transcript
from bookscore.fingerprint import FingerprintConfig, build_index, query
from bookscore.minicorpus import _synth_notes
from bookscore.musicseg import keystrength, novelty, segment_track
from bookscore.pipeline import Pipeline, matches_from_tsv, segments_from_tsv
from bookscore.text import tokenize
from bookscore.textseg import tw_finch
from bookscore.weave import manifest_from_json

SR = 11025


def _report(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line, file=sys.stderr, flush=True)


def _unit(v):
    return v / np.linalg.norm(v)


# --- criterion 1: text segmentation ------------------------------------------

def test_acceptance_text_segmentation():
    rng = np.random.default_rng(20_001)
    recovered = 0
    invariants_ok = 0
    n_chapters = 50
    start = time.perf_counter()
    for _ in range(n_chapters):
        n_blocks = int(rng.integers(3, 7))
        sizes = [int(rng.integers(4, 11)) for _ in range(n_blocks)]
        sigma = float(rng.uniform(0.03, 0.1))
        q, _ = np.linalg.qr(rng.normal(size=(24, 24)))
        feats, labels = [], []
        for b, size in enumerate(sizes):
            for _ in range(size):
                feats.append(_unit(q[:, b] + sigma * rng.normal(size=24)))
                labels.append(b)
        feats = np.stack(feats)
        n = len(feats)

        target = []
        pos = 0
        for size in sizes:
            target.append(tuple(range(pos, pos + size)))
            pos += size

        hierarchy = tw_finch(feats)
        if any(sorted(level) == target for level in hierarchy.levels):
            recovered += 1

        good = True
        for level in hierarchy.levels:
            members = sorted(i for c in level for i in c)
            if members != list(range(n)):
                good = False
            for cluster in level:
                if list(cluster) != list(range(cluster[0], cluster[-1] + 1)):
                    good = False
        invariants_ok += good
    elapsed = time.perf_counter() - start

    ok = recovered >= 45 and invariants_ok == n_chapters and elapsed < 5.0
    _report(
        "text segmentation: planted-block recovery",
        ok,
        f"recovered {recovered}/50, invariants {invariants_ok}/50, {elapsed:.2f}s",
    )
    assert recovered >= 45
    assert invariants_ok == n_chapters
    assert elapsed < 5.0


# --- criterion 2: music segmentation ------------------------------------------

def _arpeggio(rng, tonic, mode, dur):
    third = 4 if mode == "major" else 3
    degrees = [0, third, 7, 12, 7, third]
    c0 = 440.0 * 2.0 ** (-57.0 / 12.0)
    n = int(dur * SR)
    out = np.zeros(n)
    t, k = 0.0, 0
    while t < dur - 0.3:
        pc = tonic + degrees[k % len(degrees)]
        k += 1
        octave = 4 + (k // 6) % 2
        freq = c0 * 2 ** (octave + (pc + rng.uniform(-0.03, 0.03)) / 12)
        i0 = int(t * SR)
        i1 = min(n, i0 + int((0.35 + rng.uniform(0, 0.1)) * SR))
        tt = np.arange(i1 - i0) / SR
        env = np.minimum(tt / 0.01, 1.0) * np.exp(-4 * tt)
        out[i0:i1] += 0.25 * env * (
            np.sin(2 * np.pi * freq * tt) + 0.5 * np.sin(4 * np.pi * freq * tt)
        )
        t += 0.22 + rng.uniform(0, 0.06)
    return out


def test_acceptance_music_segmentation():
    start = time.perf_counter()
    rng = np.random.default_rng(20_002)
    audio = np.concatenate(
        [
            _arpeggio(rng, 0, "major", 60.0),    # C major
            _arpeggio(rng, 9, "minor", 60.0),    # A minor
            _arpeggio(rng, 7, "major", 60.0),    # G major
        ]
    )
    segments, _, _ = segment_track("fixture", audio, SR)
    bounds = [s.end_s for s in segments[:-1]]
    bounds_ok = (
        len(bounds) == 2
        and abs(bounds[0] - 60.0) <= 3.0
        and abs(bounds[1] - 120.0) <= 3.0
    )
    modes_ok = [s.mode for s in segments] == ["major", "minor", "major"]

    constant = np.ones((200, 200))
    curve = novelty(constant, kernel_size=64, scale=False)
    novelty_ok = bool(np.max(np.abs(curve)) < 1e-9)

    kk_major = [6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88]
    kk_minor = [6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17]
    ks_ok = (
        keystrength(np.array(kk_major))[0] == pytest.approx(1.0)
        and int(np.argmax(keystrength(np.array(kk_major)))) == 0
        and int(np.argmax(keystrength(np.roll(kk_minor, 9)))) == 21
    )
    elapsed = time.perf_counter() - start

    ok = bounds_ok and modes_ok and novelty_ok and ks_ok and elapsed < 30.0
    _report(
        "music segmentation: 3-key boundary recovery",
        ok,
        f"boundaries {['%.1f' % b for b in bounds]}, {elapsed:.2f}s",
    )
    assert bounds_ok and modes_ok and novelty_ok and ks_ok
    assert elapsed < 30.0


# --- criterion 3: fingerprinting -----------------------------------------------

def test_acceptance_fingerprinting():
    start = time.perf_counter()
    cfg = FingerprintConfig()
    rng = np.random.default_rng(20_003)
    album = [
        (
            f"t{i}",
            np.concatenate(
                [
                    _synth_notes(rng, (i * 3) % 12, "major", 60.0),
                    _synth_notes(rng, (i * 5) % 12, "minor", 60.0),
                ]
            ),
        )
        for i in range(5)
    ]
    index = build_index([(tid, x, SR) for tid, x in album], cfg)

    self_hits = total = 0
    for tid, x in album:
        for excerpt_start in range(0, 110, 10):
            clip = x[excerpt_start * SR : (excerpt_start + 10) * SR]
            match = query(index, clip, SR, cfg)
            total += 1
            self_hits += (
                match is not None
                and match.track_id == tid
                and abs(match.offset_s - excerpt_start) <= 0.2
            )
    self_ok = self_hits == total

    noisy_hits = 0
    for seed in range(20):
        tid, x = album[seed % 5]
        excerpt_start = 10 + (seed * 7) % 90
        clip = x[excerpt_start * SR : (excerpt_start + 10) * SR]
        noise = np.random.default_rng(seed).normal(0, 1, len(clip))
        noise *= np.sqrt((clip**2).mean()) / np.sqrt((noise**2).mean()) / 10 ** 0.5
        match = query(index, clip + noise, SR, cfg)
        noisy_hits += match is not None and match.track_id == tid
    noise_ok = noisy_hits >= 18

    held_rng = np.random.default_rng(20_004)
    false_accepts = 0
    for i in range(5):
        held = np.concatenate(
            [
                _synth_notes(held_rng, (i * 7 + 1) % 12, "major", 30.0),
                _synth_notes(held_rng, (i * 2 + 5) % 12, "minor", 30.0),
            ]
        )
        for excerpt_start in (0, 20, 40):
            if query(index, held[excerpt_start * SR : (excerpt_start + 10) * SR], SR, cfg):
                false_accepts += 1
    held_ok = false_accepts == 0
    elapsed = time.perf_counter() - start

    ok = self_ok and noise_ok and held_ok and elapsed < 60.0
    _report(
        "fingerprinting: self-ID, 10 dB noise, held-out rejection",
        ok,
        f"self {self_hits}/{total}, noisy {noisy_hits}/20, "
        f"false {false_accepts}, {elapsed:.1f}s",
    )
    assert self_ok and noise_ok and held_ok
    assert elapsed < 60.0


# --- criterion 4: alignment ---------------------------------------------------

def _exhaustive_path_cost(matrix):
    n_chapters, n_scenes = matrix.shape
    best = np.inf
    for advance_at in itertools.combinations(range(1, n_scenes), n_chapters - 1):
        chapter, cost = 0, 0.0
        for q in range(n_scenes):
            if q in advance_at:
                chapter += 1
            cost += 1.0 - matrix[chapter, q]
        best = min(best, cost)
    return best


def _dtw_oracle_cost(d):
    """Exhaustive DP by memoized recursion (independent of the module)."""
    nc, nl = d.shape

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == 0 and j == 0:
            return d[0, 0]
        options = []
        if i > 0 and j > 0:
            options.append(go(i - 1, j - 1))
        if j > 0:
            options.append(go(i, j - 1))
        if i > 0:
            options.append(go(i - 1, j))
        return min(options) + d[i, j]

    return go(nc - 1, nl - 1)


def test_acceptance_alignment():
    rng = np.random.default_rng(20_005)
    path_ok = 0
    for _ in range(200):
        n_chapters = int(rng.integers(1, 6))
        n_scenes = int(rng.integers(n_chapters, 21))
        truth = np.sort(rng.integers(0, n_chapters, n_scenes))
        truth[0], truth[-1] = 0, n_chapters - 1
        matrix = rng.uniform(0.0, 0.3, (n_chapters, n_scenes))
        for q in range(n_scenes):
            matrix[truth[q], q] = rng.uniform(0.7, 1.0)
        sim = ChapterSceneSimilarity(
            matrix=matrix, char_raw=matrix, dlg_raw=matrix,
            scene_ids=list(range(1, n_scenes + 1)),
        )
        coarse = shortest_path_align(sim)
        got = sum(
            1.0 - matrix[coarse.scene_to_chapter[q + 1] - 1, q]
            for q in range(n_scenes)
        )
        if abs(got - _exhaustive_path_cost(matrix)) < 1e-9:
            path_ok += 1

    vocab = ["red", "blue", "stone", "river", "gate", "torch", "gull", "oak"]
    dtw_ok = 0
    dtw_total = 0
    for nc in range(1, 9):
        for nl in range(1, 9):
            case_rng = np.random.default_rng(1000 * nc + nl)
            cues = [" ".join(case_rng.choice(vocab, 3)) for _ in range(nc)]
            lines = [" ".join(case_rng.choice(vocab, 3)) for _ in range(nl)]
            subs = SubtitleTrack(
                cues=tuple(
                    Cue(i * 1000, i * 1000 + 900, t) for i, t in enumerate(cues)
                )
            )
            transcript = parse_transcript(
                "\n".join(f"S{j}: {t}" for j, t in enumerate(lines)) + "\n"
            )
            d = np.array(
                [[lcs_distance(tokenize(c), tokenize(l)) for l in lines]
                 for c in cues]
            )
            dtw_attribute_speakers(subs, transcript)   # must not raise
            got_cost, _ = dtw_path(d)
            dtw_total += 1
            if abs(got_cost - _dtw_oracle_cost(d)) < 1e-12:
                dtw_ok += 1

    ok = path_ok == 200 and dtw_ok == dtw_total
    _report(
        "alignment: shortest path + DTW vs exhaustive",
        ok,
        f"paths {path_ok}/200, dtw {dtw_ok}/{dtw_total}",
    )
    assert path_ok == 200
    assert dtw_ok == dtw_total


# --- criterion 5: weave on the mini-corpus --------------------------------------

def test_acceptance_weave(minicorpus_run):
    cfg, out = minicorpus_run
    manifest = manifest_from_json((out / "manifest.json").read_text())
    segments = segments_from_tsv((out / "segments.tsv").read_text())
    matches = matches_from_tsv((out / "segment_matches.tsv").read_text(), segments)

    keys = [(e.chapter, e.segment) for e in manifest.entries]
    coverage_ok = sorted(keys) == sorted(s.key for s in segments) \
        and len(set(keys)) == len(keys)

    compat_ok = all(
        not (e.text_emotion == "positive" and e.music_mode == "minor")
        and not (e.text_emotion == "negative" and e.music_mode == "major")
        for e in manifest.entries
    )

    log_entries = []
    for line in (out / "track_log.tsv").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            ms, tid, conf, off = line.split("\t")
            log_entries.append((int(ms), tid))
    provenance_ok = True
    for e in manifest.entries:
        if e.provenance["kind"] != "movie_cue":
            continue
        evidence_ms = {
            ev.movie_ms
            for m in matches.get((e.chapter, e.segment), [])
            for ev in m.evidence
        }
        cue_times = e.provenance["cue_times_ms"]
        if not set(cue_times) <= evidence_ms:
            provenance_ok = False
        if not any(
            tid == e.track_id and abs(ms - t) <= 15_000
            for ms, tid in log_entries
            for t in cue_times
        ):
            provenance_ok = False

    # byte determinism of the weave stage itself
    manifest_bytes = (out / "manifest.json").read_bytes()
    Pipeline(cfg).stage_weave()
    determinism_ok = (out / "manifest.json").read_bytes() == manifest_bytes

    report = (out / "report.txt").read_text()
    split_ok = all(
        f"chapter {c}: movie_cue=" in report for c in (1, 2, 3)
    )

    ok = coverage_ok and compat_ok and provenance_ok and determinism_ok and split_ok
    _report(
        "weave: coverage, compatibility, provenance, determinism",
        ok,
        f"entries {len(manifest.entries)}",
    )
    assert coverage_ok and compat_ok and provenance_ok
    assert determinism_ok and split_ok


# --- criterion 6: end to end ----------------------------------------------------

def test_acceptance_end_to_end(minicorpus_config, tmp_path):
    start = time.perf_counter()
    out1 = tmp_path / "run1"
    cfg1 = parse_config(minicorpus_config, {"output_dir": str(out1)})
    Pipeline(cfg1).run("all")
    elapsed = time.perf_counter() - start

    out2 = tmp_path / "run2"
    cfg2 = parse_config(minicorpus_config, {"output_dir": str(out2)})
    Pipeline(cfg2).run("all")

    mismatches = []
    names1 = sorted(
        p.relative_to(out1).as_posix()
        for p in out1.rglob("*")
        if p.is_file() and p.name != "stage_state.json"
    )
    names2 = sorted(
        p.relative_to(out2).as_posix()
        for p in out2.rglob("*")
        if p.is_file() and p.name != "stage_state.json"
    )
    if names1 != names2:
        mismatches.append("file lists differ")
    for name in names1:
        if (out1 / name).read_bytes() != (out2 / name).read_bytes():
            mismatches.append(name)

    ok = elapsed < 180.0 and not mismatches
    _report(
        "end to end: full run < 3 min, byte-identical reruns",
        ok,
        f"{elapsed:.1f}s, {len(names1)} artifacts, mismatches {mismatches or 'none'}",
    )
    assert elapsed < 180.0
    assert not mismatches, mismatches
