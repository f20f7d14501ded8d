"""Segment-level alignment refinement.

Dialogue matches from the coarse stage are inherited by the chapter
segment that owns the quoted sentence; on top of that, visually
concrete non-quote sentences (picked by TF-IDF and a concreteness
lexicon) are compared against shot-frame embeddings of the segment's
candidate scenes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .align import CoarseAlignment, DialogueMatch
from .corpus.model import BookStructure, ConcretenessLexicon, EmbeddingBundle, ShotTable
from .errors import NoCandidateScenes
from .scenes import Scene
from .text import tokenize
from .textseg import ChapterSegment

CONCRETENESS_THRESHOLD = 3.0
LEXICON_COVERAGE_FLOOR = 0.5


@dataclass
class SentenceScore:
    chapter: int
    paragraph: int
    sentence: int
    tfidf: float
    concreteness: float
    kept: bool


@dataclass(frozen=True)
class Evidence:
    kind: str          # "dialogue" | "frame"
    movie_ms: int
    score: float


@dataclass
class SegmentSceneMatch:
    chapter: int
    segment: int
    scene_id: int
    evidence: list[Evidence] = field(default_factory=list)


def default_stopwords(book: BookStructure, n: int = 100) -> frozenset[str]:
    """The n most frequent tokens of the whole book (count, then lexicographic)."""
    counts: Counter[str] = Counter()
    for chapter in book.chapters:
        for par in chapter.paragraphs:
            for sentence in par.sentences:
                counts.update(tokenize(sentence))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(w for w, _ in ranked[:n])


def _segment_of(segments: list[ChapterSegment], chapter: int, paragraph: int):
    for seg in segments:
        if seg.chapter_index == chapter and seg.first_par <= paragraph <= seg.last_par:
            return seg
    raise KeyError(f"paragraph {chapter}:{paragraph} not covered by any segment")


def score_sentences(
    book: BookStructure,
    segments: list[ChapterSegment],
    lexicon: ConcretenessLexicon,
    stopwords: frozenset[str] | None = None,
) -> list[SentenceScore]:
    """Score every sentence for visual matchability.

    TF-IDF treats each chapter segment as one document. A sentence is
    kept when it is not a quote and its mean concreteness over
    lexicon-covered content tokens reaches 3.0 with at least half the
    tokens covered.
    """
    if stopwords is None:
        stopwords = default_stopwords(book)

    seg_tokens: dict[tuple[int, int], Counter[str]] = {}
    for seg in segments:
        bag: Counter[str] = Counter()
        chapter = book.chapter(seg.chapter_index)
        for p in range(seg.first_par, seg.last_par + 1):
            for sentence in chapter.paragraphs[p - 1].sentences:
                bag.update(w for w in tokenize(sentence) if w not in stopwords)
        seg_tokens[seg.key] = bag

    n_docs = len(segments)
    df: Counter[str] = Counter()
    for bag in seg_tokens.values():
        df.update(set(bag))

    scores: list[SentenceScore] = []
    for seg in segments:
        bag = seg_tokens[seg.key]
        chapter = book.chapter(seg.chapter_index)
        for p in range(seg.first_par, seg.last_par + 1):
            par = chapter.paragraphs[p - 1]
            quoted = par.quote_sentence_indices()
            for s, sentence in enumerate(par.sentences, start=1):
                content = [w for w in tokenize(sentence) if w not in stopwords]
                if content:
                    tfidf = float(
                        np.mean([bag[w] * math.log(n_docs / df[w]) for w in content])
                    )
                else:
                    tfidf = 0.0
                found = [lexicon.get(w) for w in content if w in lexicon]
                coverage = len(found) / len(content) if content else 0.0
                concreteness = float(np.mean(found)) if found else 1.0
                kept = (
                    s not in quoted
                    and coverage >= LEXICON_COVERAGE_FLOOR
                    and concreteness >= CONCRETENESS_THRESHOLD
                )
                scores.append(
                    SentenceScore(
                        chapter=seg.chapter_index,
                        paragraph=p,
                        sentence=s,
                        tfidf=tfidf,
                        concreteness=concreteness,
                        kept=kept,
                    )
                )
    return scores


def match_segment_scenes(
    segment: ChapterSegment,
    kept_sentences: list[SentenceScore],
    sentence_embeddings: EmbeddingBundle,
    shots: ShotTable,
    scenes: list[Scene],
    coarse: CoarseAlignment,
    theta: float,
    top_k: int,
    dialogue_matches: list[DialogueMatch] | None = None,
) -> list[SegmentSceneMatch]:
    """Match one segment against its chapter's scenes.

    The top_k kept sentences by TF-IDF are compared with every frame of
    every candidate scene; a scene joins the match set when any pair
    exceeds theta. Inherited dialogue matches contribute evidence at
    their cue times regardless of theta.
    """
    candidates = [
        s for s in scenes
        if coarse.scene_to_chapter.get(s.scene_id) == segment.chapter_index
    ]
    if not candidates:
        raise NoCandidateScenes(
            f"chapter {segment.chapter_index} has no coarse-aligned scenes"
        )

    own = [
        sc for sc in kept_sentences
        if sc.chapter == segment.chapter_index
        and segment.first_par <= sc.paragraph <= segment.last_par
        and sc.kept
    ]
    own.sort(key=lambda sc: (-sc.tfidf, sc.paragraph, sc.sentence))
    top = own[: max(0, top_k)]
    vectors = [
        sentence_embeddings.vector(f"ch:{sc.chapter}:par:{sc.paragraph}:sent:{sc.sentence}")
        for sc in top
    ]

    per_scene: dict[int, list[Evidence]] = {}
    if dialogue_matches is None:
        dialogue_matches = coarse.dialogue_matches
    for dm in dialogue_matches:
        if (
            dm.chapter == segment.chapter_index
            and segment.first_par <= dm.paragraph <= segment.last_par
        ):
            per_scene.setdefault(dm.scene_id, []).append(
                Evidence(kind="dialogue", movie_ms=dm.cue_time_ms, score=dm.lcs_score)
            )

    for scene in candidates:
        scene_shots = shots.shots[scene.first_shot : scene.last_shot + 1]
        for vec in vectors:
            best_score = -np.inf
            best_ms = 0
            for shot in scene_shots:
                sims = shot.frame_embeddings @ vec
                peak = float(sims.max())
                if peak > best_score:
                    best_score = peak
                    best_ms = shot.mid_ms
            if best_score > theta:
                per_scene.setdefault(scene.scene_id, []).append(
                    Evidence(kind="frame", movie_ms=best_ms, score=best_score)
                )

    return [
        SegmentSceneMatch(
            chapter=segment.chapter_index,
            segment=segment.segment_index,
            scene_id=scene_id,
            evidence=evidence,
        )
        for scene_id, evidence in sorted(per_scene.items())
    ]


def match_all_segments(
    segments: list[ChapterSegment],
    scores: list[SentenceScore],
    sentence_embeddings: EmbeddingBundle,
    shots: ShotTable,
    scenes: list[Scene],
    coarse: CoarseAlignment,
    theta: float,
    top_k: int,
) -> dict[tuple[int, int], list[SegmentSceneMatch]]:
    """Run matching for every segment; segments with no candidate scenes
    simply get an empty match list (they land in the unmatched set).
    Each segment's matched_scenes set is filled in as a side effect."""
    out: dict[tuple[int, int], list[SegmentSceneMatch]] = {}
    for seg in segments:
        try:
            matches = match_segment_scenes(
                seg, scores, sentence_embeddings, shots, scenes, coarse, theta, top_k
            )
        except NoCandidateScenes:
            matches = []
        seg.matched_scenes = {m.scene_id for m in matches}
        out[seg.key] = matches
    return out
