"""Coarse book-to-movie alignment.

Subtitle cues get speakers by warping them onto the transcript, book and
movie character names are reconciled by longest-common-subsequence
ratio, chapters and scenes are scored on shared rare characters and
near-verbatim dialogue, and a monotonic shortest path through that score
matrix assigns every scene a chapter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus.model import BookStructure, SubtitleTrack, Transcript
from .errors import InfeasibleShape
from .scenes import Scene
from .text import tokenize

UNKNOWN_SPEAKER_DISTANCE = 0.8
NAME_MATCH_RATIO = 0.7
DIALOGUE_SIM_FLOOR = 0.5


def lcs_length(a, b) -> int:
    """Classic O(len(a)*len(b)) longest-common-subsequence length."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcs_distance(a: list[str], b: list[str]) -> float:
    """1 - LCS / max(len); 0 iff the token sequences are identical."""
    if not a and not b:
        return 0.0
    return 1.0 - lcs_length(a, b) / max(len(a), len(b))


def dtw_path(d: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Minimum-total-cost monotonic warp through a cost matrix.

    Steps are diagonal, column-only, and row-only; ties prefer the
    diagonal, then skipping a column. Returns the summed cost over every
    visited cell and the visited cells themselves.
    """
    nr, nc = d.shape
    dp = np.full((nr, nc), np.inf)
    # 0 = diagonal, 1 = column-only, 2 = row-only
    step = np.zeros((nr, nc), dtype=np.int8)
    dp[0, 0] = d[0, 0]
    for j in range(1, nc):
        dp[0, j] = dp[0, j - 1] + d[0, j]
        step[0, j] = 1
    for i in range(1, nr):
        dp[i, 0] = dp[i - 1, 0] + d[i, 0]
        step[i, 0] = 2
    for i in range(1, nr):
        for j in range(1, nc):
            options = (dp[i - 1, j - 1], dp[i, j - 1], dp[i - 1, j])
            best = int(np.argmin(options))
            dp[i, j] = options[best] + d[i, j]
            step[i, j] = best

    cells = []
    i, j = nr - 1, nc - 1
    while True:
        cells.append((i, j))
        if i == 0 and j == 0:
            break
        move = step[i, j]
        if move == 0:
            i, j = i - 1, j - 1
        elif move == 1:
            j -= 1
        else:
            i -= 1
    cells.reverse()
    return float(dp[nr - 1, nc - 1]), cells


def dtw_attribute_speakers(
    subtitles: SubtitleTrack, transcript: Transcript
) -> list[str | None]:
    """Warp subtitle cues onto transcript lines and take each cue's speaker.

    A cue matched to several lines takes the closest one (earliest on
    ties); a cue whose best match is still worse than 0.8 is left
    unattributed.
    """
    if not subtitles.cues or not transcript.lines:
        raise ValueError("both cue and transcript sequences must be non-empty")
    cue_tokens = [tokenize(c.text) for c in subtitles.cues]
    line_tokens = [tokenize(ln.utterance) for ln in transcript.lines]

    d = np.empty((len(cue_tokens), len(line_tokens)))
    for i, cue in enumerate(cue_tokens):
        for j, line in enumerate(line_tokens):
            d[i, j] = lcs_distance(cue, line)

    _, cells = dtw_path(d)
    matched: dict[int, tuple[float, int]] = {}
    for i, j in cells:
        cand = (float(d[i, j]), j)
        if i not in matched or cand < matched[i]:
            matched[i] = cand

    speakers: list[str | None] = []
    for i in range(len(cue_tokens)):
        dist, j = matched[i]
        speakers.append(
            transcript.lines[j].speaker if dist <= UNKNOWN_SPEAKER_DISTANCE else None
        )
    return speakers


def name_lcs_ratio(a: str, b: str) -> float:
    """Character-level LCS normalized by the shorter name (nickname friendly)."""
    a, b = a.lower(), b.lower()
    if not a or not b:
        return 0.0
    return lcs_length(a, b) / min(len(a), len(b))


def match_character_names(
    book_speakers: list[str], movie_speakers: list[str]
) -> dict[str, str]:
    """Greedy best-first 1:1 matching of book names to movie names.

    Pairs below the 0.7 ratio stay unmatched (modality-local); ratio ties
    go to the lexicographically smaller book name, then movie name.
    """
    pairs = [
        (name_lcs_ratio(b, m), b, m)
        for b in set(book_speakers)
        for m in set(movie_speakers)
    ]
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    mapping: dict[str, str] = {}
    used_movie: set[str] = set()
    for ratio, b, m in pairs:
        if ratio < NAME_MATCH_RATIO:
            break
        if b in mapping or m in used_movie:
            continue
        mapping[b] = m
        used_movie.add(m)
    return mapping


@dataclass(frozen=True)
class DialogueMatch:
    chapter: int
    paragraph: int
    sentence: int
    scene_id: int
    cue_time_ms: int
    lcs_score: float


@dataclass
class ChapterSceneSimilarity:
    matrix: np.ndarray                      # (L, Q) in [0, 1]
    char_raw: np.ndarray                    # cosine of icf-scaled histograms
    dlg_raw: np.ndarray                     # best dialogue similarity per cell
    scene_ids: list[int] = field(default_factory=list)   # column -> scene_id
    candidates: list[DialogueMatch] = field(default_factory=list)


def _book_dialogues(book: BookStructure, name_map: dict[str, str]):
    """Per chapter: speaker histogram and quote sentences with positions."""
    histograms: list[dict[str, int]] = []
    quotes: list[list[tuple[int, int, list[str]]]] = []
    for chapter in book.chapters:
        hist: dict[str, int] = {}
        rows: list[tuple[int, int, list[str]]] = []
        for pi, par in enumerate(chapter.paragraphs, start=1):
            for quote in par.quotes:
                if quote.speaker:
                    name = name_map.get(quote.speaker, quote.speaker)
                    hist[name] = hist.get(name, 0) + 1
                rows.append(
                    (pi, quote.sentence_index,
                     tokenize(par.sentences[quote.sentence_index - 1]))
                )
        histograms.append(hist)
        quotes.append(rows)
    return histograms, quotes


def _minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi <= lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def chapter_scene_similarity(
    book: BookStructure,
    scenes: list[Scene],
    name_map: dict[str, str],
    alpha: float = 1.0,
) -> ChapterSceneSimilarity:
    """Score every (chapter, scene) pair.

    Character similarity is the cosine of histograms scaled by inverse
    character frequency icf(c) = ln(Q / (1 + scenes containing c)),
    clamped at zero so ubiquitous characters contribute nothing.
    Dialogue similarity is the single best quote/utterance token overlap
    in the cell, zeroed below 0.5. Both components are min-max
    normalized over the whole matrix before the equal-weight sum; alpha
    multiplies the dialogue side first.
    """
    n_chapters = len(book.chapters)
    n_scenes = len(scenes)
    histograms, quotes = _book_dialogues(book, name_map)

    scene_count: dict[str, int] = {}
    for scene in scenes:
        for name in scene.character_histogram:
            scene_count[name] = scene_count.get(name, 0) + 1
    names = sorted(
        set(scene_count) | {n for h in histograms for n in h}
    )
    icf = {
        n: max(0.0, np.log(n_scenes / (1 + scene_count.get(n, 0)))) for n in names
    }

    def scaled(hist: dict[str, int]) -> np.ndarray:
        return np.array([hist.get(n, 0) * icf[n] for n in names])

    chapter_vecs = [scaled(h) for h in histograms]
    scene_vecs = [scaled(s.character_histogram) for s in scenes]

    char_raw = np.zeros((n_chapters, n_scenes))
    dlg_raw = np.zeros((n_chapters, n_scenes))
    candidates: list[DialogueMatch] = []
    scene_tokens = [
        [(u.cue_ms, tokenize(u.text)) for u in scene.dialogues] for scene in scenes
    ]

    for i in range(n_chapters):
        cv = chapter_vecs[i]
        cn = np.linalg.norm(cv)
        for q in range(n_scenes):
            sv = scene_vecs[q]
            sn = np.linalg.norm(sv)
            if cn > 0 and sn > 0:
                char_raw[i, q] = float(cv @ sv) / (cn * sn)
            best = 0.0
            for pi, si, q_tokens in quotes[i]:
                for cue_ms, u_tokens in scene_tokens[q]:
                    sim = 1.0 - lcs_distance(q_tokens, u_tokens)
                    if sim >= DIALOGUE_SIM_FLOOR:
                        candidates.append(
                            DialogueMatch(
                                chapter=i + 1,
                                paragraph=pi,
                                sentence=si,
                                scene_id=scenes[q].scene_id,
                                cue_time_ms=cue_ms,
                                lcs_score=sim,
                            )
                        )
                        best = max(best, sim)
            dlg_raw[i, q] = best

    matrix = 0.5 * _minmax(char_raw) + 0.5 * alpha * _minmax(dlg_raw)
    return ChapterSceneSimilarity(
        matrix=matrix,
        char_raw=char_raw,
        dlg_raw=dlg_raw,
        scene_ids=[s.scene_id for s in scenes],
        candidates=candidates,
    )


@dataclass
class CoarseAlignment:
    scene_to_chapter: dict[int, int]        # scene_id -> chapter index (1-based)
    dialogue_matches: list[DialogueMatch]
    flagged_scenes: list[int]               # path nodes with suspiciously low score


def shortest_path_align(sim: ChapterSceneSimilarity) -> CoarseAlignment:
    """Monotonic minimum-cost path through the chapter-scene graph.

    Nodes are (chapter, scene) with cost 1 - similarity; from each node
    the path either stays in the chapter or advances to the next one,
    always moving one scene forward. Cost ties prefer staying, which
    avoids spurious chapter advances. Scenes on path nodes whose
    similarity sits below the 10th percentile of path similarities are
    flagged rather than reassigned.
    """
    matrix = sim.matrix
    n_chapters, n_scenes = matrix.shape
    if n_scenes < n_chapters:
        raise InfeasibleShape(f"{n_scenes} scenes cannot cover {n_chapters} chapters")

    cost = 1.0 - matrix
    dp = np.full((n_scenes, n_chapters), np.inf)
    stayed = np.zeros((n_scenes, n_chapters), dtype=bool)
    dp[0, 0] = cost[0, 0]
    for q in range(1, n_scenes):
        for i in range(n_chapters):
            stay = dp[q - 1, i]
            advance = dp[q - 1, i - 1] if i > 0 else np.inf
            if stay <= advance:
                dp[q, i] = stay + cost[i, q]
                stayed[q, i] = True
            else:
                dp[q, i] = advance + cost[i, q]
    if not np.isfinite(dp[n_scenes - 1, n_chapters - 1]):
        raise InfeasibleShape("no feasible path")  # unreachable given Q >= L

    path = np.zeros(n_scenes, dtype=np.int64)
    i = n_chapters - 1
    for q in range(n_scenes - 1, 0, -1):
        path[q] = i
        if not stayed[q, i]:
            i -= 1
    path[0] = i

    scene_ids = sim.scene_ids or list(range(1, n_scenes + 1))
    mapping: dict[int, int] = {}
    sims_on_path = np.empty(n_scenes)
    for q in range(n_scenes):
        mapping[scene_ids[q]] = int(path[q]) + 1
        sims_on_path[q] = matrix[path[q], q]
    floor = np.percentile(sims_on_path, 10.0)
    flagged = [
        scene_ids[q] for q in range(n_scenes) if sims_on_path[q] < floor
    ]

    matches = [
        m for m in sim.candidates if mapping.get(m.scene_id) == m.chapter
    ]
    return CoarseAlignment(
        scene_to_chapter=mapping, dialogue_matches=matches, flagged_scenes=flagged
    )
