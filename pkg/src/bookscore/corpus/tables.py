"""TSV loaders: shot table, emotion scores, concreteness lexicon, album index."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import UnresolvedEmbedding
from .model import (
    ConcretenessLexicon,
    EmbeddingBundle,
    EmotionRow,
    EmotionScoreTable,
    Shot,
    ShotTable,
)

UNIT_NORM_TOL = 1e-4


def _rows(path: str | Path) -> list[tuple[int, list[str]]]:
    out = []
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        out.append((ln, line.split("\t")))
    return out


def load_shot_table(path: str | Path, frames: EmbeddingBundle) -> ShotTable:
    """Read shot rows and gather each shot's frame embeddings.

    Frame vectors live in the frames bundle under "shot:<id>:frame:<n>"
    with n counting from 1; a shot with no frame at n=1 is an error.
    """
    shots: list[Shot] = []
    for ln, parts in _rows(path):
        if len(parts) != 3:
            raise ValueError(f"{path}:{ln}: expected shot_id, start_ms, end_ms")
        shot_id, start_ms, end_ms = (int(p) for p in parts)
        if end_ms <= start_ms:
            raise ValueError(f"{path}:{ln}: shot {shot_id} has end <= start")
        vecs = []
        n = 1
        while f"shot:{shot_id}:frame:{n}" in frames:
            vecs.append(frames.vector(f"shot:{shot_id}:frame:{n}"))
            n += 1
        if not vecs:
            raise UnresolvedEmbedding(f"shot:{shot_id}:frame:1")
        emb = np.stack(vecs)
        norms = np.linalg.norm(emb, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ValueError(f"shot {shot_id}: frame embedding not unit norm")
        shots.append(Shot(shot_id=shot_id, start_ms=start_ms, end_ms=end_ms,
                          frame_embeddings=emb))

    shots.sort(key=lambda s: s.start_ms)
    for prev, cur in zip(shots, shots[1:]):
        if cur.start_ms < prev.end_ms:
            raise ValueError(
                f"shots {prev.shot_id} and {cur.shot_id} overlap in time"
            )
    return ShotTable(shots=shots, dim=frames.dim)


def load_emotion_table(path: str | Path, tol: float = 1e-3) -> EmotionScoreTable:
    """Read per-paragraph emotion probabilities; each row must sum to 1."""
    rows: dict[tuple[int, int], EmotionRow] = {}
    for ln, parts in _rows(path):
        if len(parts) != 5:
            raise ValueError(f"{path}:{ln}: expected chapter, paragraph, p_pos, p_neu, p_neg")
        chapter, paragraph = int(parts[0]), int(parts[1])
        p_pos, p_neu, p_neg = (float(p) for p in parts[2:])
        if abs(p_pos + p_neu + p_neg - 1.0) > tol:
            raise ValueError(f"{path}:{ln}: probabilities sum to {p_pos + p_neu + p_neg}")
        rows[(chapter, paragraph)] = EmotionRow(p_pos, p_neu, p_neg)
    return EmotionScoreTable(rows=rows)


def load_lexicon(path: str | Path) -> ConcretenessLexicon:
    ratings: dict[str, float] = {}
    for ln, parts in _rows(path):
        if len(parts) != 2:
            raise ValueError(f"{path}:{ln}: expected word, rating")
        rating = float(parts[1])
        if not 1.0 <= rating <= 5.0:
            raise ValueError(f"{path}:{ln}: rating {rating} outside [1, 5]")
        ratings[parts[0].lower()] = rating
    return ConcretenessLexicon(ratings=ratings)


def load_album_index(path: str | Path) -> list[tuple[str, Path, str]]:
    """Read the album TSV: track_id, wav path (relative to the TSV), title."""
    base = Path(path).parent
    tracks = []
    for ln, parts in _rows(path):
        if len(parts) != 3:
            raise ValueError(f"{path}:{ln}: expected track_id, path, title")
        track_id, rel, title = parts
        wav = (base / rel).resolve() if not Path(rel).is_absolute() else Path(rel)
        tracks.append((track_id, wav, title))
    return tracks
