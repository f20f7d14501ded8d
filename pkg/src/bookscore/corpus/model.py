"""Data model for parsed pipeline inputs.

All indices that appear in external files (chapter, paragraph, sentence,
shot, frame) are 1-based; Python list positions are converted at the
parser boundary and never leak out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Quote:
    """A quoted sentence inside a paragraph, with attributed speaker."""

    sentence_index: int          # 1-based within the paragraph
    speaker: str | None          # None when the attribution tool gave up


@dataclass(frozen=True)
class Paragraph:
    sentences: tuple[str, ...]
    word_count: int
    quotes: tuple[Quote, ...] = ()

    def quote_sentence_indices(self) -> set[int]:
        return {q.sentence_index for q in self.quotes}


@dataclass(frozen=True)
class Chapter:
    title: str
    paragraphs: tuple[Paragraph, ...]


@dataclass(frozen=True)
class BookStructure:
    chapters: tuple[Chapter, ...]

    def chapter(self, index: int) -> Chapter:
        """Chapter by 1-based index."""
        return self.chapters[index - 1]

    def paragraph(self, chapter_index: int, paragraph_index: int) -> Paragraph:
        return self.chapter(chapter_index).paragraphs[paragraph_index - 1]


@dataclass(frozen=True)
class Cue:
    start_ms: int
    end_ms: int
    text: str


@dataclass(frozen=True)
class SubtitleTrack:
    cues: tuple[Cue, ...]


@dataclass(frozen=True)
class TranscriptLine:
    speaker: str
    utterance: str


@dataclass(frozen=True)
class Transcript:
    lines: tuple[TranscriptLine, ...]


@dataclass(eq=False)
class Shot:
    shot_id: int
    start_ms: int
    end_ms: int
    # (n_frames, dim) unit rows; at least one frame per shot
    frame_embeddings: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Shot):
            return NotImplemented
        return (
            self.shot_id == other.shot_id
            and self.start_ms == other.start_ms
            and self.end_ms == other.end_ms
            and np.array_equal(self.frame_embeddings, other.frame_embeddings)
        )

    @property
    def mid_ms(self) -> int:
        return (self.start_ms + self.end_ms) // 2


@dataclass(eq=False)
class ShotTable:
    shots: list[Shot]
    dim: int

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShotTable):
            return NotImplemented
        return self.dim == other.dim and self.shots == other.shots

    def __len__(self) -> int:
        return len(self.shots)


@dataclass(eq=False)
class EmbeddingBundle:
    ids: tuple[str, ...]
    dim: int
    vectors: np.ndarray            # (n, dim) float32, unit rows except flagged zeros
    zero_flags: np.ndarray         # (n,) bool, True where the raw vector was zero
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._index:
            self._index = {key: i for i, key in enumerate(self.ids)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingBundle):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.dim == other.dim
            and np.array_equal(self.vectors, other.vectors)
            and np.array_equal(self.zero_flags, other.zero_flags)
        )

    def __contains__(self, key: str) -> bool:
        return key in self._index

    def vector(self, key: str) -> np.ndarray:
        from ..errors import MissingEmbedding

        try:
            return self.vectors[self._index[key]]
        except KeyError:
            raise MissingEmbedding(key) from None


@dataclass(frozen=True)
class EmotionRow:
    p_positive: float
    p_neutral: float
    p_negative: float


@dataclass(frozen=True)
class EmotionScoreTable:
    # keyed by (chapter_index, paragraph_index), both 1-based
    rows: dict[tuple[int, int], EmotionRow]


@dataclass(frozen=True)
class ConcretenessLexicon:
    ratings: dict[str, float]     # lowercase word -> rating in [1, 5]

    def __contains__(self, word: str) -> bool:
        return word in self.ratings

    def get(self, word: str) -> float | None:
        return self.ratings.get(word)
