"""Parsers and data model for all external pipeline inputs."""

from .audio import read_wav, resample, write_wav
from .book import attach_quotes, load_quote_sidecar, parse_book
from .embeddings import load_embeddings, resolve_all, write_embeddings
from .model import (
    BookStructure,
    Chapter,
    ConcretenessLexicon,
    Cue,
    EmbeddingBundle,
    EmotionRow,
    EmotionScoreTable,
    Paragraph,
    Quote,
    Shot,
    ShotTable,
    SubtitleTrack,
    Transcript,
    TranscriptLine,
)
from .srt import load_srt, load_transcript, parse_srt, parse_transcript
from .tables import (
    load_album_index,
    load_emotion_table,
    load_lexicon,
    load_shot_table,
)

__all__ = [
    "BookStructure", "Chapter", "Paragraph", "Quote",
    "SubtitleTrack", "Cue", "Transcript", "TranscriptLine",
    "ShotTable", "Shot", "EmbeddingBundle", "EmotionScoreTable", "EmotionRow",
    "ConcretenessLexicon",
    "parse_book", "attach_quotes", "load_quote_sidecar",
    "parse_srt", "parse_transcript", "load_srt", "load_transcript",
    "load_embeddings", "write_embeddings", "resolve_all",
    "load_shot_table", "load_emotion_table", "load_lexicon", "load_album_index",
    "read_wav", "write_wav", "resample",
]
