"""JSON round-tripping for parsed structures (pipeline cache format)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import (
    BookStructure,
    Chapter,
    ConcretenessLexicon,
    Cue,
    EmotionRow,
    EmotionScoreTable,
    Paragraph,
    Quote,
    SubtitleTrack,
    Transcript,
    TranscriptLine,
)


def book_to_dict(book: BookStructure) -> dict[str, Any]:
    return {
        "chapters": [
            {
                "title": ch.title,
                "paragraphs": [
                    {
                        "sentences": list(p.sentences),
                        "word_count": p.word_count,
                        "quotes": [
                            {"sentence_index": q.sentence_index, "speaker": q.speaker}
                            for q in p.quotes
                        ],
                    }
                    for p in ch.paragraphs
                ],
            }
            for ch in book.chapters
        ]
    }


def book_from_dict(d: dict[str, Any]) -> BookStructure:
    return BookStructure(
        chapters=tuple(
            Chapter(
                title=ch["title"],
                paragraphs=tuple(
                    Paragraph(
                        sentences=tuple(p["sentences"]),
                        word_count=p["word_count"],
                        quotes=tuple(
                            Quote(q["sentence_index"], q["speaker"]) for q in p["quotes"]
                        ),
                    )
                    for p in ch["paragraphs"]
                ),
            )
            for ch in d["chapters"]
        )
    )


def subtitles_to_dict(track: SubtitleTrack) -> dict[str, Any]:
    return {"cues": [[c.start_ms, c.end_ms, c.text] for c in track.cues]}


def subtitles_from_dict(d: dict[str, Any]) -> SubtitleTrack:
    return SubtitleTrack(cues=tuple(Cue(*row) for row in d["cues"]))


def transcript_to_dict(t: Transcript) -> dict[str, Any]:
    return {"lines": [[ln.speaker, ln.utterance] for ln in t.lines]}


def transcript_from_dict(d: dict[str, Any]) -> Transcript:
    return Transcript(lines=tuple(TranscriptLine(*row) for row in d["lines"]))


def emotion_to_dict(t: EmotionScoreTable) -> dict[str, Any]:
    return {
        "rows": [
            [c, p, r.p_positive, r.p_neutral, r.p_negative]
            for (c, p), r in sorted(t.rows.items())
        ]
    }


def emotion_from_dict(d: dict[str, Any]) -> EmotionScoreTable:
    return EmotionScoreTable(
        rows={(c, p): EmotionRow(pp, pu, pn) for c, p, pp, pu, pn in d["rows"]}
    )


def lexicon_to_dict(lx: ConcretenessLexicon) -> dict[str, Any]:
    return {"ratings": dict(sorted(lx.ratings.items()))}


def lexicon_from_dict(d: dict[str, Any]) -> ConcretenessLexicon:
    return ConcretenessLexicon(ratings=dict(d["ratings"]))


def dump_json(path: str | Path, payload: dict[str, Any]) -> None:
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


def load_json(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))
