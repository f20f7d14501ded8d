"""Book text parsing: chapter markers, paragraphs, sentences, quotes."""

from __future__ import annotations

import re
from pathlib import Path

from ..errors import EmptyChapter, NoChaptersFound
from ..text import split_sentences, whitespace_word_count
from .model import BookStructure, Chapter, Paragraph, Quote

DEFAULT_CHAPTER_MARKER = r"^\s*CHAPTER\b.*$"


def parse_book(raw: str, chapter_marker: str = DEFAULT_CHAPTER_MARKER) -> BookStructure:
    """Parse UTF-8 book text into chapters, paragraphs, and sentences.

    A line matching `chapter_marker` starts a new chapter and becomes its
    title. Paragraphs are blank-line separated blocks. Text before the
    first marker (front matter) is dropped.
    """
    marker = re.compile(chapter_marker)
    lines = raw.splitlines()

    chapter_starts = [i for i, line in enumerate(lines) if marker.match(line)]
    if not chapter_starts:
        raise NoChaptersFound(f"marker {chapter_marker!r} matched no line")

    chapters: list[Chapter] = []
    bounds = chapter_starts + [len(lines)]
    for idx, (start, end) in enumerate(zip(bounds, bounds[1:]), start=1):
        title = lines[start].strip()
        body = lines[start + 1 : end]
        paragraphs = _split_paragraphs(body)
        if not paragraphs:
            raise EmptyChapter(f"chapter {idx} ({title!r}) has no paragraphs")
        chapters.append(Chapter(title=title, paragraphs=tuple(paragraphs)))
    return BookStructure(chapters=tuple(chapters))


def _split_paragraphs(body_lines: list[str]) -> list[Paragraph]:
    paragraphs = []
    block: list[str] = []
    for line in body_lines + [""]:
        if line.strip():
            block.append(line.strip())
            continue
        if block:
            text = " ".join(block)
            sentences = split_sentences(text)
            paragraphs.append(
                Paragraph(
                    sentences=tuple(sentences),
                    word_count=sum(whitespace_word_count(s) for s in sentences),
                )
            )
            block = []
    return paragraphs


def load_quote_sidecar(path: str | Path) -> list[tuple[int, int, int, str]]:
    """Read the quote TSV: chapter, paragraph, sentence, speaker (1-based)."""
    rows = []
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"{path}:{ln}: expected 4 tab-separated fields")
        chapter, paragraph, sentence = (int(p) for p in parts[:3])
        rows.append((chapter, paragraph, sentence, parts[3].strip()))
    return rows


def attach_quotes(
    book: BookStructure, rows: list[tuple[int, int, int, str]]
) -> BookStructure:
    """Return a copy of `book` with quote annotations merged in.

    Rows pointing at nonexistent chapters/paragraphs/sentences raise
    IndexError: the sidecar must have been produced for this exact text.
    """
    per_par: dict[tuple[int, int], list[Quote]] = {}
    for chapter, paragraph, sentence, speaker in rows:
        par = book.paragraph(chapter, paragraph)
        if not 1 <= sentence <= len(par.sentences):
            raise IndexError(
                f"quote row ch={chapter} par={paragraph} sent={sentence}: "
                f"paragraph has {len(par.sentences)} sentences"
            )
        per_par.setdefault((chapter, paragraph), []).append(
            Quote(sentence_index=sentence, speaker=speaker or None)
        )

    chapters = []
    for ci, chapter_obj in enumerate(book.chapters, start=1):
        paragraphs = []
        for pi, par in enumerate(chapter_obj.paragraphs, start=1):
            quotes = tuple(
                sorted(per_par.get((ci, pi), []), key=lambda q: q.sentence_index)
            )
            paragraphs.append(
                Paragraph(sentences=par.sentences, word_count=par.word_count, quotes=quotes)
            )
        chapters.append(Chapter(title=chapter_obj.title, paragraphs=tuple(paragraphs)))
    return BookStructure(chapters=tuple(chapters))
