"""Tokenization and sentence splitting shared by the text-facing stages."""

from __future__ import annotations

import re

# Abbreviations that end with a period but do not terminate a sentence.
ABBREVIATIONS = frozenset(
    {
        "mr", "mrs", "ms", "dr", "prof", "st", "mt", "no", "vs", "etc",
        "jr", "sr", "capt", "col", "gen", "lt", "sgt", "rev", "hon",
        "e.g", "i.e", "cf", "al",
    }
)

_TOKEN_RE = re.compile(r"[a-z0-9']+")
_SENTENCE_END_RE = re.compile(r"([.!?]+)([\"'”’)\]]*)(\s+|$)")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens with punctuation stripped (apostrophes kept)."""
    return _TOKEN_RE.findall(text.lower())


def whitespace_word_count(text: str) -> int:
    return len(text.split())


def split_sentences(paragraph: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace.

    A period directly after a known abbreviation does not end the
    sentence. Trailing close-quotes stay attached to their sentence.
    """
    text = " ".join(paragraph.split())
    if not text:
        return []
    sentences: list[str] = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(text):
        punct = m.group(1)
        if punct == ".":
            prev = text[start:m.start()].rsplit(None, 1)
            last_word = prev[-1] if prev else ""
            if last_word.lower().lstrip("(\"'“‘") in ABBREVIATIONS:
                continue
        end = m.end(2)
        sentence = text[start:end].strip()
        if sentence:
            sentences.append(sentence)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
