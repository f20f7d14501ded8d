"""SRT subtitle parsing and the plain-text transcript reader."""

from __future__ import annotations

import re
import warnings
from pathlib import Path

from ..errors import MalformedTimestamp, OverlapWarning
from .model import Cue, SubtitleTrack, Transcript, TranscriptLine

_TIMESTAMP_RE = re.compile(
    r"(\d{1,2}):(\d{2}):(\d{2})[,.](\d{3})\s*-->\s*(\d{1,2}):(\d{2}):(\d{2})[,.](\d{3})"
)
_TAG_RE = re.compile(r"</?[a-zA-Z][^>]*>|\{\\[^}]*\}")


def _ms(h: str, m: str, s: str, ms: str) -> int:
    return ((int(h) * 60 + int(m)) * 60 + int(s)) * 1000 + int(ms)


def parse_srt(raw: str) -> SubtitleTrack:
    """Parse SRT cue blocks into an ordered subtitle track.

    Multi-line cue text is joined with single spaces and formatting tags
    are stripped. Overlapping cues warn but do not fail.
    """
    blocks = re.split(r"\n\s*\n", raw.replace("\r\n", "\n").strip("﻿\n "))
    cues: list[Cue] = []
    for block in blocks:
        lines = [line.strip() for line in block.splitlines() if line.strip()]
        if not lines:
            continue
        cue_index = len(cues) + 1
        # The numeric counter line is optional in the wild; skip it if present.
        if lines[0].isdigit():
            lines = lines[1:]
        if not lines:
            raise MalformedTimestamp(f"cue {cue_index}: empty block")
        m = _TIMESTAMP_RE.match(lines[0])
        if not m:
            raise MalformedTimestamp(f"cue {cue_index}: bad timestamp line {lines[0]!r}")
        start = _ms(*m.groups()[:4])
        end = _ms(*m.groups()[4:])
        if end <= start:
            raise MalformedTimestamp(
                f"cue {cue_index}: end {end} ms not after start {start} ms"
            )
        text = _TAG_RE.sub("", " ".join(lines[1:])).strip()
        cues.append(Cue(start_ms=start, end_ms=end, text=text))

    cues.sort(key=lambda c: (c.start_ms, c.end_ms))
    for prev, cur in zip(cues, cues[1:]):
        if cur.start_ms < prev.end_ms:
            warnings.warn(
                f"cues at {prev.start_ms} ms and {cur.start_ms} ms overlap",
                OverlapWarning,
                stacklevel=2,
            )
            break
    return SubtitleTrack(cues=tuple(cues))


def parse_transcript(raw: str) -> Transcript:
    """Parse "SPEAKER: utterance" lines; blank lines are skipped."""
    lines = []
    for ln, line in enumerate(raw.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        speaker, sep, utterance = line.partition(":")
        if not sep or not speaker.strip():
            raise ValueError(f"transcript line {ln}: expected 'SPEAKER: utterance'")
        lines.append(TranscriptLine(speaker=speaker.strip(), utterance=utterance.strip()))
    return Transcript(lines=tuple(lines))


def load_srt(path: str | Path) -> SubtitleTrack:
    return parse_srt(Path(path).read_text(encoding="utf-8"))


def load_transcript(path: str | Path) -> Transcript:
    return parse_transcript(Path(path).read_text(encoding="utf-8"))
