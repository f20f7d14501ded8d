"""Assign one music excerpt to every chapter segment.

Segments with matched movie scenes import the track heard near their
evidence timestamps; everything else (and every cue failure) falls back
to retrieval among emotion-compatible excerpts of the same album. All
randomness is keyed per segment so the manifest is reproducible from
the seed alone.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .corpus.model import EmotionScoreTable
from .errors import EmptyPool, MissingScores
from .fingerprint import TrackLog
from .musicseg import MusicSegment
from .refine import SegmentSceneMatch
from .textseg import ChapterSegment

CUE_NEIGHBORHOOD_MS = 15_000
READING_WPM = 250.0
EMOTIONS = ("positive", "neutral", "negative")


@dataclass(frozen=True)
class SegmentEmotion:
    key: tuple[int, int]
    label: str                      # positive|neutral|negative
    vote_counts: tuple[int, int, int]


@dataclass(frozen=True)
class CueFailure:
    reason: str


@dataclass
class ManifestEntry:
    chapter: int
    segment: int
    paragraph_range: tuple[int, int]
    track_id: str
    audio_in_s: float
    audio_out_s: float
    loop: bool
    crossfade_ms: int
    provenance: dict
    text_emotion: str
    music_mode: str
    estimated_read_minutes: float


@dataclass
class SoundtrackManifest:
    version: int
    book_id: str
    seed: int
    entries: list[ManifestEntry]


def _paragraph_label(p_pos: float, p_neu: float, p_neg: float) -> str:
    probs = (p_pos, p_neu, p_neg)
    top = max(probs)
    if sum(1 for p in probs if p == top) > 1:
        return "neutral"
    return EMOTIONS[probs.index(top)]


def label_text_emotion(
    segment: ChapterSegment, table: EmotionScoreTable
) -> SegmentEmotion:
    """Majority vote of per-paragraph labels; any tie resolves to neutral."""
    votes = {"positive": 0, "neutral": 0, "negative": 0}
    for p in range(segment.first_par, segment.last_par + 1):
        row = table.rows.get((segment.chapter_index, p))
        if row is None:
            raise MissingScores(f"ch:{segment.chapter_index}:par:{p}")
        votes[_paragraph_label(row.p_positive, row.p_neutral, row.p_negative)] += 1
    counts = tuple(votes[e] for e in EMOTIONS)
    top = max(counts)
    label = "neutral" if counts.count(top) > 1 else EMOTIONS[counts.index(top)]
    return SegmentEmotion(key=segment.key, label=label, vote_counts=counts)


def _compatible(text_label: str, seg: MusicSegment) -> bool:
    if seg.valence == "unset":
        return False
    if text_label == "neutral":
        return True
    return (text_label == "positive") == (seg.valence == "positive")


def _segment_rng(seed: int, chapter: int, segment: int) -> random.Random:
    # String seeding hashes through sha512: stable across platforms/runs.
    return random.Random(f"{seed}:{chapter}:{segment}")


def _entry(
    segment: ChapterSegment,
    emotion: str,
    choice: MusicSegment,
    provenance: dict,
    crossfade_ms: int,
) -> ManifestEntry:
    return ManifestEntry(
        chapter=segment.chapter_index,
        segment=segment.segment_index,
        paragraph_range=segment.paragraph_range,
        track_id=choice.track_id,
        audio_in_s=choice.start_s,
        audio_out_s=choice.end_s,
        loop=True,
        crossfade_ms=crossfade_ms,
        provenance=provenance,
        text_emotion=emotion,
        music_mode=choice.mode,
        estimated_read_minutes=segment.word_count / READING_WPM,
    )


def import_movie_cue(
    segment: ChapterSegment,
    emotion: str,
    matches: list[SegmentSceneMatch],
    track_log: TrackLog,
    music_segments: list[MusicSegment],
    rng_seed: int,
    crossfade_ms: int = 2000,
) -> ManifestEntry | CueFailure:
    """Pick the album track heard near the segment's movie evidence.

    Each evidence timestamp supports the tracks logged within +/-15 s of
    it; the most-supported track wins (confidence, then track id, on
    ties). Among that track's emotion-compatible excerpts one is chosen
    by the segment-keyed generator.
    """
    timestamps = sorted(
        {ev.movie_ms for m in matches for ev in m.evidence}
    )
    support: dict[str, set[int]] = {}
    confidence: dict[str, int] = {}
    for ts in timestamps:
        near = [
            e for e in track_log.entries
            if abs(e.movie_ms - ts) <= CUE_NEIGHBORHOOD_MS
        ]
        for e in near:
            support.setdefault(e.track_id, set()).add(ts)
            confidence[e.track_id] = max(confidence.get(e.track_id, 0), e.confidence)
    if not support:
        return CueFailure("no track log entry near any evidence timestamp")

    track_id = min(
        support, key=lambda t: (-len(support[t]), -confidence[t], t)
    )
    pool = [
        ms for ms in music_segments
        if ms.track_id == track_id and _compatible(emotion, ms)
    ]
    if not pool:
        return CueFailure(f"track {track_id} has no {emotion}-compatible segment")

    rng = _segment_rng(rng_seed, segment.chapter_index, segment.segment_index)
    choice = pool[rng.randrange(len(pool))]
    provenance = {
        "kind": "movie_cue",
        "scene_ids": sorted({m.scene_id for m in matches}),
        "cue_times_ms": sorted(support[track_id]),
    }
    return _entry(segment, emotion, choice, provenance, crossfade_ms)


def emotion_retrieve(
    segment: ChapterSegment,
    emotion: str,
    music_segments: list[MusicSegment],
    rng_seed: int,
    crossfade_ms: int = 2000,
) -> ManifestEntry:
    """Uniform pick among all emotion-compatible album excerpts."""
    pool = [ms for ms in music_segments if _compatible(emotion, ms)]
    if not pool:
        raise EmptyPool(f"no {emotion}-compatible music segment in the album")
    rng = _segment_rng(rng_seed, segment.chapter_index, segment.segment_index)
    choice = pool[rng.randrange(len(pool))]
    return _entry(segment, emotion, choice, {"kind": "emotion"}, crossfade_ms)


def weave_all(
    segments: list[ChapterSegment],
    matches: dict[tuple[int, int], list[SegmentSceneMatch]],
    track_log: TrackLog,
    music_segments: list[MusicSegment],
    emotion_table: EmotionScoreTable,
    seed: int,
    book_id: str = "book",
    crossfade_ms: int = 2000,
) -> SoundtrackManifest:
    """One manifest entry per segment, ordered by (chapter, segment)."""
    entries = []
    for segment in sorted(segments, key=lambda s: s.key):
        emotion = label_text_emotion(segment, emotion_table).label
        seg_matches = matches.get(segment.key, [])
        entry: ManifestEntry | CueFailure
        if seg_matches:
            entry = import_movie_cue(
                segment, emotion, seg_matches, track_log, music_segments,
                seed, crossfade_ms,
            )
        else:
            entry = CueFailure("segment has no matched scenes")
        if isinstance(entry, CueFailure):
            entry = emotion_retrieve(
                segment, emotion, music_segments, seed, crossfade_ms
            )
        entries.append(entry)
    return SoundtrackManifest(version=1, book_id=book_id, seed=seed, entries=entries)


# --- serialization ----------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.3f}"


def manifest_to_json(manifest: SoundtrackManifest) -> str:
    """Hand-rolled writer: fixed key order, times with 3 fractional digits."""
    lines = [
        "{",
        f'  "version": {manifest.version},',
        f'  "book_id": {json.dumps(manifest.book_id)},',
        f'  "seed": {manifest.seed},',
        '  "entries": [',
    ]
    for n, e in enumerate(manifest.entries):
        if e.provenance["kind"] == "movie_cue":
            prov = (
                '{"kind": "movie_cue", "scene_ids": '
                + json.dumps(e.provenance["scene_ids"])
                + ', "cue_times_ms": '
                + json.dumps(e.provenance["cue_times_ms"])
                + "}"
            )
        else:
            prov = '{"kind": "emotion"}'
        body = ", ".join(
            [
                f'"chapter": {e.chapter}',
                f'"segment": {e.segment}',
                f'"paragraph_range": [{e.paragraph_range[0]}, {e.paragraph_range[1]}]',
                f'"track_id": {json.dumps(e.track_id)}',
                f'"audio_in_s": {_fmt(e.audio_in_s)}',
                f'"audio_out_s": {_fmt(e.audio_out_s)}',
                f'"loop": {"true" if e.loop else "false"}',
                f'"crossfade_ms": {e.crossfade_ms}',
                f'"provenance": {prov}',
                f'"text_emotion": {json.dumps(e.text_emotion)}',
                f'"music_mode": {json.dumps(e.music_mode)}',
                f'"estimated_read_minutes": {_fmt(e.estimated_read_minutes)}',
            ]
        )
        comma = "," if n < len(manifest.entries) - 1 else ""
        lines.append("    {" + body + "}" + comma)
    lines += ["  ]", "}", ""]
    return "\n".join(lines)


def manifest_from_json(text: str) -> SoundtrackManifest:
    d = json.loads(text)
    entries = [
        ManifestEntry(
            chapter=e["chapter"],
            segment=e["segment"],
            paragraph_range=(e["paragraph_range"][0], e["paragraph_range"][1]),
            track_id=e["track_id"],
            audio_in_s=e["audio_in_s"],
            audio_out_s=e["audio_out_s"],
            loop=e["loop"],
            crossfade_ms=e["crossfade_ms"],
            provenance=e["provenance"],
            text_emotion=e["text_emotion"],
            music_mode=e["music_mode"],
            estimated_read_minutes=e["estimated_read_minutes"],
        )
        for e in d["entries"]
    ]
    return SoundtrackManifest(
        version=d["version"], book_id=d["book_id"], seed=d["seed"], entries=entries
    )
