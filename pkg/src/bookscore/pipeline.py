"""Stage orchestration: artifact files, the stage DAG, caching, reporting.

Every stage reads its inputs from files, computes pure-function results,
and writes its artifacts atomically (temp file + rename), so an
interrupted run never leaves a half-written artifact and identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from . import align as align_mod
from . import musicseg, refine, scenes as scenes_mod, textseg, weave as weave_mod
from .config import PipelineConfig
from .corpus import (
    attach_quotes,
    load_album_index,
    load_embeddings,
    load_emotion_table,
    load_lexicon,
    load_quote_sidecar,
    load_shot_table,
    load_srt,
    load_transcript,
    parse_book,
    read_wav,
    resolve_all,
    write_wav,
)
from .corpus import serde
from .corpus.model import BookStructure, ShotTable
from .errors import AudioCutOutOfRange, MissingPrerequisite
from .fingerprint import (
    FingerprintConfig,
    build_index,
    save_index,
    scan_movie,
    track_log_from_tsv,
    track_log_to_tsv,
)
from .musicseg import MusicSegment
from .refine import Evidence, SegmentSceneMatch
from .scenes import Scene
from .textseg import ChapterSegment
from .weave import manifest_from_json, manifest_to_json

STAGES = [
    "ingest",
    "segment-text",
    "segment-music",
    "scenes",
    "fingerprint",
    "align",
    "refine",
    "weave",
    "export",
]

_PREREQUISITES: dict[str, list[str]] = {
    "ingest": [],
    "segment-text": ["ingest/book.json"],
    "segment-music": [],
    "scenes": ["ingest/book.json"],
    "fingerprint": [],
    "align": ["ingest/book.json", "scenes.tsv"],
    "refine": ["ingest/book.json", "segments.tsv", "scenes.tsv",
               "coarse_alignment.tsv", "dialogue_matches.tsv"],
    "weave": ["segments.tsv", "music_segments.tsv", "track_log.tsv",
              "segment_matches.tsv", "ingest/emotion.json"],
    "export": ["manifest.json", "ingest/book.json", "segments.tsv",
               "music_segments.tsv"],
}


# --- small file helpers -----------------------------------------------------

def write_atomic(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".tmp-{path.name}-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


# --- artifact TSV codecs ----------------------------------------------------

def segments_to_tsv(segments: list[ChapterSegment]) -> str:
    lines = ["# chapter\tsegment\tfirst_par\tlast_par\tword_count"]
    for s in segments:
        lines.append(
            f"{s.chapter_index}\t{s.segment_index}\t{s.first_par}\t{s.last_par}\t{s.word_count}"
        )
    return "\n".join(lines) + "\n"


def segments_from_tsv(text: str) -> list[ChapterSegment]:
    out = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        ch, seg, first, last, words = line.split("\t")
        out.append(
            ChapterSegment(
                chapter_index=int(ch),
                segment_index=int(seg),
                first_par=int(first),
                last_par=int(last),
                word_count=int(words),
            )
        )
    return out


def music_segments_to_tsv(segments: list[MusicSegment]) -> str:
    lines = ["# track_id\tseg\tstart_s\tend_s\tmode\tvalence"]
    for s in segments:
        lines.append(
            f"{s.track_id}\t{s.segment_index}\t{s.start_s:.3f}\t{s.end_s:.3f}"
            f"\t{s.mode}\t{s.valence}"
        )
    return "\n".join(lines) + "\n"


def music_segments_from_tsv(text: str) -> list[MusicSegment]:
    out = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        track, seg, start, end, mode, valence = line.split("\t")
        out.append(
            MusicSegment(
                track_id=track,
                segment_index=int(seg),
                start_s=float(start),
                end_s=float(end),
                mean_keystrength=np.zeros(24),
                mode=mode,
                valence=valence,
            )
        )
    return out


def scenes_to_tsv(scene_list: list[Scene], shots: ShotTable) -> str:
    lines = ["# scene_id\tfirst_shot\tlast_shot\tstart_ms\tend_ms"]
    for s in scene_list:
        lines.append(
            f"{s.scene_id}\t{shots.shots[s.first_shot].shot_id}"
            f"\t{shots.shots[s.last_shot].shot_id}\t{s.start_ms}\t{s.end_ms}"
        )
    return "\n".join(lines) + "\n"


def scenes_from_tsv(text: str, shots: ShotTable) -> list[Scene]:
    position = {shot.shot_id: i for i, shot in enumerate(shots.shots)}
    out = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        scene_id, first_id, last_id, start_ms, end_ms = (int(v) for v in line.split("\t"))
        out.append(
            Scene(
                scene_id=scene_id,
                first_shot=position[first_id],
                last_shot=position[last_id],
                start_ms=start_ms,
                end_ms=end_ms,
            )
        )
    return out


def matches_to_tsv(matches: dict[tuple[int, int], list[SegmentSceneMatch]]) -> str:
    lines = ["# chapter\tsegment\tscene\tevidence_kind\tmovie_ms\tscore"]
    for key in sorted(matches):
        for m in matches[key]:
            for ev in m.evidence:
                lines.append(
                    f"{m.chapter}\t{m.segment}\t{m.scene_id}"
                    f"\t{ev.kind}\t{ev.movie_ms}\t{ev.score:.4f}"
                )
    return "\n".join(lines) + "\n"


def matches_from_tsv(
    text: str, segments: list[ChapterSegment]
) -> dict[tuple[int, int], list[SegmentSceneMatch]]:
    grouped: dict[tuple[int, int, int], SegmentSceneMatch] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        ch, seg, scene, kind, movie_ms, score = line.split("\t")
        key = (int(ch), int(seg), int(scene))
        if key not in grouped:
            grouped[key] = SegmentSceneMatch(
                chapter=key[0], segment=key[1], scene_id=key[2]
            )
        grouped[key].evidence.append(
            Evidence(kind=kind, movie_ms=int(movie_ms), score=float(score))
        )
    out: dict[tuple[int, int], list[SegmentSceneMatch]] = {
        s.key: [] for s in segments
    }
    for (ch, seg, _), match in sorted(grouped.items()):
        out.setdefault((ch, seg), []).append(match)
    return out


def dialogue_matches_to_tsv(matches: list[align_mod.DialogueMatch]) -> str:
    lines = ["# chapter\tparagraph\tsentence\tscene\tcue_ms\tscore"]
    for m in sorted(matches, key=lambda m: (m.chapter, m.paragraph, m.sentence, m.scene_id)):
        lines.append(
            f"{m.chapter}\t{m.paragraph}\t{m.sentence}\t{m.scene_id}"
            f"\t{m.cue_time_ms}\t{m.lcs_score:.4f}"
        )
    return "\n".join(lines) + "\n"


def dialogue_matches_from_tsv(text: str) -> list[align_mod.DialogueMatch]:
    out = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        ch, par, sent, scene, cue_ms, score = line.split("\t")
        out.append(
            align_mod.DialogueMatch(
                chapter=int(ch), paragraph=int(par), sentence=int(sent),
                scene_id=int(scene), cue_time_ms=int(cue_ms), lcs_score=float(score),
            )
        )
    return out


# --- the pipeline -----------------------------------------------------------

class Pipeline:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.log_import: Path | None = None

    # -- plumbing --

    def path(self, name: str) -> Path:
        return self.out / name

    def _require(self, stage: str) -> None:
        for name in _PREREQUISITES[stage]:
            if not self.path(name).exists():
                raise MissingPrerequisite(name)

    def _state(self) -> dict:
        state_path = self.path("stage_state.json")
        if state_path.exists():
            return json.loads(state_path.read_text(encoding="utf-8"))
        return {}

    def _save_state(self, state: dict) -> None:
        write_atomic(self.path("stage_state.json"), json.dumps(state, indent=1) + "\n")

    def _stage_fingerprint(self, stage: str) -> str:
        digest = hashlib.sha256()
        for name in _PREREQUISITES[stage]:
            digest.update(name.encode())
            digest.update(sha256_file(self.path(name)).encode())
        for p in self._source_inputs(stage):
            if p and Path(p).exists():
                digest.update(str(p).encode())
                digest.update(sha256_file(Path(p)).encode())
        digest.update(json.dumps(self._stage_params(stage), sort_keys=True).encode())
        return digest.hexdigest()

    def _source_inputs(self, stage: str) -> list[Path | None]:
        cfg = self.cfg
        album = []
        if stage in ("segment-music", "fingerprint", "export") and cfg.album_index:
            album = [cfg.album_index] + [p for _, p, _ in load_album_index(cfg.album_index)]

        def bundle(name: str) -> list[Path]:
            return list(self._bundle_path(name))

        return {
            "ingest": [cfg.book, cfg.quotes, cfg.subtitles, cfg.transcript,
                       cfg.shots, cfg.emotion, cfg.lexicon]
                      + bundle("paragraphs") + bundle("sentences") + bundle("frames"),
            "segment-text": bundle("paragraphs"),
            "segment-music": album,
            "scenes": [cfg.shots] + bundle("frames"),
            "fingerprint": album + [cfg.movie_audio, self.log_import],
            "align": [cfg.subtitles, cfg.transcript, cfg.shots] + bundle("frames"),
            "refine": [cfg.shots, cfg.stopwords] + bundle("sentences") + bundle("frames"),
            "weave": [],
            "export": album,
        }[stage]

    def _stage_params(self, stage: str) -> dict:
        cfg = self.cfg
        return {
            "ingest": {"marker": cfg.chapter_marker},
            "segment-text": {"level": cfg.textseg_partition_level},
            "segment-music": {
                "window": cfg.musicseg_window_s, "overlap": cfg.musicseg_overlap,
                "kernel": cfg.musicseg_kernel, "min_len": cfg.musicseg_min_len_s,
                "std": cfg.musicseg_std_factor, "taper": cfg.musicseg_taper,
            },
            "scenes": {"q": cfg.scenes_q},
            "fingerprint": {
                "fan_out": cfg.fp_fan_out, "zone": cfg.fp_zone_s,
                "accept": cfg.fp_accept_min, "margin": cfg.fp_margin,
                "window": cfg.fp_window_s, "stride": cfg.fp_stride_s,
                "log_import": str(self.log_import) if self.log_import else "",
            },
            "align": {"alpha": cfg.align_alpha},
            "refine": {"theta": cfg.refine_theta, "top_k": cfg.refine_top_k},
            "weave": {"seed": cfg.weave_seed, "crossfade": cfg.weave_crossfade_ms,
                      "book_id": cfg.book_id},
            "export": {},
        }[stage]

    def _bundle_path(self, name: str) -> tuple[Path, Path]:
        base = Path(self.cfg.embeddings_dir)
        return base / f"{name}.manifest.json", base / f"{name}.f32"

    def _load_bundle(self, name: str):
        manifest, blob = self._bundle_path(name)
        return load_embeddings(manifest, blob)

    def _load_book(self) -> BookStructure:
        return serde.book_from_dict(serde.load_json(self.path("ingest/book.json")))

    def _load_shots(self) -> ShotTable:
        return load_shot_table(self.cfg.shots, self._load_bundle("frames"))

    # -- stages --

    def run(self, stage: str) -> None:
        """Execute one stage (or `all`), enforcing the prerequisite DAG."""
        if stage == "all":
            state = self._state()
            for name in STAGES:
                self._require(name)
                fp = self._stage_fingerprint(name)
                outputs_exist = all(
                    self.path(a).exists() for a in self._outputs(name)
                )
                if state.get(name) == fp and outputs_exist:
                    continue
                self._dispatch(name)
                state[name] = self._stage_fingerprint(name)
                # anything downstream is now suspect
                for later in STAGES[STAGES.index(name) + 1 :]:
                    state.pop(later, None)
                self._save_state(state)
            return
        self._require(stage)
        self._dispatch(stage)
        state = self._state()
        state[stage] = self._stage_fingerprint(stage)
        for later in STAGES[STAGES.index(stage) + 1 :]:
            state.pop(later, None)
        self._save_state(state)

    def _outputs(self, stage: str) -> list[str]:
        return {
            "ingest": ["ingest/book.json", "ingest/subtitles.json",
                       "ingest/transcript.json", "ingest/emotion.json",
                       "ingest/lexicon.json", "ingest/validation.json"],
            "segment-text": ["segments.tsv"],
            "segment-music": ["music_segments.tsv"],
            "scenes": ["scenes.tsv"],
            "fingerprint": ["track_log.tsv"],
            "align": ["speaker_map.tsv", "coarse_alignment.tsv",
                      "dialogue_matches.tsv", "align_flags.tsv"],
            "refine": ["segment_matches.tsv"],
            "weave": ["manifest.json", "report.txt"],
            "export": ["bundle/manifest.json"],
        }[stage]

    def _dispatch(self, stage: str) -> None:
        method = getattr(self, "stage_" + stage.replace("-", "_"))
        method()

    def stage_ingest(self) -> None:
        cfg = self.cfg
        book = parse_book(
            Path(cfg.book).read_text(encoding="utf-8"), cfg.chapter_marker
        )
        if cfg.quotes:
            book = attach_quotes(book, load_quote_sidecar(cfg.quotes))
        subs = load_srt(cfg.subtitles)
        transcript = load_transcript(cfg.transcript)
        paragraphs_b = self._load_bundle("paragraphs")
        sentences_b = self._load_bundle("sentences")
        frames_b = self._load_bundle("frames")
        shots = load_shot_table(cfg.shots, frames_b)
        emotion = load_emotion_table(cfg.emotion)
        lexicon = load_lexicon(cfg.lexicon)

        # referenced-key audit: each key must live in exactly one bundle
        bundles = {"paragraphs": paragraphs_b, "sentences": sentences_b,
                   "frames": frames_b}
        keys: list[str] = []
        for ci, chapter in enumerate(book.chapters, start=1):
            for pi, par in enumerate(chapter.paragraphs, start=1):
                keys.append(f"ch:{ci}:par:{pi}")
                keys.extend(
                    f"ch:{ci}:par:{pi}:sent:{si}"
                    for si in range(1, len(par.sentences) + 1)
                )
        for shot in shots.shots:
            keys.append(f"shot:{shot.shot_id}:frame:1")
        resolve_all(keys, bundles)

        write_atomic(
            self.path("ingest/book.json"),
            json.dumps(serde.book_to_dict(book), ensure_ascii=False, indent=1) + "\n",
        )
        write_atomic(
            self.path("ingest/subtitles.json"),
            json.dumps(serde.subtitles_to_dict(subs), ensure_ascii=False, indent=1) + "\n",
        )
        write_atomic(
            self.path("ingest/transcript.json"),
            json.dumps(serde.transcript_to_dict(transcript), ensure_ascii=False, indent=1) + "\n",
        )
        write_atomic(
            self.path("ingest/emotion.json"),
            json.dumps(serde.emotion_to_dict(emotion), indent=1) + "\n",
        )
        write_atomic(
            self.path("ingest/lexicon.json"),
            json.dumps(serde.lexicon_to_dict(lexicon), ensure_ascii=False, indent=1) + "\n",
        )
        validation = {
            "chapters": len(book.chapters),
            "paragraphs": sum(len(c.paragraphs) for c in book.chapters),
            "sentences": sum(
                len(p.sentences) for c in book.chapters for p in c.paragraphs
            ),
            "cues": len(subs.cues),
            "transcript_lines": len(transcript.lines),
            "shots": len(shots),
            "emotion_rows": len(emotion.rows),
            "lexicon_words": len(lexicon.ratings),
        }
        write_atomic(
            self.path("ingest/validation.json"), json.dumps(validation, indent=1) + "\n"
        )

    def stage_segment_text(self) -> None:
        book = self._load_book()
        bundle = self._load_bundle("paragraphs")
        segments = textseg.segment_book(
            book, bundle, self.cfg.textseg_partition_level
        )
        write_atomic(self.path("segments.tsv"), segments_to_tsv(segments))

    def stage_segment_music(self) -> None:
        cfg = self.cfg
        all_segments: list[MusicSegment] = []
        for track_id, wav_path, _title in load_album_index(cfg.album_index):
            samples, sr = read_wav(wav_path)
            segs, series, curve = musicseg.segment_track(
                track_id, samples, sr,
                window_s=cfg.musicseg_window_s,
                overlap=cfg.musicseg_overlap,
                kernel_size=cfg.musicseg_kernel,
                min_len_s=cfg.musicseg_min_len_s,
                std_factor=cfg.musicseg_std_factor,
                taper=cfg.musicseg_taper,
            )
            all_segments.extend(segs)
            csv_lines = ["t,novelty"] + [
                f"{series.frame_time(t):.3f},{curve[t]:.6f}" for t in range(len(curve))
            ]
            write_atomic(
                self.path(f"novelty/{track_id}.csv"), "\n".join(csv_lines) + "\n"
            )
        write_atomic(
            self.path("music_segments.tsv"), music_segments_to_tsv(all_segments)
        )

    def stage_scenes(self) -> None:
        shots = self._load_shots()
        q = self.cfg.scenes_q or max(1, round(len(shots) / 21))
        scene_list = scenes_mod.group_scenes(shots, q)
        write_atomic(self.path("scenes.tsv"), scenes_to_tsv(scene_list, shots))

    def stage_fingerprint(self) -> None:
        cfg = self.cfg
        if self.log_import is not None:
            log = track_log_from_tsv(
                Path(self.log_import).read_text(encoding="utf-8")
            )
            write_atomic(self.path("track_log.tsv"), track_log_to_tsv(log))
            return
        fp_cfg = FingerprintConfig(
            fan_out=cfg.fp_fan_out,
            target_zone_s=cfg.fp_zone_s,
            accept_min=cfg.fp_accept_min,
            accept_margin=cfg.fp_margin,
            window_s=cfg.fp_window_s,
            stride_s=cfg.fp_stride_s,
        )
        tracks = []
        for track_id, wav_path, _title in load_album_index(cfg.album_index):
            samples, sr = read_wav(wav_path)
            tracks.append((track_id, samples, sr))
        index = build_index(tracks, fp_cfg)
        index_path = self.path("fingerprint.idx")
        index_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = index_path.with_name(".tmp-" + index_path.name)
        save_index(index, tmp)
        os.replace(tmp, index_path)

        movie, sr = read_wav(cfg.movie_audio)
        log = scan_movie(index, movie, sr, fp_cfg)
        write_atomic(self.path("track_log.tsv"), track_log_to_tsv(log))

    def stage_align(self) -> None:
        book = self._load_book()
        subs = serde.subtitles_from_dict(
            serde.load_json(self.path("ingest/subtitles.json"))
        )
        transcript = serde.transcript_from_dict(
            serde.load_json(self.path("ingest/transcript.json"))
        )
        shots = self._load_shots()
        scene_list = scenes_from_tsv(
            self.path("scenes.tsv").read_text(encoding="utf-8"), shots
        )

        speakers = align_mod.dtw_attribute_speakers(subs, transcript)
        scene_list = scenes_mod.attach_dialogue(scene_list, subs, speakers)

        book_speakers = sorted(
            {q.speaker for c in book.chapters for p in c.paragraphs
             for q in p.quotes if q.speaker}
        )
        movie_speakers = sorted({ln.speaker for ln in transcript.lines})
        name_map = align_mod.match_character_names(book_speakers, movie_speakers)

        sim = align_mod.chapter_scene_similarity(
            book, scene_list, name_map, alpha=self.cfg.align_alpha
        )
        coarse = align_mod.shortest_path_align(sim)

        speaker_lines = ["# cue_index\tspeaker"]
        for i, s in enumerate(speakers, start=1):
            speaker_lines.append(f"{i}\t{s or ''}")
        write_atomic(self.path("speaker_map.tsv"), "\n".join(speaker_lines) + "\n")

        coarse_lines = ["# scene_id\tchapter"]
        for scene_id in sorted(coarse.scene_to_chapter):
            coarse_lines.append(f"{scene_id}\t{coarse.scene_to_chapter[scene_id]}")
        write_atomic(self.path("coarse_alignment.tsv"), "\n".join(coarse_lines) + "\n")

        write_atomic(
            self.path("dialogue_matches.tsv"),
            dialogue_matches_to_tsv(coarse.dialogue_matches),
        )
        flag_lines = ["# flagged_scene_id"]
        flag_lines += [str(s) for s in coarse.flagged_scenes]
        write_atomic(self.path("align_flags.tsv"), "\n".join(flag_lines) + "\n")

    def stage_refine(self) -> None:
        book = self._load_book()
        segments = segments_from_tsv(
            self.path("segments.tsv").read_text(encoding="utf-8")
        )
        lexicon = serde.lexicon_from_dict(
            serde.load_json(self.path("ingest/lexicon.json"))
        )
        stopwords = None
        if self.cfg.stopwords:
            stopwords = frozenset(
                w.strip().lower()
                for w in Path(self.cfg.stopwords).read_text(encoding="utf-8").split()
                if w.strip()
            )
        scores = refine.score_sentences(book, segments, lexicon, stopwords)
        shots = self._load_shots()
        scene_list = scenes_from_tsv(
            self.path("scenes.tsv").read_text(encoding="utf-8"), shots
        )
        coarse = align_mod.CoarseAlignment(
            scene_to_chapter={},
            dialogue_matches=dialogue_matches_from_tsv(
                self.path("dialogue_matches.tsv").read_text(encoding="utf-8")
            ),
            flagged_scenes=[],
        )
        for line in self.path("coarse_alignment.tsv").read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            scene_id, chapter = (int(v) for v in line.split("\t"))
            coarse.scene_to_chapter[scene_id] = chapter

        sentence_bundle = self._load_bundle("sentences")
        matches = refine.match_all_segments(
            segments, scores, sentence_bundle, shots, scene_list, coarse,
            theta=self.cfg.refine_theta, top_k=self.cfg.refine_top_k,
        )
        write_atomic(self.path("segment_matches.tsv"), matches_to_tsv(matches))

    def stage_weave(self) -> None:
        cfg = self.cfg
        segments = segments_from_tsv(
            self.path("segments.tsv").read_text(encoding="utf-8")
        )
        music_segments = music_segments_from_tsv(
            self.path("music_segments.tsv").read_text(encoding="utf-8")
        )
        track_log = track_log_from_tsv(
            self.path("track_log.tsv").read_text(encoding="utf-8")
        )
        matches = matches_from_tsv(
            self.path("segment_matches.tsv").read_text(encoding="utf-8"), segments
        )
        emotion = serde.emotion_from_dict(
            serde.load_json(self.path("ingest/emotion.json"))
        )
        manifest = weave_mod.weave_all(
            segments, matches, track_log, music_segments, emotion,
            seed=cfg.weave_seed, book_id=cfg.book_id,
            crossfade_ms=cfg.weave_crossfade_ms,
        )
        write_atomic(self.path("manifest.json"), manifest_to_json(manifest))
        write_atomic(self.path("report.txt"), self._report(manifest, matches))

    def stage_export(self) -> None:
        export_reader_bundle(self.cfg, self.out)

    # -- reporting --

    def _report(self, manifest, matches) -> str:
        book = self._load_book()
        segments = segments_from_tsv(
            self.path("segments.tsv").read_text(encoding="utf-8")
        )
        music_segments = music_segments_from_tsv(
            self.path("music_segments.tsv").read_text(encoding="utf-8")
        )
        n_chapters = len(book.chapters)
        per_chapter_counts = [
            sum(1 for s in segments if s.chapter_index == c)
            for c in range(1, n_chapters + 1)
        ]
        dialogue_segments = {
            key for key, ms in matches.items()
            if any(ev.kind == "dialogue" for m in ms for ev in m.evidence)
        }
        matched = {key for key, ms in matches.items() if ms}
        unmatched = [s.key for s in segments if s.key not in matched]
        cue_entries = [e for e in manifest.entries if e.provenance["kind"] == "movie_cue"]
        emo_entries = [e for e in manifest.entries if e.provenance["kind"] == "emotion"]
        durations = [m.duration_s for m in music_segments]

        lines = [
            "bookscore pipeline report",
            "=========================",
            "",
            f"chapters: {n_chapters}",
            f"chapter segments: {len(segments)} "
            f"(mean {len(segments) / max(1, n_chapters):.2f} per chapter)",
            "chapters collapsing to a single segment: "
            + (
                ", ".join(
                    str(c + 1) for c, n in enumerate(per_chapter_counts) if n == 1
                )
                or "none"
            ),
            f"music segments: {len(music_segments)} "
            f"(mean duration {float(np.mean(durations)):.1f} s)" if durations else
            "music segments: 0",
            f"dialogue-matched segments: {len(dialogue_segments)}",
            f"matched segments |S|: {len(matched)}",
            f"unmatched segments |S-bar|: {len(unmatched)}"
            + (f" {sorted(unmatched)}" if unmatched else ""),
            f"manifest entries: {len(manifest.entries)} "
            f"(movie cue {len(cue_entries)}, emotion {len(emo_entries)})",
            "",
            "per-chapter movie-cue vs emotion retrieval:",
        ]
        for c in range(1, n_chapters + 1):
            cue = sum(1 for e in cue_entries if e.chapter == c)
            emo = sum(1 for e in emo_entries if e.chapter == c)
            lines.append(f"  chapter {c}: movie_cue={cue} emotion={emo}")

        flags_path = self.path("align_flags.tsv")
        if flags_path.exists():
            flagged = [
                line for line in flags_path.read_text(encoding="utf-8").splitlines()
                if line.strip() and not line.startswith("#")
            ]
            lines += ["", f"low-similarity path scenes: {', '.join(flagged) or 'none'}"]

        lines += ["", "artifact hashes:"]
        for name in [
            "ingest/book.json", "segments.tsv", "music_segments.tsv", "scenes.tsv",
            "track_log.tsv", "coarse_alignment.tsv", "dialogue_matches.tsv",
            "segment_matches.tsv", "manifest.json",
        ]:
            p = self.path(name)
            if p.exists():
                lines.append(f"  {name}: {sha256_file(p)}")
        return "\n".join(lines) + "\n"


# --- reader bundle exporter --------------------------------------------------

def export_reader_bundle(cfg: PipelineConfig, out_dir: Path) -> Path:
    """Write the static bundle consumed by the reading application.

    Layout: bundle/manifest.json (the weave manifest with an added
    per-entry "audio" asset path), bundle/chapters/<i>.json, and
    bundle/audio/<track>_<seg>.wav excerpts cut with 50 ms of fade-safe
    padding on each side where the track allows it.
    """
    out_dir = Path(out_dir)
    manifest = manifest_from_json(
        (out_dir / "manifest.json").read_text(encoding="utf-8")
    )
    book = serde.book_from_dict(serde.load_json(out_dir / "ingest/book.json"))
    segments = segments_from_tsv((out_dir / "segments.tsv").read_text(encoding="utf-8"))
    music_segments = music_segments_from_tsv(
        (out_dir / "music_segments.tsv").read_text(encoding="utf-8")
    )

    def music_seg_index(track_id: str, in_s: float, out_s: float) -> int:
        for ms in music_segments:
            if (
                ms.track_id == track_id
                and abs(ms.start_s - in_s) < 1e-6
                and abs(ms.end_s - out_s) < 1e-6
            ):
                return ms.segment_index
        raise AudioCutOutOfRange(
            f"no music segment matches {track_id} [{in_s}, {out_s}]"
        )

    staging = Path(tempfile.mkdtemp(dir=out_dir, prefix=".bundle-"))
    try:
        (staging / "chapters").mkdir()
        (staging / "audio").mkdir()

        tracks = {
            track_id: wav for track_id, wav, _ in load_album_index(cfg.album_index)
        }
        pad_s = 0.050
        cut_cache: set[str] = set()
        audio_names: list[str] = []
        for entry in manifest.entries:
            seg_idx = music_seg_index(entry.track_id, entry.audio_in_s, entry.audio_out_s)
            name = f"{entry.track_id}_{seg_idx}.wav"
            audio_names.append(name)
            if name in cut_cache:
                continue
            cut_cache.add(name)
            samples, sr = read_wav(tracks[entry.track_id])
            duration = len(samples) / sr
            if not (0.0 <= entry.audio_in_s < entry.audio_out_s <= duration + 1e-6):
                raise AudioCutOutOfRange(
                    f"{entry.track_id}: [{entry.audio_in_s}, {entry.audio_out_s}] "
                    f"outside track of {duration:.3f} s"
                )
            lo = max(0, int(round((entry.audio_in_s - pad_s) * sr)))
            hi = min(len(samples), int(round((entry.audio_out_s + pad_s) * sr)))
            write_wav(staging / "audio" / name, samples[lo:hi], sr)

        # chapters/<i>.json: paragraph texts tagged with their segment
        for ci, chapter in enumerate(book.chapters, start=1):
            seg_rows = [s for s in segments if s.chapter_index == ci]
            para_rows = []
            for pi, par in enumerate(chapter.paragraphs, start=1):
                owner = next(
                    s.segment_index for s in seg_rows
                    if s.first_par <= pi <= s.last_par
                )
                para_rows.append(
                    {"index": pi, "segment": owner, "text": " ".join(par.sentences)}
                )
            payload = {
                "chapter": ci,
                "title": chapter.title,
                "paragraphs": para_rows,
                "segments": [
                    {
                        "segment": s.segment_index,
                        "first_par": s.first_par,
                        "last_par": s.last_par,
                    }
                    for s in seg_rows
                ],
            }
            (staging / "chapters" / f"{ci}.json").write_text(
                json.dumps(payload, ensure_ascii=False, indent=1) + "\n",
                encoding="utf-8",
            )

        # manifest copy with asset paths appended per entry
        base = manifest_to_json(manifest)
        doc = json.loads(base)
        for entry_dict, name in zip(doc["entries"], audio_names):
            entry_dict["audio"] = f"audio/{name}"
        (staging / "manifest.json").write_text(
            json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
        )

        final = out_dir / "bundle"
        if final.exists():
            shutil.rmtree(final)
        os.replace(staging, final)
        return final
    finally:
        if staging.exists():
            shutil.rmtree(staging, ignore_errors=True)
