"""Landmark-hash audio identification over the soundtrack album.

A constellation of spectrogram peaks is hashed pairwise (two frequency
bins plus their time gap) into a 32-bit key; querying histograms the
alignment offsets of hash hits per track. Thresholds favor precision:
a match needs a clear offset consensus and a 2x lead over the runner-up.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import maximum_filter

from .corpus.audio import resample
from .errors import BookscoreError

SAMPLE_RATE = 11025
N_FFT = 4096
HOP = 2048
HOP_S = HOP / SAMPLE_RATE
# peak band capped at 9 bits of raw bins (~1378 Hz): fundamentals live
# there, and full bin resolution keeps hash collisions between distinct
# tracks rare
MAX_FREQ_BIN = 511

INDEX_MAGIC = b"SWFP"
INDEX_VERSION = 1


class EmptyAudio(BookscoreError):
    """Track decoded to zero samples."""


@dataclass
class FingerprintConfig:
    fan_out: int = 15
    target_zone_s: float = 5.0
    max_delta_bins: int = 32
    neighborhood: int = 15     # square local-maximum window, odd
    percentile: float = 75.0   # per-frame magnitude floor
    accept_min: int = 5        # minimum aligned hashes for a match
    accept_margin: float = 2.0  # lead over the runner-up track
    window_s: float = 10.0     # movie scan window
    stride_s: float = 5.0      # movie scan stride
    min_clip_s: float = 3.0


@dataclass
class FingerprintIndex:
    track_ids: list[str]
    table: dict[int, list[tuple[int, int]]]   # hash -> [(track_idx, frame), ...]

    @property
    def hash_count(self) -> int:
        return sum(len(v) for v in self.table.values())


@dataclass(frozen=True)
class Match:
    track_id: str
    confidence: int
    offset_s: float


@dataclass(frozen=True)
class TrackLogEntry:
    movie_ms: int
    track_id: str
    confidence: int
    offset_s: float


@dataclass
class TrackLog:
    entries: list[TrackLogEntry] = field(default_factory=list)


def _spectrogram(samples: np.ndarray) -> np.ndarray:
    """(frames, bins) log-magnitude spectrogram at the index sample rate."""
    x = np.asarray(samples, dtype=np.float64)
    n_frames = (len(x) - N_FFT) // HOP + 1
    if n_frames < 1:
        return np.zeros((0, N_FFT // 2 + 1))
    window = np.hanning(N_FFT)
    frames = np.lib.stride_tricks.sliding_window_view(x, N_FFT)[::HOP][:n_frames]
    mag = np.abs(np.fft.rfft(frames * window, axis=1))
    return np.log1p(mag)


def find_peaks(spec: np.ndarray, cfg: FingerprintConfig) -> list[tuple[int, int]]:
    """Constellation peaks: local maxima of a square time-frequency
    neighborhood that clear their own frame's percentile floor."""
    if spec.size == 0:
        return []
    local_max = spec == maximum_filter(spec, size=cfg.neighborhood, mode="constant")
    floor = np.percentile(spec, cfg.percentile, axis=1, keepdims=True)
    mask = local_max & (spec > floor)
    mask[:, MAX_FREQ_BIN + 1 :] = False
    frames, bins = np.nonzero(mask)
    return sorted(zip(frames.tolist(), bins.tolist()))


def hash_peaks(
    peaks: list[tuple[int, int]], cfg: FingerprintConfig
) -> list[tuple[int, int]]:
    """Pair each anchor with up to fan_out later peaks in its target zone.

    Hash layout: 9 bits f1, 9 bits f2, 14 bits frame delta (32 total).
    """
    max_dt = int(cfg.target_zone_s / HOP_S)
    hashes: list[tuple[int, int]] = []
    for i, (t1, f1) in enumerate(peaks):
        paired = 0
        for t2, f2 in peaks[i + 1 :]:
            dt = t2 - t1
            if dt <= 0:
                continue
            if dt > max_dt:
                break
            if abs(f2 - f1) > cfg.max_delta_bins:
                continue
            key = (f1 << 23) | (f2 << 14) | dt
            hashes.append((key, t1))
            paired += 1
            if paired >= cfg.fan_out:
                break
    return hashes


def fingerprint(
    samples: np.ndarray, sr: int, cfg: FingerprintConfig
) -> list[tuple[int, int]]:
    x = resample(np.asarray(samples, dtype=np.float64), sr, SAMPLE_RATE)
    return hash_peaks(find_peaks(_spectrogram(x), cfg), cfg)


def build_index(
    tracks: list[tuple[str, np.ndarray, int]],
    cfg: FingerprintConfig | None = None,
) -> FingerprintIndex:
    """Index album tracks given as (track_id, samples, sr) triples."""
    cfg = cfg or FingerprintConfig()
    track_ids = []
    table: dict[int, list[tuple[int, int]]] = {}
    for idx, (track_id, samples, sr) in enumerate(tracks):
        if len(samples) == 0:
            raise EmptyAudio(track_id)
        track_ids.append(track_id)
        for key, frame in fingerprint(samples, sr, cfg):
            table.setdefault(key, []).append((idx, frame))
    return FingerprintIndex(track_ids=track_ids, table=table)


def query(
    index: FingerprintIndex,
    clip: np.ndarray,
    sr: int,
    cfg: FingerprintConfig | None = None,
) -> Match | None:
    """Identify a clip, or return None when no track clears the bar."""
    cfg = cfg or FingerprintConfig()
    if len(clip) / sr < cfg.min_clip_s:
        raise ValueError(f"clip shorter than {cfg.min_clip_s} s")
    offsets: dict[int, dict[int, int]] = {}
    for key, t_clip in fingerprint(clip, sr, cfg):
        for track_idx, t_track in index.table.get(key, ()):
            hist = offsets.setdefault(track_idx, {})
            delta = t_track - t_clip
            hist[delta] = hist.get(delta, 0) + 1

    best: list[tuple[int, int, int]] = []   # (count, track_idx, delta) per track
    for track_idx, hist in offsets.items():
        delta, count = max(hist.items(), key=lambda kv: (kv[1], -kv[0]))
        best.append((count, track_idx, delta))
    if not best:
        return None
    best.sort(key=lambda t: (-t[0], t[1]))
    top_count, top_track, top_delta = best[0]
    runner = best[1][0] if len(best) > 1 else 0
    if top_count < cfg.accept_min or top_count < cfg.accept_margin * runner:
        return None
    return Match(
        track_id=index.track_ids[top_track],
        confidence=top_count,
        offset_s=top_delta * HOP_S,
    )


def scan_movie(
    index: FingerprintIndex,
    samples: np.ndarray,
    sr: int,
    cfg: FingerprintConfig | None = None,
) -> TrackLog:
    """Query a sliding window over the movie audio; accepted matches are
    logged at the window's start time."""
    cfg = cfg or FingerprintConfig()
    x = resample(np.asarray(samples, dtype=np.float64), sr, SAMPLE_RATE)
    window = int(cfg.window_s * SAMPLE_RATE)
    stride = int(cfg.stride_s * SAMPLE_RATE)
    min_len = int(cfg.min_clip_s * SAMPLE_RATE)
    entries = []
    for start in range(0, max(1, len(x) - min_len + 1), stride):
        clip = x[start : start + window]
        if len(clip) < min_len:
            break
        match = query(index, clip, SAMPLE_RATE, cfg)
        if match is not None:
            entries.append(
                TrackLogEntry(
                    movie_ms=int(round(start / SAMPLE_RATE * 1000)),
                    track_id=match.track_id,
                    confidence=match.confidence,
                    offset_s=match.offset_s,
                )
            )
    return TrackLog(entries=entries)


# --- persistence ------------------------------------------------------------

def save_index(index: FingerprintIndex, path: str | Path) -> None:
    """Binary layout: magic, version, track table, count, sorted rows."""
    rows = sorted(
        (key, track_idx, frame)
        for key, hits in index.table.items()
        for track_idx, frame in hits
    )
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("<I", INDEX_VERSION))
        fh.write(struct.pack("<I", len(index.track_ids)))
        for track_id in index.track_ids:
            raw = track_id.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(struct.pack("<Q", len(rows)))
        if rows:
            arr = np.array(rows, dtype="<u4")
            fh.write(arr.tobytes(order="C"))


def load_index(path: str | Path) -> FingerprintIndex:
    blob = Path(path).read_bytes()
    if blob[:4] != INDEX_MAGIC:
        raise ValueError("not a fingerprint index file")
    version = struct.unpack_from("<I", blob, 4)[0]
    if version != INDEX_VERSION:
        raise ValueError(f"unsupported index version {version}")
    n_tracks = struct.unpack_from("<I", blob, 8)[0]
    pos = 12
    track_ids = []
    for _ in range(n_tracks):
        (length,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        track_ids.append(blob[pos : pos + length].decode("utf-8"))
        pos += length
    (count,) = struct.unpack_from("<Q", blob, pos)
    pos += 8
    table: dict[int, list[tuple[int, int]]] = {}
    if count:
        arr = np.frombuffer(blob, dtype="<u4", offset=pos, count=count * 3)
        for key, track_idx, frame in arr.reshape(count, 3):
            table.setdefault(int(key), []).append((int(track_idx), int(frame)))
    return FingerprintIndex(track_ids=track_ids, table=table)


# --- track log TSV ----------------------------------------------------------

def track_log_to_tsv(log: TrackLog) -> str:
    lines = ["# movie_ms\ttrack_id\tconfidence\toffset_s"]
    for e in log.entries:
        lines.append(f"{e.movie_ms}\t{e.track_id}\t{e.confidence}\t{e.offset_s:.3f}")
    return "\n".join(lines) + "\n"


def track_log_from_tsv(text: str) -> TrackLog:
    entries = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        movie_ms, track_id, confidence, offset_s = line.split("\t")
        entries.append(
            TrackLogEntry(
                movie_ms=int(movie_ms),
                track_id=track_id,
                confidence=int(confidence),
                offset_s=float(offset_s),
            )
        )
    entries.sort(key=lambda e: e.movie_ms)
    return TrackLog(entries=entries)
