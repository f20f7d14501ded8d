"""Track segmentation from tonal features.

Chain: chroma frames -> windowed keystrength (correlation with the 24
rotated key profiles) -> cosine self-similarity matrix -> checkerboard
novelty -> peak picking -> labeled segments. Major/minor mode of a
segment doubles as its positive/negative valence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import AllSilent, KernelShrunkWarning, TooShort

PITCH_CLASSES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]
_C0_HZ = 440.0 * 2.0 ** (-57.0 / 12.0)   # pitch class C, octave 0
_SILENCE_EPS = 1e-10


def _load_profiles() -> np.ndarray:
    """24x12 profile matrix: rows 0-11 major C..B, 12-23 minor C..B."""
    text = (
        resources.files("bookscore").joinpath("data/key_profiles.tsv").read_text()
    )
    base = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, *values = line.split("\t")
        base[name] = np.array([float(v) for v in values])
    rows = [np.roll(base["major"], tonic) for tonic in range(12)]
    rows += [np.roll(base["minor"], tonic) for tonic in range(12)]
    return np.stack(rows)


KEY_PROFILES = _load_profiles()


def key_name(index: int) -> str:
    mode = "major" if index < 12 else "minor"
    return f"{PITCH_CLASSES[index % 12]} {mode}"


@dataclass
class KeystrengthSeries:
    hop_s: float
    window_s: float
    frames: np.ndarray            # (K, 24) correlations in [-1, 1]
    silence_flags: np.ndarray     # (K,) bool

    def __len__(self) -> int:
        return len(self.frames)

    def frame_time(self, index: int) -> float:
        """Center time of frame `index` in seconds."""
        return index * self.hop_s + self.window_s / 2.0


@dataclass
class MusicSegment:
    track_id: str
    segment_index: int            # 1-based c
    start_s: float
    end_s: float
    mean_keystrength: np.ndarray  # (24,)
    mode: str                     # major|minor|unset
    valence: str                  # positive|negative|unset

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def chroma_frames(
    samples: np.ndarray, sr: int, n_fft: int = 4096, hop: int = 2048
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame 12-bin pitch-class magnitudes and frame center times.

    Each FFT bin between 55 and 1760 Hz contributes its magnitude to the
    nearest pitch class. Frames shorter than n_fft at the tail are
    dropped.
    """
    if sr < 8000:
        raise ValueError(f"sample rate {sr} too low for chroma analysis")
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("chroma expects mono samples")
    n_frames = (len(x) - n_fft) // hop + 1
    if n_frames < 1:
        raise TooShort(f"{len(x) / sr:.2f} s of audio, need >= {n_fft / sr:.2f} s")

    freqs = np.fft.rfftfreq(n_fft, 1.0 / sr)
    in_range = (freqs >= 55.0) & (freqs <= 1760.0)
    pcs = np.zeros(freqs.shape, dtype=np.int64)
    pcs[in_range] = (
        np.round(12.0 * np.log2(freqs[in_range] / _C0_HZ)).astype(np.int64) % 12
    )

    window = np.hanning(n_fft)
    out = np.zeros((n_frames, 12))
    for t in range(n_frames):
        frame = x[t * hop : t * hop + n_fft] * window
        mag = np.abs(np.fft.rfft(frame))
        np.add.at(out[t], pcs[in_range], mag[in_range])
    centers = (np.arange(n_frames) * hop + n_fft / 2.0) / sr
    return out, centers


def keystrength(chroma_window: np.ndarray) -> np.ndarray:
    """Pearson correlation of one chroma vector with all 24 key profiles.

    Silent or zero-variance chroma yields the zero vector (callers flag
    these frames as silent).
    """
    x = np.asarray(chroma_window, dtype=np.float64)
    if x.sum() <= _SILENCE_EPS or np.ptp(x) == 0.0:
        return np.zeros(24)
    xc = x - x.mean()
    xn = np.linalg.norm(xc)
    pc = KEY_PROFILES - KEY_PROFILES.mean(axis=1, keepdims=True)
    pn = np.linalg.norm(pc, axis=1)
    return (pc @ xc) / (pn * xn)


def keystrength_series(
    samples: np.ndarray,
    sr: int,
    window_s: float = 10.0,
    hop_s: float = 1.5,
) -> KeystrengthSeries:
    """Slide a long window over the track and correlate each window's
    averaged chroma with the key profiles."""
    duration = len(samples) / sr
    if duration < window_s:
        raise TooShort(f"track is {duration:.2f} s, window is {window_s:.2f} s")
    chroma, centers = chroma_frames(samples, sr)
    n_windows = int(np.floor((duration - window_s) / hop_s)) + 1

    frames = np.zeros((n_windows, 24))
    silent = np.zeros(n_windows, dtype=bool)
    for k in range(n_windows):
        lo, hi = k * hop_s, k * hop_s + window_s
        mask = (centers >= lo) & (centers < hi)
        if not mask.any():
            silent[k] = True
            continue
        mean_chroma = chroma[mask].mean(axis=0)
        if mean_chroma.sum() <= _SILENCE_EPS or np.ptp(mean_chroma) == 0.0:
            silent[k] = True
            continue
        frames[k] = keystrength(mean_chroma)
    return KeystrengthSeries(
        hop_s=hop_s, window_s=window_s, frames=frames, silence_flags=silent
    )


def self_similarity(series: KeystrengthSeries) -> np.ndarray:
    """Cosine similarity between keystrength frames; silent rows/cols are 0."""
    if not (~series.silence_flags).any():
        raise AllSilent("no non-silent keystrength frames")
    frames = series.frames
    norms = np.linalg.norm(frames, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = frames / safe[:, None]
    s = unit @ unit.T
    s[series.silence_flags, :] = 0.0
    s[:, series.silence_flags] = 0.0
    return s


def checkerboard_kernel(size: int, taper: float = 0.4) -> np.ndarray:
    """Gaussian-tapered checkerboard kernel of even `size`.

    The taper is evaluated at half-integer offsets so the kernel is
    exactly antisymmetric about its center: correlated against any
    constant matrix it sums to zero.
    """
    if size < 2 or size % 2:
        raise ValueError(f"kernel size must be even and >= 2, got {size}")
    half = size // 2
    offsets = np.arange(-half, half)
    sign = np.where(offsets >= 0, 1.0, -1.0)
    sigma = taper * half
    g = np.exp(-((offsets + 0.5) ** 2) / (2.0 * sigma**2))
    row = sign * g
    return np.outer(row, row)


def novelty(
    s: np.ndarray, kernel_size: int = 64, taper: float = 0.4, scale: bool = True
) -> np.ndarray:
    """Checkerboard-kernel novelty along the SSM diagonal.

    The matrix is mirrored at its borders. A kernel larger than the
    matrix shrinks to the largest even size that fits (with a warning).
    When `scale` is set the curve is clamped at zero and divided by its
    maximum.
    """
    s = np.asarray(s, dtype=np.float64)
    n = s.shape[0]
    if s.ndim != 2 or s.shape[1] != n:
        raise ValueError("self-similarity matrix must be square")
    if n < kernel_size:
        shrunk = max(2, (n // 2) * 2)
        warnings.warn(
            f"matrix side {n} < kernel {kernel_size}; shrinking kernel to {shrunk}",
            KernelShrunkWarning,
            stacklevel=2,
        )
        kernel_size = shrunk
    kernel = checkerboard_kernel(kernel_size, taper)
    half = kernel_size // 2

    padded = np.pad(s, half, mode="reflect")
    curve = np.empty(n)
    for t in range(n):
        patch = padded[t : t + kernel_size, t : t + kernel_size]
        curve[t] = float(np.sum(kernel * patch))
    if scale:
        curve = np.maximum(curve, 0.0)
        peak = curve.max()
        if peak > 0.0:
            curve = curve / peak
    return curve


def pick_boundaries(
    curve: np.ndarray,
    hop_s: float,
    window_s: float,
    min_len_s: float = 10.0,
    std_factor: float = 0.5,
) -> list[float]:
    """Boundary times from novelty peaks.

    Local maxima at or above mean + std_factor*std survive a greedy
    suppression pass: any peak within min_len_s of an already accepted
    higher peak is dropped. Peak at frame t maps to t*hop + window/2
    seconds.
    """
    curve = np.asarray(curve, dtype=np.float64)
    thr = curve.mean() + std_factor * curve.std()
    candidates = [
        t
        for t in range(1, len(curve) - 1)
        if curve[t] > curve[t - 1] and curve[t] > curve[t + 1] and curve[t] >= thr
    ]
    candidates.sort(key=lambda t: (-curve[t], t))
    accepted: list[int] = []
    for t in candidates:
        if all(abs(t - a) * hop_s >= min_len_s for a in accepted):
            accepted.append(t)
    return sorted(t * hop_s + window_s / 2.0 for t in accepted)


def label_segment(
    track_id: str,
    segment_index: int,
    start_s: float,
    end_s: float,
    series: KeystrengthSeries,
) -> MusicSegment:
    """Label one segment with its mean keystrength, mode, and valence.

    Frames whose center time falls inside [start_s, end_s) vote. A
    segment with only silent frames stays unset and is excluded from the
    retrieval pools later.
    """
    centers = np.array([series.frame_time(k) for k in range(len(series))])
    inside = (centers >= start_s) & (centers < end_s) & ~series.silence_flags
    if not inside.any():
        return MusicSegment(
            track_id, segment_index, start_s, end_s, np.zeros(24), "unset", "unset"
        )
    mean_ks = series.frames[inside].mean(axis=0)
    mode = "major" if int(np.argmax(mean_ks)) < 12 else "minor"
    valence = "positive" if mode == "major" else "negative"
    return MusicSegment(track_id, segment_index, start_s, end_s, mean_ks, mode, valence)


def segment_track(
    track_id: str,
    samples: np.ndarray,
    sr: int,
    window_s: float = 10.0,
    overlap: float = 0.85,
    kernel_size: int = 64,
    min_len_s: float = 10.0,
    std_factor: float = 0.5,
    taper: float = 0.4,
) -> tuple[list[MusicSegment], KeystrengthSeries, np.ndarray]:
    """Full per-track chain; returns segments, the series, and the curve."""
    duration = len(samples) / sr
    hop_s = window_s * (1.0 - overlap)
    series = keystrength_series(samples, sr, window_s=window_s, hop_s=hop_s)
    try:
        ssm = self_similarity(series)
    except AllSilent:
        seg = label_segment(track_id, 1, 0.0, duration, series)
        return [seg], series, np.zeros(len(series))

    curve = novelty(ssm, kernel_size=kernel_size, taper=taper)
    boundaries = pick_boundaries(
        curve, hop_s, window_s, min_len_s=min_len_s, std_factor=std_factor
    )
    boundaries = [
        b for b in boundaries if b >= min_len_s and duration - b >= min_len_s
    ]
    edges = [0.0, *boundaries, duration]
    segments = [
        label_segment(track_id, c, lo, hi, series)
        for c, (lo, hi) in enumerate(zip(edges, edges[1:]), start=1)
    ]
    return segments, series, curve
