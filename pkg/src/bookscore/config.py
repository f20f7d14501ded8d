"""Flat key=value pipeline configuration.

Every tunable the pipeline uses is surfaced here with its default;
unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_PATH_KEYS = {
    "paths.book": "book",
    "paths.quotes": "quotes",
    "paths.subtitles": "subtitles",
    "paths.transcript": "transcript",
    "paths.shots": "shots",
    "paths.embeddings": "embeddings_dir",
    "paths.emotion": "emotion",
    "paths.lexicon": "lexicon",
    "paths.album_index": "album_index",
    "paths.movie_audio": "movie_audio",
    "paths.stopwords": "stopwords",
}

_OPTIONAL_PATHS = {"paths.quotes", "paths.stopwords"}


@dataclass
class PipelineConfig:
    # input paths
    book: Path | None = None
    quotes: Path | None = None
    subtitles: Path | None = None
    transcript: Path | None = None
    shots: Path | None = None
    embeddings_dir: Path | None = None
    emotion: Path | None = None
    lexicon: Path | None = None
    album_index: Path | None = None
    movie_audio: Path | None = None
    stopwords: Path | None = None
    output_dir: Path = Path("out")

    # identity
    book_id: str = "book"
    chapter_marker: str = r"^\s*CHAPTER\b.*$"

    # stage parameters (paper values where the paper fixes them)
    textseg_partition_level: int = 3
    musicseg_window_s: float = 10.0
    musicseg_overlap: float = 0.85
    musicseg_kernel: int = 64
    musicseg_min_len_s: float = 10.0
    musicseg_std_factor: float = 0.5
    musicseg_taper: float = 0.4
    scenes_q: int = 0                  # 0 -> shots/21, at least 1
    align_alpha: float = 1.0
    refine_theta: float = 0.3
    refine_top_k: int = 5
    weave_seed: int = 0
    weave_crossfade_ms: int = 2000
    fp_fan_out: int = 15
    fp_zone_s: float = 5.0
    fp_accept_min: int = 5
    fp_margin: float = 2.0
    fp_window_s: float = 10.0
    fp_stride_s: float = 5.0

    raw: dict[str, str] = field(default_factory=dict, repr=False)


_PARAM_KEYS: dict[str, tuple[str, type]] = {
    "book.id": ("book_id", str),
    "book.chapter_marker": ("chapter_marker", str),
    "output_dir": ("output_dir", Path),
    "textseg.partition_level": ("textseg_partition_level", int),
    "musicseg.window_s": ("musicseg_window_s", float),
    "musicseg.overlap": ("musicseg_overlap", float),
    "musicseg.kernel": ("musicseg_kernel", int),
    "musicseg.min_len_s": ("musicseg_min_len_s", float),
    "musicseg.std_factor": ("musicseg_std_factor", float),
    "musicseg.taper": ("musicseg_taper", float),
    "scenes.q": ("scenes_q", int),
    "align.alpha": ("align_alpha", float),
    "refine.theta": ("refine_theta", float),
    "refine.top_k": ("refine_top_k", int),
    "weave.seed": ("weave_seed", int),
    "weave.crossfade_ms": ("weave_crossfade_ms", int),
    "fingerprint.fan_out": ("fp_fan_out", int),
    "fingerprint.zone_s": ("fp_zone_s", float),
    "fingerprint.accept_min": ("fp_accept_min", int),
    "fingerprint.margin": ("fp_margin", float),
    "fingerprint.window_s": ("fp_window_s", float),
    "fingerprint.stride_s": ("fp_stride_s", float),
}


def parse_config(path: str | Path, overrides: dict[str, str] | None = None) -> PipelineConfig:
    """Read a key=value file (# comments allowed) into a validated config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    pairs: dict[str, str] = {}
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{ln}: expected key=value")
        pairs[key.strip()] = value.strip()
    pairs.update(overrides or {})

    cfg = PipelineConfig(raw=dict(pairs))
    base = path.parent
    for key, value in pairs.items():
        if key in _PATH_KEYS:
            p = Path(value)
            setattr(cfg, _PATH_KEYS[key], p if p.is_absolute() else base / p)
        elif key in _PARAM_KEYS:
            attr, typ = _PARAM_KEYS[key]
            try:
                setattr(cfg, attr, typ(value))
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        else:
            raise ConfigError(f"unknown config key {key!r}")
    _validate(cfg)
    return cfg


def _validate(cfg: PipelineConfig) -> None:
    for key, attr in _PATH_KEYS.items():
        value = getattr(cfg, attr)
        if value is None:
            if key in _OPTIONAL_PATHS:
                continue
            raise ConfigError(f"missing required path key {key}")
        if not Path(value).exists():
            raise ConfigError(f"{key}: {value} does not exist")
    checks = [
        (cfg.textseg_partition_level >= 1, "textseg.partition_level must be >= 1"),
        (0.0 < cfg.musicseg_overlap < 1.0, "musicseg.overlap must be in (0, 1)"),
        (cfg.musicseg_kernel >= 2 and cfg.musicseg_kernel % 2 == 0,
         "musicseg.kernel must be even and >= 2"),
        (cfg.musicseg_window_s > 0, "musicseg.window_s must be positive"),
        (cfg.musicseg_min_len_s > 0, "musicseg.min_len_s must be positive"),
        (cfg.scenes_q >= 0, "scenes.q must be >= 0"),
        (-1.0 <= cfg.refine_theta <= 1.0, "refine.theta must be in [-1, 1]"),
        (cfg.refine_top_k >= 0, "refine.top_k must be >= 0"),
        (cfg.align_alpha >= 0, "align.alpha must be >= 0"),
        (cfg.weave_crossfade_ms >= 0, "weave.crossfade_ms must be >= 0"),
        (cfg.fp_fan_out >= 1, "fingerprint.fan_out must be >= 1"),
        (cfg.fp_accept_min >= 1, "fingerprint.accept_min must be >= 1"),
        (cfg.fp_margin >= 1.0, "fingerprint.margin must be >= 1"),
        (cfg.fp_window_s > 0 and cfg.fp_stride_s > 0,
         "fingerprint window/stride must be positive"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
