"""Group movie shots into scenes and attach subtitle dialogue to them.

Scene boundaries come from a dynamic program over shot embeddings that
minimizes the summed average pairwise dissimilarity inside each scene;
average (not total) cost keeps the optimizer from carving out tiny
scenes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .corpus.model import ShotTable, SubtitleTrack
from .errors import QTooLarge


@dataclass(frozen=True)
class SceneUtterance:
    cue_ms: int
    speaker: str | None
    text: str


@dataclass
class Scene:
    scene_id: int                     # 1-based q
    first_shot: int                   # positional index into the shot list
    last_shot: int                    # inclusive
    start_ms: int
    end_ms: int
    character_histogram: dict[str, int] = field(default_factory=dict)
    dialogues: list[SceneUtterance] = field(default_factory=list)


def _shot_features(shots: ShotTable) -> np.ndarray:
    feats = np.stack([s.frame_embeddings.mean(axis=0) for s in shots.shots])
    norms = np.linalg.norm(feats, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return feats / safe[:, None]


def _cost_matrix(feats: np.ndarray) -> np.ndarray:
    """cost[a, b] = mean pairwise (1 - cos) over shots a..b inclusive."""
    n = len(feats)
    gram = feats @ feats.T
    sat = np.zeros((n + 1, n + 1))
    sat[1:, 1:] = gram.cumsum(axis=0).cumsum(axis=1)
    cost = np.full((n, n), np.inf)
    for s in range(n):
        e = np.arange(s, n)
        length = e - s + 1
        block_sum = sat[e + 1, e + 1] - sat[s, e + 1] - sat[e + 1, s] + sat[s, s]
        pair_sum = (block_sum - length) / 2.0
        pairs = length * (length - 1) / 2.0
        avg_cos = np.where(pairs > 0, pair_sum / np.maximum(pairs, 1.0), 1.0)
        cost[s, s:] = 1.0 - avg_cos
    return cost


def group_scenes(shots: ShotTable, q: int) -> list[Scene]:
    """Split the shot list into exactly `q` scenes by dynamic programming.

    Complexity O(N^2 * Q) time over a precomputed prefix-sum cost table;
    cost ties break toward the earlier boundary.
    """
    n = len(shots)
    if n == 0:
        raise ValueError("empty shot table")
    if q < 1 or q > n:
        raise QTooLarge(f"requested {q} scenes from {n} shots")

    cost = _cost_matrix(_shot_features(shots))

    # dp[t] = best cost of splitting shots[:t] into k scenes so far
    dp = np.full(n + 1, np.inf)
    dp[0] = 0.0
    back = np.zeros((q + 1, n + 1), dtype=np.int64)
    for k in range(1, q + 1):
        nxt = np.full(n + 1, np.inf)
        # candidate[s, t-1] = dp[s] + cost[s, t-1]; valid when k-1 <= s <= t-1
        cand = dp[:n, None] + cost
        lo = k - 1
        if lo > 0:
            cand[:lo, :] = np.inf
        for t in range(k, n + 1):
            col = cand[: t, t - 1]
            s = int(np.argmin(col))
            nxt[t] = col[s]
            back[k, t] = s
        dp = nxt

    bounds = []
    t = n
    for k in range(q, 0, -1):
        s = int(back[k, t])
        bounds.append((s, t - 1))
        t = s
    bounds.reverse()

    scenes = []
    for scene_id, (first, last) in enumerate(bounds, start=1):
        scenes.append(
            Scene(
                scene_id=scene_id,
                first_shot=first,
                last_shot=last,
                start_ms=shots.shots[first].start_ms,
                end_ms=shots.shots[last].end_ms,
            )
        )
    return scenes


def attach_dialogue(
    scenes: list[Scene],
    subtitles: SubtitleTrack,
    speaker_map: list[str | None],
) -> list[Scene]:
    """Assign each cue to the scene containing its midpoint.

    A midpoint exactly on a boundary goes to the earlier scene. Cues
    outside every scene are dropped with a warning. Returns new Scene
    objects; the input list is untouched.
    """
    if len(speaker_map) != len(subtitles.cues):
        raise ValueError("speaker_map must parallel the subtitle cues")
    out = [
        Scene(
            scene_id=s.scene_id,
            first_shot=s.first_shot,
            last_shot=s.last_shot,
            start_ms=s.start_ms,
            end_ms=s.end_ms,
        )
        for s in scenes
    ]
    dropped = 0
    for cue, speaker in zip(subtitles.cues, speaker_map):
        mid = (cue.start_ms + cue.end_ms) // 2
        target = next(
            (s for s in out if s.start_ms <= mid <= s.end_ms), None
        )
        if target is None:
            dropped += 1
            continue
        target.dialogues.append(
            SceneUtterance(cue_ms=cue.start_ms, speaker=speaker, text=cue.text)
        )
        if speaker:
            target.character_histogram[speaker] = (
                target.character_histogram.get(speaker, 0) + 1
            )
    if dropped:
        warnings.warn(f"{dropped} cues fall outside every scene", stacklevel=2)
    return out
