"""Chapter segmentation via temporally weighted first-neighbor clustering.

Paragraphs are clustered bottom-up: each point links to its nearest
neighbor under a distance that multiplies semantic dissimilarity with
normalized index distance, so clusters are both semantically coherent
and spatially compact. Non-contiguous clusters are split into maximal
contiguous runs at every level, which keeps partitions valid chapter
segmentations.

One refinement over plain first-neighbor linking: when a level's
nearest-neighbor distances split into clearly different scales (a loner
cluster forced to link across a topic boundary sits orders of magnitude
above the within-topic links), the links above the largest
multiplicative jump are deferred to a later level. Without this,
early-consolidated topics get chained into their neighbors while other
topics are still assembling, and no level of the hierarchy reproduces
the underlying block structure. On distance spectra without such a jump
the behavior is exactly the plain linking rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus.model import Chapter, EmbeddingBundle

Cluster = tuple[int, ...]           # sorted original point indices
Partition = list[Cluster]


@dataclass
class PartitionHierarchy:
    """Successive partitions, coarsening from levels[0] down to one cluster."""

    levels: list[Partition]

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def partition_at(self, level: int) -> Partition:
        """1-based level access, clamped to the deepest available level."""
        if level < 1:
            raise ValueError(f"level must be >= 1, got {level}")
        return self.levels[min(level, self.n_levels) - 1]


@dataclass
class ChapterSegment:
    chapter_index: int              # 1-based
    segment_index: int              # 1-based p
    first_par: int                  # 1-based inclusive
    last_par: int
    word_count: int
    emotion: str = "unset"          # positive|neutral|negative|unset
    matched_scenes: set[int] = field(default_factory=set)

    @property
    def paragraph_range(self) -> tuple[int, int]:
        return (self.first_par, self.last_par)

    @property
    def key(self) -> tuple[int, int]:
        return (self.chapter_index, self.segment_index)


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return x / safe[:, None]


def _distance_matrix(feats: np.ndarray, pos: np.ndarray, n_total: int) -> np.ndarray:
    """D(i,j) = (1 - cos(f_i, f_j)) * |pos_i - pos_j| / N, inf diagonal."""
    cos = feats @ feats.T
    dist = (1.0 - cos) * (np.abs(pos[:, None] - pos[None, :]) / n_total)
    np.fill_diagonal(dist, np.inf)
    return dist


def _link_mask(link_dists: np.ndarray, gate_ratio: float) -> np.ndarray:
    """Defer links above the largest multiplicative jump in the sorted
    nearest-neighbor distances, when that jump exceeds gate_ratio."""
    if len(link_dists) < 2:
        return np.ones(len(link_dists), dtype=bool)
    ordered = np.sort(link_dists)
    ratios = ordered[1:] / np.maximum(ordered[:-1], 1e-300)
    top = int(np.argmax(ratios))
    if ratios[top] <= gate_ratio:
        return np.ones(len(link_dists), dtype=bool)
    return link_dists <= ordered[top]


def _components(kappa: np.ndarray, linked: np.ndarray) -> list[list[int]]:
    """Connected components of the undirected first-neighbor graph,
    restricted to links that passed the scale gate."""
    m = len(kappa)
    parent = list(range(m))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in enumerate(kappa):
        if not linked[i]:
            continue
        ra, rb = find(i), find(int(j))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return [sorted(g) for g in groups.values()]


def _contiguous_runs(members: list[int]) -> list[Cluster]:
    runs: list[Cluster] = []
    run = [members[0]]
    for a, b in zip(members, members[1:]):
        if b == a + 1:
            run.append(b)
        else:
            runs.append(tuple(run))
            run = [b]
    runs.append(tuple(run))
    return runs


def _cluster_stats(
    clusters: Partition, feats: np.ndarray, pos: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    cf = np.stack([feats[list(c)].mean(axis=0) for c in clusters])
    cp = np.array([pos[list(c)].mean() for c in clusters])
    return _normalize_rows(cf), cp


def tw_finch(
    features: np.ndarray | list,
    positions: np.ndarray | list | None = None,
    gate_ratio: float = 3.0,
) -> PartitionHierarchy:
    """Build the full partition hierarchy for one chapter.

    `features` is an (N, d) array of paragraph embeddings (any positive
    scaling is removed by row normalization); `positions` defaults to the
    paragraph ordinals 1..N. A single point yields the degenerate
    one-cluster hierarchy.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or len(feats) == 0:
        raise ValueError("features must be a non-empty (N, d) array")
    if not np.isfinite(feats).all():
        raise ValueError("features must be finite")
    n = len(feats)
    pos = (
        np.arange(1, n + 1, dtype=np.float64)
        if positions is None
        else np.asarray(positions, dtype=np.float64)
    )
    if len(pos) != n:
        raise ValueError("positions length must match features")
    if n == 1:
        return PartitionHierarchy(levels=[[(0,)]])

    feats = _normalize_rows(feats)
    clusters: Partition = [(i,) for i in range(n)]
    levels: list[Partition] = []
    while len(clusters) > 1:
        cf, cp = _cluster_stats(clusters, feats, pos)
        dist = _distance_matrix(cf, cp, n)
        kappa = np.argmin(dist, axis=1)    # ties -> smallest index
        link_dists = dist[np.arange(len(clusters)), kappa]
        linked = _link_mask(link_dists, gate_ratio)
        merged: Partition = []
        for group in _components(kappa, linked):
            members = sorted(idx for ci in group for idx in clusters[ci])
            merged.extend(_contiguous_runs(members))
        merged.sort(key=lambda c: c[0])
        if len(merged) == len(clusters):
            # Mutual links between non-adjacent twins can be undone by the
            # contiguity split; force the closest adjacent merge instead.
            merged = _merge_closest_adjacent(clusters, dist)
        levels.append(merged)
        clusters = merged
    return PartitionHierarchy(levels=levels)


def _merge_closest_adjacent(clusters: Partition, dist: np.ndarray) -> Partition:
    gaps = np.array([dist[i, i + 1] for i in range(len(clusters) - 1)])
    at = int(np.argmin(gaps))
    out = list(clusters[:at])
    out.append(tuple(sorted(clusters[at] + clusters[at + 1])))
    out.extend(clusters[at + 2 :])
    return out


def segment_chapter(
    chapter_index: int,
    chapter: Chapter,
    bundle: EmbeddingBundle,
    level: int = 3,
) -> list[ChapterSegment]:
    """Cut one chapter into segments from the requested hierarchy level.

    Paragraph embeddings come from the bundle under "ch:<i>:par:<n>"
    (1-based); a missing key raises MissingEmbedding. Levels deeper than
    the hierarchy clamp to its last (coarsest) partition.
    """
    n = len(chapter.paragraphs)
    feats = np.stack(
        [bundle.vector(f"ch:{chapter_index}:par:{p}") for p in range(1, n + 1)]
    )
    hierarchy = tw_finch(feats)
    partition = hierarchy.partition_at(level)

    segments = []
    for seg_index, cluster in enumerate(sorted(partition, key=lambda c: c[0]), start=1):
        first, last = cluster[0] + 1, cluster[-1] + 1
        words = sum(
            chapter.paragraphs[p - 1].word_count for p in range(first, last + 1)
        )
        segments.append(
            ChapterSegment(
                chapter_index=chapter_index,
                segment_index=seg_index,
                first_par=first,
                last_par=last,
                word_count=words,
            )
        )
    return segments


def segment_book(book, bundle: EmbeddingBundle, level: int = 3) -> list[ChapterSegment]:
    """Segment every chapter; results concatenated in chapter order."""
    out: list[ChapterSegment] = []
    for ci, chapter in enumerate(book.chapters, start=1):
        out.extend(segment_chapter(ci, chapter, bundle, level))
    return out
