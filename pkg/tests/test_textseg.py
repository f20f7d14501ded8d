import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bookscore.corpus import parse_book, write_embeddings, load_embeddings
from bookscore.errors import MissingEmbedding
from bookscore.textseg import segment_chapter, tw_finch


def _unit(v):
    return v / np.linalg.norm(v)


def make_planted(rng, block_sizes, dim=24, sigma=0.05):
    """Contiguous blocks around mutually orthogonal means; returns
    (features, labels)."""
    n_blocks = len(block_sizes)
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    feats, labels = [], []
    for b, size in enumerate(block_sizes):
        for _ in range(size):
            feats.append(_unit(q[:, b] + sigma * rng.normal(size=dim)))
            labels.append(b)
    return np.stack(feats), labels


def planted_partition(labels):
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[i - 1]:
            runs.append(tuple(range(start, i)))
            start = i
    return runs


def hierarchy_recovers(hierarchy, labels) -> bool:
    """Oracle: exhaustive scan of every level against the planted runs."""
    target = planted_partition(labels)
    return any(sorted(level) == target for level in hierarchy.levels)


class TestTwFinch:
    def test_identical_vectors_single_cluster(self):
        feats = np.tile([1.0, 0.0, 0.0], (10, 1))
        h = tw_finch(feats)
        assert h.levels[0] == [tuple(range(10))]

    def test_single_point_degenerate(self):
        h = tw_finch(np.array([[1.0, 0.0]]))
        assert h.levels == [[(0,)]]

    def test_three_planted_blocks_recovered(self):
        rng = np.random.default_rng(42)
        feats, labels = make_planted(rng, [10, 10, 10], sigma=0.05)
        assert hierarchy_recovers(tw_finch(feats), labels)

    def test_levels_strictly_decrease_to_one(self):
        rng = np.random.default_rng(0)
        feats, _ = make_planted(rng, [4, 5, 3], sigma=0.2)
        h = tw_finch(feats)
        sizes = [len(level) for level in h.levels]
        assert sizes[-1] == 1
        assert all(a > b for a, b in zip(sizes, sizes[1:]))

    def test_pathological_twins_still_terminate(self):
        # A = C, B = D, A orthogonal to B: mutual links are non-adjacent and
        # the contiguity split would undo them forever without the fallback.
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        h = tw_finch(np.stack([a, b, a, b]))
        assert h.levels[-1] == [(0, 1, 2, 3)]

    def test_scaling_invariance(self):
        rng = np.random.default_rng(11)
        feats, _ = make_planted(rng, [5, 7], sigma=0.1)
        h1 = tw_finch(feats)
        h2 = tw_finch(feats * 37.5)
        assert h1.levels == h2.levels


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 24), st.integers(0, 2**32 - 1))
def test_partition_properties(n, seed):
    rng = np.random.default_rng(seed)
    feats = rng.normal(size=(n, 8))
    h = tw_finch(feats)
    previous = None
    for level in h.levels:
        members = sorted(i for c in level for i in c)
        assert members == list(range(n))            # coverage, disjoint
        for cluster in level:
            assert list(cluster) == list(range(cluster[0], cluster[-1] + 1))
        if previous is not None:
            # nesting: every previous cluster sits inside one current cluster
            owner = {}
            for ci, cluster in enumerate(level):
                for i in cluster:
                    owner[i] = ci
            for cluster in previous:
                assert len({owner[i] for i in cluster}) == 1
        previous = level


class TestSegmentChapter:
    def _bundle(self, tmp_path, chapter_index, vectors):
        ids = [f"ch:{chapter_index}:par:{p}" for p in range(1, len(vectors) + 1)]
        write_embeddings(tmp_path / "m.json", tmp_path / "b.f32",
                         ids, np.asarray(vectors, dtype=np.float32))
        return load_embeddings(tmp_path / "m.json", tmp_path / "b.f32")

    def test_single_paragraph_chapter(self, tmp_path):
        book = parse_book("CHAPTER A\n\nOnly one paragraph here.\n")
        bundle = self._bundle(tmp_path, 1, [[1.0, 0.0]])
        segments = segment_chapter(1, book.chapters[0], bundle, level=3)
        assert len(segments) == 1
        assert segments[0].paragraph_range == (1, 1)
        assert segments[0].word_count == 4

    def test_level_clamps_to_deepest(self, tmp_path):
        text = "CHAPTER A\n\n" + "\n\n".join(f"Par {i} words." for i in range(4))
        book = parse_book(text)
        rng = np.random.default_rng(5)
        feats, _ = make_planted(rng, [2, 2], dim=8, sigma=0.01)
        bundle = self._bundle(tmp_path, 1, feats)
        deep = segment_chapter(1, book.chapters[0], bundle, level=99)
        assert len(deep) == 1      # deepest level is the single cluster

    def test_three_block_chapter_three_segments(self, tmp_path):
        paragraphs = "\n\n".join(f"Paragraph number {i} content." for i in range(9))
        book = parse_book("CHAPTER A\n\n" + paragraphs)
        rng = np.random.default_rng(9)
        feats, labels = make_planted(rng, [3, 3, 3], sigma=0.05)
        bundle = self._bundle(tmp_path, 1, feats)
        # pick the level that equals the planted partition (oracle above)
        h = tw_finch(feats)
        level = next(
            i + 1 for i, lvl in enumerate(h.levels)
            if sorted(lvl) == planted_partition(labels)
        )
        segments = segment_chapter(1, book.chapters[0], bundle, level=level)
        assert [(s.first_par, s.last_par) for s in segments] == [(1, 3), (4, 6), (7, 9)]
        assert all(s.word_count == 12 for s in segments)

    def test_missing_embedding(self, tmp_path):
        book = parse_book("CHAPTER A\n\nOne.\n\nTwo.\n")
        bundle = self._bundle(tmp_path, 2, [[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(MissingEmbedding, match="ch:1:par:1"):
            segment_chapter(1, book.chapters[0], bundle, level=1)

    def test_row_permutation_invariance(self, tmp_path):
        paragraphs = "\n\n".join(f"Words here {i}." for i in range(6))
        book = parse_book("CHAPTER A\n\n" + paragraphs)
        rng = np.random.default_rng(21)
        feats, _ = make_planted(rng, [3, 3], sigma=0.05)
        ids = [f"ch:1:par:{p}" for p in range(1, 7)]
        write_embeddings(tmp_path / "m.json", tmp_path / "b.f32",
                         ids, feats.astype(np.float32))
        straight = load_embeddings(tmp_path / "m.json", tmp_path / "b.f32")
        perm = [3, 0, 5, 1, 4, 2]
        write_embeddings(tmp_path / "m2.json", tmp_path / "b2.f32",
                         [ids[i] for i in perm], feats[perm].astype(np.float32))
        shuffled = load_embeddings(tmp_path / "m2.json", tmp_path / "b2.f32")
        a = segment_chapter(1, book.chapters[0], straight, level=1)
        b = segment_chapter(1, book.chapters[0], shuffled, level=1)
        assert [(s.first_par, s.last_par) for s in a] == [
            (s.first_par, s.last_par) for s in b
        ]
