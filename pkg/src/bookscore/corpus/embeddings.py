"""Embedding bundle I/O: a JSON manifest paired with a raw float32 blob.

The two-file layout keeps the format writable from any model-serving
script: the manifest carries ids and shape, the blob is count*dim
little-endian IEEE-754 32-bit floats in row-major order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DuplicateId, SizeMismatch
from .model import EmbeddingBundle


def load_embeddings(manifest_path: str | Path, blob_path: str | Path) -> EmbeddingBundle:
    """Load a bundle, re-normalizing every vector to unit L2 norm.

    All-zero vectors cannot be normalized; they are kept as zeros and
    flagged so downstream similarity code can skip them.
    """
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    count = int(manifest["count"])
    dim = int(manifest["dim"])
    ids = [str(i) for i in manifest["ids"]]
    byte_order = manifest.get("byte_order", "little")
    if byte_order != "little":
        raise ValueError(f"unsupported byte order {byte_order!r}")
    if len(ids) != count:
        raise SizeMismatch(f"manifest count {count} != {len(ids)} ids")
    seen: set[str] = set()
    for key in ids:
        if key in seen:
            raise DuplicateId(key)
        seen.add(key)

    blob = Path(blob_path).read_bytes()
    expected = count * dim * 4
    if len(blob) != expected:
        raise SizeMismatch(f"blob is {len(blob)} bytes, expected {expected}")

    vectors = np.frombuffer(blob, dtype="<f4").reshape(count, dim).astype(np.float32)
    if not np.isfinite(vectors).all():
        raise ValueError("embedding blob contains non-finite values")
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
    zero_flags = norms == 0.0
    # idempotent: rows already unit within float32 precision stay untouched,
    # so load(write(load(x))) == load(x)
    safe = np.where(zero_flags | (np.abs(norms - 1.0) < 1e-6), 1.0, norms)
    vectors = (vectors / safe[:, None]).astype(np.float32)
    return EmbeddingBundle(
        ids=tuple(ids), dim=dim, vectors=vectors, zero_flags=zero_flags
    )


def write_embeddings(
    manifest_path: str | Path,
    blob_path: str | Path,
    ids: list[str],
    vectors: np.ndarray,
) -> None:
    """Write a bundle pair; the inverse of `load_embeddings`."""
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ValueError("vectors must be (len(ids), dim)")
    manifest = {
        "count": len(ids),
        "dim": int(vectors.shape[1]),
        "byte_order": "little",
        "ids": list(ids),
    }
    Path(manifest_path).write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="utf-8"
    )
    Path(blob_path).write_bytes(vectors.astype("<f4").tobytes(order="C"))


def resolve_all(keys: list[str], bundles: dict[str, EmbeddingBundle]) -> None:
    """Check every key resolves in exactly one bundle; raise otherwise."""
    from ..errors import UnresolvedEmbedding

    for key in keys:
        hits = [name for name, b in bundles.items() if key in b]
        if not hits:
            raise UnresolvedEmbedding(key)
        if len(hits) > 1:
            raise DuplicateId(f"{key} resolves in bundles {hits}")
