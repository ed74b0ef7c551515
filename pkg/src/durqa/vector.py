"""Exact dense retrieval over normalized chunk embeddings."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Chunk
from .embedding import Embedder
from .errors import ConfigurationError


@dataclass
class VectorIndex:
    """Row-per-chunk matrix of unit-norm float32 embeddings.

    The embedder identity tag is stored so queries encoded with a
    different encoder are rejected instead of silently mis-scored.
    """

    dim: int
    chunk_ids: list[str]
    matrix: np.ndarray  # float32, shape (len(chunk_ids), dim)
    embedder_tag: str

    def __post_init__(self) -> None:
        if not self.embedder_tag:
            raise ValueError("embedder_tag must be non-empty")
        if self.matrix.shape != (len(self.chunk_ids), self.dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"({len(self.chunk_ids)}, {self.dim})"
            )

    def vector_for(self, chunk_id: str) -> np.ndarray:
        return self.matrix[self.chunk_ids.index(chunk_id)]


def build_vector_index(chunks: Sequence[Chunk], embedder: Embedder) -> VectorIndex:
    """Embed every chunk text; deterministic for a deterministic embedder."""
    if not chunks:
        raise ValueError("cannot build a vector index from an empty chunk list")
    vectors = embedder.embed([chunk.text for chunk in chunks])
    matrix = np.stack([np.asarray(v, dtype=np.float32) for v in vectors])
    return VectorIndex(
        dim=embedder.dim,
        chunk_ids=[chunk.chunk_id for chunk in chunks],
        matrix=matrix,
        embedder_tag=embedder.tag,
    )


def dense_search(
    index: VectorIndex,
    query: str,
    embedder: Embedder,
    k: int,
) -> list[tuple[str, float]]:
    """Top-k chunks by cosine similarity (dot product of unit vectors),
    descending score with chunk_id tiebreak; returns min(k, rows) results."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if embedder.tag != index.embedder_tag:
        raise ConfigurationError(
            f"query embedder {embedder.tag!r} does not match index embedder "
            f"{index.embedder_tag!r}"
        )
    q = np.asarray(embedder.embed([query])[0], dtype=np.float64)
    scores = index.matrix.astype(np.float64) @ q
    ranked = sorted(
        zip(index.chunk_ids, scores.tolist()), key=lambda item: (-item[1], item[0])
    )
    return ranked[:k]
