"""Union-with-dedup merging of dense and sparse results plus RRF re-ranking."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .config import RetrievalConfig
from .corpus import Category, Chunk
from .embedding import Embedder
from .errors import ConfigurationError
from .lexical import LexicalIndex, sparse_search
from .vector import VectorIndex, dense_search

SOURCE_DENSE = "dense"
SOURCE_SPARSE = "sparse"
SOURCE_BOTH = "both"


@dataclass(frozen=True)
class RetrievedPassage:
    chunk_id: str
    text: str
    category: Category
    source: str
    dense_rank: int | None = None
    sparse_rank: int | None = None
    dense_score: float | None = None
    sparse_score: float | None = None
    fused_score: float = 0.0
    final_rank: int = 0
    drugs: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "text": self.text,
            "source": self.source,
            "fused_score": self.fused_score,
            "final_rank": self.final_rank,
        }


def merge_dedup(
    dense: Sequence[tuple[str, float]],
    sparse: Sequence[tuple[str, float]],
    chunks_by_id: Mapping[str, Chunk],
) -> list[RetrievedPassage]:
    """One passage per distinct chunk, carrying whichever ranks and scores
    it earned in each input list."""
    by_id: dict[str, RetrievedPassage] = {}
    for rank, (chunk_id, score) in enumerate(dense, start=1):
        chunk = chunks_by_id[chunk_id]
        by_id[chunk_id] = RetrievedPassage(
            chunk_id=chunk_id,
            text=chunk.text,
            category=chunk.category,
            source=SOURCE_DENSE,
            dense_rank=rank,
            dense_score=score,
            drugs=chunk.drugs,
        )
    for rank, (chunk_id, score) in enumerate(sparse, start=1):
        if chunk_id in by_id:
            by_id[chunk_id] = replace(
                by_id[chunk_id], source=SOURCE_BOTH, sparse_rank=rank, sparse_score=score
            )
        else:
            chunk = chunks_by_id[chunk_id]
            by_id[chunk_id] = RetrievedPassage(
                chunk_id=chunk_id,
                text=chunk.text,
                category=chunk.category,
                source=SOURCE_SPARSE,
                sparse_rank=rank,
                sparse_score=score,
                drugs=chunk.drugs,
            )
    return list(by_id.values())


def rrf_rerank(passages: Sequence[RetrievedPassage], K: int) -> list[RetrievedPassage]:
    """Reciprocal-rank fusion: fused score = sum over available ranks r of
    1/(K + r); stable ordering by (-score, chunk_id); final_rank assigned 1..n."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    fused: list[RetrievedPassage] = []
    for passage in passages:
        ranks = [r for r in (passage.dense_rank, passage.sparse_rank) if r is not None]
        if not ranks:
            raise ValueError(f"passage {passage.chunk_id!r} has no ranks to fuse")
        fused.append(replace(passage, fused_score=sum(1.0 / (K + r) for r in ranks)))
    fused.sort(key=lambda p: (-p.fused_score, p.chunk_id))
    return [replace(p, final_rank=i) for i, p in enumerate(fused, start=1)]


def hybrid_retrieve(
    query: str,
    lexical: LexicalIndex,
    vectors: VectorIndex,
    chunks_by_id: Mapping[str, Chunk],
    embedder: Embedder,
    config: RetrievalConfig,
    category: Category | None = None,
) -> list[RetrievedPassage]:
    """Run both retrievers, merge, optionally filter by category, re-rank
    with RRF, and keep the top k_final passages."""
    lexical_ids = set(lexical.doc_len)
    if lexical_ids != set(vectors.chunk_ids) or lexical_ids != set(chunks_by_id):
        raise ConfigurationError("lexical and vector indexes cover different chunk sets")
    dense = dense_search(vectors, query, embedder, config.k_dense)
    sparse = sparse_search(lexical, query, config.k_sparse, config.bm25_k1, config.bm25_b)
    merged = merge_dedup(dense, sparse, chunks_by_id)
    if category is not None:
        merged = [p for p in merged if p.category is category]
    if not merged:
        return []
    return rrf_rerank(merged, config.rrf_K)[: config.k_final]
