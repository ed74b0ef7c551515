"""Inverted index and BM25 scoring for sparse keyword retrieval."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Chunk
from .tokenizer import tokenize

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


@dataclass
class LexicalIndex:
    """Immutable-once-built document-term statistics.

    postings maps term -> [(chunk_id, term frequency)], df is derived from
    posting list lengths, doc_len holds per-chunk token counts.
    """

    N: int
    postings: dict[str, list[tuple[str, int]]]
    df: dict[str, int]
    doc_len: dict[str, int]
    avgdl: float

    def idf(self, term: str) -> float:
        """Smoothed Robertson idf; strictly positive for indexed terms."""
        d = self.df.get(term, 0)
        return math.log((self.N - d + 0.5) / (d + 0.5) + 1.0)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "avgdl": self.avgdl,
            "doc_len": self.doc_len,
            "postings": {t: [[cid, tf] for cid, tf in plist] for t, plist in self.postings.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LexicalIndex":
        postings = {
            t: [(cid, int(tf)) for cid, tf in plist] for t, plist in obj["postings"].items()
        }
        return cls(
            N=int(obj["N"]),
            postings=postings,
            df={t: len(plist) for t, plist in postings.items()},
            doc_len={cid: int(n) for cid, n in obj["doc_len"].items()},
            avgdl=float(obj["avgdl"]),
        )


def build_lexical_index(chunks: Sequence[Chunk]) -> LexicalIndex:
    """Tokenize every chunk and accumulate the BM25 statistics."""
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_len: dict[str, int] = {}
    for chunk in chunks:
        tokens = tokenize(chunk.text)
        doc_len[chunk.chunk_id] = len(tokens)
        tf: dict[str, int] = {}
        for token in tokens:
            tf[token] = tf.get(token, 0) + 1
        for term, freq in tf.items():
            postings.setdefault(term, []).append((chunk.chunk_id, freq))
    n = len(doc_len)
    avgdl = sum(doc_len.values()) / n if n else 0.0
    df = {term: len(plist) for term, plist in postings.items()}
    return LexicalIndex(N=n, postings=postings, df=df, doc_len=doc_len, avgdl=avgdl)


def bm25_score(
    index: LexicalIndex,
    query_terms: Iterable[str],
    chunk_id: str,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> float:
    """Okapi BM25 score of one chunk against the unique query terms.

    Terms absent from the index contribute nothing; with the smoothed idf
    the score is always non-negative.
    """
    if chunk_id not in index.doc_len:
        raise ValueError(f"unknown chunk_id {chunk_id!r}")
    dl = index.doc_len[chunk_id]
    score = 0.0
    for term in dict.fromkeys(query_terms):
        plist = index.postings.get(term)
        if not plist:
            continue
        tf = 0
        for cid, freq in plist:
            if cid == chunk_id:
                tf = freq
                break
        if tf == 0:
            continue
        norm = tf + k1 * (1.0 - b + b * dl / index.avgdl)
        score += index.idf(term) * tf * (k1 + 1.0) / norm
    return score


def sparse_search(
    index: LexicalIndex,
    query: str,
    k: int,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[tuple[str, float]]:
    """Top-k chunks by BM25, descending score with chunk_id tiebreak.

    Only chunks containing at least one query term (score > 0) are returned.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    terms = list(dict.fromkeys(tokenize(query)))
    candidates: set[str] = set()
    for term in terms:
        for cid, _tf in index.postings.get(term, ()):
            candidates.add(cid)
    scored = [(cid, bm25_score(index, terms, cid, k1, b)) for cid in candidates]
    scored = [(cid, s) for cid, s in scored if s > 0.0]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]
