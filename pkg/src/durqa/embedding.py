"""Text embedders and the vector math used by dense retrieval.

Vectors are L2-normalized float32 arrays so cosine similarity reduces to
a dot product and snapshots round-trip bit-exactly.
"""
from __future__ import annotations

import hashlib
import math
import os
from typing import Protocol, Sequence

import numpy as np

from .errors import ProtocolError
from .tokenizer import tokenize
from .transport import HttpJsonClient

DEFAULT_DIM = 256
NORM_TOLERANCE = 1e-6


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine of the angle between two non-zero vectors of equal dimension."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na = math.sqrt(float(va @ va))
    nb = math.sqrt(float(vb @ vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(va @ vb) / (na * nb)


def l2_normalize(values: Sequence[float]) -> np.ndarray:
    """Unit-norm float32 copy of the input vector."""
    v = np.asarray(values, dtype=np.float64)
    norm = math.sqrt(float(v @ v))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return (v / norm).astype(np.float32)


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


def hash_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Deterministic bag-of-words embedding: tokens hash to buckets, counts
    accumulate, result is L2-normalized. Zero-token text maps to the fixed
    unit vector with 1 in bucket 0."""
    if dim < 8:
        raise ValueError(f"dim must be >= 8, got {dim}")
    counts = np.zeros(dim, dtype=np.float64)
    tokens = tokenize(text)
    if not tokens:
        counts[0] = 1.0
        return counts.astype(np.float32)
    for token in tokens:
        counts[_bucket(token, dim)] += 1.0
    return l2_normalize(counts)


class Embedder(Protocol):
    """Encoder contract shared by the index builder and query path."""

    tag: str
    dim: int

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class HashEmbedder:
    """Offline deterministic embedder; same tokenizer as the lexical index."""

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 8:
            raise ValueError(f"dim must be >= 8, got {dim}")
        self.dim = dim
        self.tag = f"hash-bow-{dim}/v1"

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [hash_embed(text, self.dim) for text in texts]


class RemoteEmbedder:
    """Client for a JSON-over-HTTP embedding provider.

    Wire shape: request {"input": [texts...]}, response {"vectors": [[...], ...]}.
    Requests are batched; vectors are normalized on receipt.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        dim: int = DEFAULT_DIM,
        batch_size: int = 64,
        tag: str | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_in_flight: int = 8,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.dim = dim
        self.batch_size = batch_size
        self.tag = tag or f"remote-{endpoint}-{dim}"
        self._client = HttpJsonClient(
            endpoint,
            api_key=api_key,
            max_attempts=max_attempts,
            backoff_base=backoff_base,
            max_in_flight=max_in_flight,
        )

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "RemoteEmbedder":
        env = env if env is not None else dict(os.environ)
        endpoint = env.get("EMBED_ENDPOINT")
        if not endpoint:
            raise ValueError("EMBED_ENDPOINT is not configured")
        return cls(
            endpoint,
            api_key=env.get("EMBED_API_KEY"),
            dim=int(env.get("EMBED_DIM", DEFAULT_DIM)),
            batch_size=int(env.get("EMBED_BATCH", 64)),
        )

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            return []
        vectors: list[np.ndarray] = []
        for i in range(0, len(texts), self.batch_size):
            batch = list(texts[i : i + self.batch_size])
            body = self._client.post({"input": batch})
            rows = body.get("vectors")
            if not isinstance(rows, list) or len(rows) != len(batch):
                raise ProtocolError(
                    f"expected {len(batch)} vectors, got "
                    f"{len(rows) if isinstance(rows, list) else type(rows).__name__}"
                )
            for row in rows:
                if not isinstance(row, list) or len(row) != self.dim:
                    raise ProtocolError(
                        f"expected vectors of dimension {self.dim}, got {len(row) if isinstance(row, list) else row!r}"
                    )
                vectors.append(l2_normalize(row))
        return vectors
