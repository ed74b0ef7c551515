"""Retrieval parameters and whole-system configuration."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigurationError


@dataclass(frozen=True)
class RetrievalConfig:
    """Free parameters of the hybrid retriever.

    k_dense/k_sparse bound the per-retriever candidate lists, k_final the
    fused context set. BM25 uses the standard k1/b defaults; rrf_K is the
    reciprocal-rank-fusion constant.
    """

    k_dense: int = 10
    k_sparse: int = 10
    k_final: int = 5
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    rrf_K: int = 60
    max_chunk_tokens: int = 1000

    def __post_init__(self) -> None:
        for name in ("k_dense", "k_sparse", "k_final", "rrf_K", "max_chunk_tokens"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.k_final > self.k_dense + self.k_sparse:
            raise ValueError("k_final must not exceed k_dense + k_sparse")
        if self.bm25_k1 < 0:
            raise ValueError("bm25_k1 must be non-negative")
        if not 0.0 <= self.bm25_b <= 1.0:
            raise ValueError("bm25_b must lie in [0, 1]")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "RetrievalConfig":
        return cls(**obj)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass
class SystemConfig:
    """Service-level configuration: data paths, backends, and server knobs."""

    snapshot_dir: str = "snapshot"
    ontology_path: str | None = None
    template_path: str | None = None
    embedder_backend: str = "mock"  # mock | remote
    generator_backend: str = "mock"  # mock | remote
    embed_dim: int = 256
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    host: str = "127.0.0.1"
    port: int = 8080
    cors_origin: str | None = None
    ui_dir: str | None = None
    api_key: str | None = None
    max_concurrent_generations: int = 8

    def __post_init__(self) -> None:
        if self.embedder_backend not in ("mock", "remote"):
            raise ConfigurationError(f"unknown embedder backend {self.embedder_backend!r}")
        if self.generator_backend not in ("mock", "remote"):
            raise ConfigurationError(f"unknown generator backend {self.generator_backend!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "SystemConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        retrieval = RetrievalConfig.from_json(raw.pop("retrieval", {}))
        try:
            return cls(retrieval=retrieval, **raw)
        except TypeError as exc:
            raise ConfigurationError(f"invalid config file {path}: {exc}") from exc
