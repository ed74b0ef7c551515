"""Corpus/index snapshot persistence.

Layout: chunks.jsonl (one chunk per line), lexical.json (postings and
stats), vectors.bin (uint32 row count + uint32 dim, row-major float32
little-endian, then a JSON chunk-id table), manifest.json (embedder tag,
retrieval config and its hash). Inspectable and diff-friendly.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RetrievalConfig
from .corpus import Chunk
from .errors import SnapshotError
from .lexical import LexicalIndex
from .vector import VectorIndex

FORMAT_VERSION = 1

_CHUNKS = "chunks.jsonl"
_LEXICAL = "lexical.json"
_VECTORS = "vectors.bin"
_MANIFEST = "manifest.json"


@dataclass(frozen=True)
class Manifest:
    format_version: int
    embedder_tag: str
    config: RetrievalConfig
    config_hash: str
    chunk_count: int

    def to_json(self) -> dict:
        return {
            "format_version": self.format_version,
            "embedder_tag": self.embedder_tag,
            "config": self.config.to_json(),
            "config_hash": self.config_hash,
            "chunk_count": self.chunk_count,
        }


def save_snapshot(
    directory: str | Path,
    chunks: list[Chunk],
    lexical: LexicalIndex,
    vectors: VectorIndex,
    config: RetrievalConfig,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    with open(directory / _CHUNKS, "w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(json.dumps(chunk.to_json(), ensure_ascii=False, sort_keys=True) + "\n")

    (directory / _LEXICAL).write_text(
        json.dumps(lexical.to_json(), ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    matrix = np.ascontiguousarray(vectors.matrix, dtype="<f4")
    id_blob = json.dumps(vectors.chunk_ids, ensure_ascii=False).encode("utf-8")
    with open(directory / _VECTORS, "wb") as fh:
        fh.write(struct.pack("<II", matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.tobytes())
        fh.write(id_blob)

    manifest = Manifest(
        format_version=FORMAT_VERSION,
        embedder_tag=vectors.embedder_tag,
        config=config,
        config_hash=config.config_hash(),
        chunk_count=len(chunks),
    )
    (directory / _MANIFEST).write_text(
        json.dumps(manifest.to_json(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return directory


def load_snapshot(
    directory: str | Path,
) -> tuple[list[Chunk], LexicalIndex, VectorIndex, Manifest]:
    directory = Path(directory)
    for name in (_CHUNKS, _LEXICAL, _VECTORS, _MANIFEST):
        if not (directory / name).exists():
            raise SnapshotError(f"no snapshot found at {directory} (missing {name})")

    try:
        manifest_raw = json.loads((directory / _MANIFEST).read_text(encoding="utf-8"))
        config = RetrievalConfig.from_json(manifest_raw["config"])
        manifest = Manifest(
            format_version=int(manifest_raw["format_version"]),
            embedder_tag=manifest_raw["embedder_tag"],
            config=config,
            config_hash=manifest_raw["config_hash"],
            chunk_count=int(manifest_raw["chunk_count"]),
        )
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt manifest in {directory}: {exc}") from exc
    if manifest.format_version != FORMAT_VERSION:
        raise SnapshotError(
            f"snapshot format {manifest.format_version} is not supported (want {FORMAT_VERSION})"
        )

    chunks: list[Chunk] = []
    try:
        with open(directory / _CHUNKS, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    chunks.append(Chunk.from_json(json.loads(line)))
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt chunks.jsonl in {directory}: {exc}") from exc
    if len(chunks) != manifest.chunk_count:
        raise SnapshotError(
            f"chunk count mismatch: manifest says {manifest.chunk_count}, file has {len(chunks)}"
        )

    try:
        lexical = LexicalIndex.from_json(
            json.loads((directory / _LEXICAL).read_text(encoding="utf-8"))
        )
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt lexical.json in {directory}: {exc}") from exc

    try:
        blob = (directory / _VECTORS).read_bytes()
        n, dim = struct.unpack_from("<II", blob, 0)
        offset = 8
        matrix_bytes = n * dim * 4
        matrix = np.frombuffer(blob, dtype="<f4", count=n * dim, offset=offset).reshape(n, dim)
        chunk_ids = json.loads(blob[offset + matrix_bytes:].decode("utf-8"))
    except (struct.error, ValueError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt vectors.bin in {directory}: {exc}") from exc
    if len(chunk_ids) != n:
        raise SnapshotError(f"vector id table has {len(chunk_ids)} ids for {n} rows")
    vectors = VectorIndex(
        dim=dim,
        chunk_ids=list(chunk_ids),
        matrix=np.array(matrix, dtype=np.float32),
        embedder_tag=manifest.embedder_tag,
    )
    return chunks, lexical, vectors, manifest
