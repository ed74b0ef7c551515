"""End-to-end query pipeline: entities -> retrieval -> prompt -> answer."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from .config import RetrievalConfig
from .corpus import (
    Category,
    Chunk,
    ContraindicationEntry,
    chunk_corpus,
    normalize_drug_name,
)
from .embedding import Embedder, HashEmbedder
from .errors import AnswerParseError, ConfigurationError, DurqaError, PipelineStageError
from .generation import (
    GenerationBackend,
    MockGenerator,
    StructuredAnswer,
    build_prompt,
    detect_category,
    extract_drug_entities,
    load_prompt_template,
    parse_structured_answer,
)
from .hybrid import RetrievedPassage, hybrid_retrieve
from .lexical import LexicalIndex, build_lexical_index
from .vector import VectorIndex, build_vector_index


@dataclass
class AnswerRecord:
    """Everything recorded for one answered question."""

    query: str
    entities: list[str]
    category: Category | None
    passages: list[RetrievedPassage]
    prompt: str
    raw: str
    answer: StructuredAnswer | None
    parse_error: str | None
    backend_tag: str
    latency_s: float

    @property
    def contraindicated(self) -> bool:
        """Scoring judgment; unparseable answers count as not contraindicated."""
        return self.answer.contraindicated if self.answer else False

    @property
    def effective_choice(self) -> int:
        """Four-way bucket for aggregation; parse errors fall into type 4."""
        return self.answer.choice if self.answer else 4


@dataclass
class Pipeline:
    """Immutable retrieval state plus the configured backends.

    Build once from entries (or a snapshot); answering is a pure function
    of the question, so concurrent calls are safe.
    """

    chunks: list[Chunk]
    chunks_by_id: dict[str, Chunk]
    lexical: LexicalIndex
    vectors: VectorIndex
    lexicon: set[str]
    embedder: Embedder
    backend: GenerationBackend
    template: str
    config: RetrievalConfig

    @classmethod
    def from_entries(
        cls,
        entries: Sequence[ContraindicationEntry],
        embedder: Embedder | None = None,
        backend: GenerationBackend | None = None,
        config: RetrievalConfig | None = None,
        template: str | None = None,
    ) -> "Pipeline":
        config = config or RetrievalConfig()
        embedder = embedder or HashEmbedder()
        backend = backend or MockGenerator()
        chunks = chunk_corpus(entries, config.max_chunk_tokens)
        return cls.from_chunks(chunks, embedder, backend, config, template)

    @classmethod
    def from_snapshot(
        cls,
        directory,
        embedder: Embedder | None = None,
        backend: GenerationBackend | None = None,
        template: str | None = None,
    ) -> "Pipeline":
        from .snapshot import load_snapshot

        chunks, lexical, vectors, manifest = load_snapshot(directory)
        embedder = embedder or HashEmbedder(dim=vectors.dim)
        if embedder.tag != manifest.embedder_tag:
            raise ConfigurationError(
                f"configured embedder {embedder.tag!r} does not match snapshot embedder "
                f"{manifest.embedder_tag!r}"
            )
        return cls.from_chunks(
            chunks,
            embedder,
            backend,
            manifest.config,
            template,
            vectors=vectors,
            lexical=lexical,
        )

    @classmethod
    def from_chunks(
        cls,
        chunks: Sequence[Chunk],
        embedder: Embedder | None = None,
        backend: GenerationBackend | None = None,
        config: RetrievalConfig | None = None,
        template: str | None = None,
        vectors: VectorIndex | None = None,
        lexical: LexicalIndex | None = None,
    ) -> "Pipeline":
        config = config or RetrievalConfig()
        embedder = embedder or HashEmbedder()
        backend = backend or MockGenerator()
        chunks = list(chunks)
        lexicon: set[str] = set()
        for chunk in chunks:
            lexicon.update(
                name for name in (normalize_drug_name(d) for d in chunk.drugs) if name
            )
        return cls(
            chunks=chunks,
            chunks_by_id={c.chunk_id: c for c in chunks},
            lexical=lexical if lexical is not None else build_lexical_index(chunks),
            vectors=vectors if vectors is not None else build_vector_index(chunks, embedder),
            lexicon=lexicon,
            embedder=embedder,
            backend=backend,
            template=template if template is not None else load_prompt_template(),
            config=config,
        )

    def retrieve(self, question: str, category: Category | None = None, k: int | None = None) -> list[RetrievedPassage]:
        config = self.config if k is None else _with_k_final(self.config, k)
        return hybrid_retrieve(
            question,
            self.lexical,
            self.vectors,
            self.chunks_by_id,
            self.embedder,
            config,
            category=category,
        )

    def answer_query(
        self,
        question: str,
        category: Category | None = None,
        k: int | None = None,
    ) -> AnswerRecord:
        """Run the full pipeline; parse failures are recorded, not raised."""
        start = time.perf_counter()
        try:
            entities = extract_drug_entities(question, self.lexicon)
        except Exception as exc:  # noqa: BLE001 - tagged and re-raised
            raise PipelineStageError("extract_entities", exc) from exc
        detected = category or detect_category(question, entities)
        try:
            passages = self.retrieve(question, category=detected, k=k)
        except DurqaError:
            raise
        except Exception as exc:
            raise PipelineStageError("retrieve", exc) from exc
        try:
            prompt = build_prompt(question, passages, self.template, entities, detected)
        except DurqaError:
            raise
        except Exception as exc:
            raise PipelineStageError("build_prompt", exc) from exc
        try:
            raw = self.backend.generate(prompt)
        except DurqaError:
            raise
        except Exception as exc:
            raise PipelineStageError("generate", exc) from exc
        answer: StructuredAnswer | None = None
        parse_error: str | None = None
        try:
            answer = parse_structured_answer(raw)
        except AnswerParseError as exc:
            parse_error = str(exc)
        return AnswerRecord(
            query=question,
            entities=entities,
            category=detected,
            passages=passages,
            prompt=prompt,
            raw=raw,
            answer=answer,
            parse_error=parse_error,
            backend_tag=self.backend.tag,
            latency_s=time.perf_counter() - start,
        )


def _with_k_final(config: RetrievalConfig, k: int) -> RetrievalConfig:
    return RetrievalConfig(
        k_dense=config.k_dense,
        k_sparse=config.k_sparse,
        k_final=k,
        bm25_k1=config.bm25_k1,
        bm25_b=config.bm25_b,
        rrf_K=config.rrf_K,
        max_chunk_tokens=config.max_chunk_tokens,
    )
