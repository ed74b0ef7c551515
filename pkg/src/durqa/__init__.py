"""Hybrid-retrieval question answering over DUR-style contraindication data."""

from .config import RetrievalConfig, SystemConfig
from .corpus import (
    Category,
    Chunk,
    ContraindicationEntry,
    QAPair,
    QuestionTemplates,
    chunk_corpus,
    chunk_entry,
    generate_qa_pairs,
    load_qa_dataset,
    parse_dur_csv,
    render_entry_text,
    serialize_dur_csv,
)
from .embedding import HashEmbedder, RemoteEmbedder, cosine_similarity, hash_embed
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    KeywordOntology,
    confusion_and_metrics,
    four_way_distribution,
    keyword_prf,
    match_keywords,
    prf_from_counts,
    run_eval,
    verify_grounding,
)
from .generation import (
    MockGenerator,
    RemoteGenerator,
    StructuredAnswer,
    build_prompt,
    extract_drug_entities,
    parse_structured_answer,
)
from .hybrid import RetrievedPassage, hybrid_retrieve, merge_dedup, rrf_rerank
from .lexical import LexicalIndex, bm25_score, build_lexical_index, sparse_search
from .pipeline import AnswerRecord, Pipeline
from .service import create_app
from .snapshot import load_snapshot, save_snapshot
from .vector import VectorIndex, build_vector_index, dense_search

__version__ = "0.1.0"

__all__ = [
    "AnswerRecord",
    "Category",
    "Chunk",
    "ConfusionMatrix",
    "ContraindicationEntry",
    "EvalReport",
    "HashEmbedder",
    "KeywordOntology",
    "LexicalIndex",
    "MockGenerator",
    "Pipeline",
    "QAPair",
    "QuestionTemplates",
    "RemoteEmbedder",
    "RemoteGenerator",
    "RetrievalConfig",
    "RetrievedPassage",
    "StructuredAnswer",
    "SystemConfig",
    "VectorIndex",
    "bm25_score",
    "build_lexical_index",
    "build_prompt",
    "build_vector_index",
    "chunk_corpus",
    "chunk_entry",
    "confusion_and_metrics",
    "cosine_similarity",
    "create_app",
    "dense_search",
    "extract_drug_entities",
    "four_way_distribution",
    "generate_qa_pairs",
    "hash_embed",
    "hybrid_retrieve",
    "keyword_prf",
    "load_qa_dataset",
    "load_snapshot",
    "match_keywords",
    "merge_dedup",
    "parse_dur_csv",
    "parse_structured_answer",
    "prf_from_counts",
    "render_entry_text",
    "rrf_rerank",
    "run_eval",
    "save_snapshot",
    "serialize_dur_csv",
    "sparse_search",
    "verify_grounding",
]
