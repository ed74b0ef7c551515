"""HTTP API over a built pipeline: query, eval, chunk inspection, health."""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import Category, load_qa_dataset
from .errors import (
    AnswerParseError,
    ConfigurationError,
    CredentialError,
    DurqaError,
    SnapshotError,
)
from .evaluation import KeywordOntology, run_eval
from .pipeline import AnswerRecord, Pipeline

JUDGMENT_CONTRAINDICATED = "contraindicated"
JUDGMENT_NOT_CONTRAINDICATED = "not_contraindicated"


class QueryRequest(BaseModel):
    question: str
    category: str | None = None
    k: int | None = None


class EvalRequest(BaseModel):
    dataset_path: str
    ontology_path: str | None = None


def _error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _error_code(exc: DurqaError) -> tuple[str, int]:
    if isinstance(exc, SnapshotError):
        return "snapshot_error", 409
    if isinstance(exc, ConfigurationError):
        return "configuration_error", 409
    if isinstance(exc, CredentialError):
        return "credential_error", 502
    if isinstance(exc, AnswerParseError):
        return "parse_error", 502
    return "domain_error", 400


def answer_record_body(record: AnswerRecord) -> dict:
    """Wire form of an answer; evidence passages ride along for display."""
    body: dict = {
        "choice": record.answer.choice if record.answer else None,
        "judgment": (
            (JUDGMENT_CONTRAINDICATED if record.answer.contraindicated else JUDGMENT_NOT_CONTRAINDICATED)
            if record.answer
            else None
        ),
        "grounded_declared": record.answer.declared_grounded if record.answer else None,
        "rationale": record.answer.rationale if record.answer else None,
        "entities": list(record.entities),
        "category": record.category.value if record.category else None,
        "passages": [p.to_json() for p in record.passages],
    }
    if record.parse_error is not None:
        body["parse_error"] = record.parse_error
        body["raw"] = record.raw
    return body


def create_app(
    pipeline: Pipeline,
    ontology: KeywordOntology | None = None,
    cors_origin: str | None = None,
    ui_dir: str | Path | None = None,
    api_key: str | None = None,
) -> FastAPI:
    """Build the service over an already-constructed (immutable) pipeline,
    so readiness coincides with app creation."""
    app = FastAPI(title="durqa")
    ontology = ontology or KeywordOntology.default()

    if cors_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    if api_key:
        @app.middleware("http")
        async def check_api_key(request: Request, call_next):
            if request.url.path.startswith("/v1/") and request.url.path != "/v1/health":
                provided = request.headers.get("x-api-key") or ""
                auth = request.headers.get("authorization") or ""
                if auth.startswith("Bearer "):
                    provided = provided or auth[len("Bearer "):]
                if provided != api_key:
                    return JSONResponse(
                        status_code=401, content=_error_body("unauthorized", "missing or invalid API key")
                    )
            return await call_next(request)

    @app.exception_handler(DurqaError)
    async def handle_domain_error(_request: Request, exc: DurqaError):
        code, status = _error_code(exc)
        return JSONResponse(status_code=status, content=_error_body(code, str(exc)))

    @app.exception_handler(ValueError)
    async def handle_value_error(_request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content=_error_body("invalid_request", str(exc)))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, exc: RequestValidationError):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err.get('loc', ()))}: {err.get('msg')}"
            for err in exc.errors()
        )
        return JSONResponse(status_code=400, content=_error_body("invalid_request", detail))

    @app.exception_handler(Exception)
    async def handle_unexpected(_request: Request, exc: Exception):
        return JSONResponse(
            status_code=500, content=_error_body("internal", f"{type(exc).__name__}: {exc}")
        )

    @app.get("/v1/health")
    def health() -> dict:
        return {
            "status": "ok",
            "chunks": len(pipeline.chunks),
            "embedder": pipeline.embedder.tag,
        }

    @app.post("/v1/query")
    def query(req: QueryRequest) -> dict:
        category: Category | None = None
        if req.category is not None:
            try:
                category = Category(req.category)
            except ValueError:
                raise ValueError(f"unknown category {req.category!r}")
        if req.k is not None and not (
            1 <= req.k <= pipeline.config.k_dense + pipeline.config.k_sparse
        ):
            raise ValueError(
                f"k must be between 1 and {pipeline.config.k_dense + pipeline.config.k_sparse}"
            )
        record = pipeline.answer_query(req.question, category=category, k=req.k)
        return answer_record_body(record)

    @app.post("/v1/eval")
    def eval_dataset(req: EvalRequest) -> dict:
        dataset_path = Path(req.dataset_path)
        if not dataset_path.exists():
            raise ValueError(f"dataset not found: {dataset_path}")
        dataset = load_qa_dataset(dataset_path)
        if not dataset:
            raise ValueError(f"dataset is empty: {dataset_path}")
        onto = KeywordOntology.load(req.ontology_path) if req.ontology_path else ontology
        report = run_eval(dataset, pipeline, onto)
        return report.to_json()

    @app.get("/v1/chunks/{chunk_id}")
    def get_chunk(chunk_id: str):
        chunk = pipeline.chunks_by_id.get(chunk_id)
        if chunk is None:
            return JSONResponse(
                status_code=404,
                content=_error_body("not_found", f"no chunk with id {chunk_id!r}"),
            )
        return chunk.to_json()

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
