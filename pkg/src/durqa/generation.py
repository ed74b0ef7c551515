"""Grounded four-option prompting, generation backends, and answer parsing.

The prompt carries, besides the human-readable context, a machine-readable
sentinel block (`#!` lines, JSON payloads). The deterministic mock backend
and the grounding verifier read that block instead of doing NLP.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .corpus import Category
from .errors import AnswerParseError, PromptFormatError, ProtocolError, TemplateError
from .hybrid import RetrievedPassage
from .tokenizer import normalize_text
from .transport import HttpJsonClient

MACHINE_BLOCK_HEADER = "#! machine-context v1"

FOUR_OPTION_TEXT = """Select exactly one option:
(1) contraindicated, and the context supports it
(2) not contraindicated, and the context supports it
(3) contraindicated, but the context does not support it
(4) not contraindicated, and the context does not support it
Respond in this form:
choice: <1-4>
reason: <short rationale>"""

NO_CONTEXT_TEXT = "No context retrieved. Choose option 3 or 4."


@dataclass(frozen=True)
class StructuredAnswer:
    """Parsed model output: a four-way choice plus its rationale."""

    choice: int
    rationale: str
    raw: str

    def __post_init__(self) -> None:
        if self.choice not in (1, 2, 3, 4):
            raise ValueError(f"choice must be in 1..4, got {self.choice}")
        if not self.rationale:
            raise ValueError("rationale must be non-empty")

    @property
    def contraindicated(self) -> bool:
        return judgment_from_choice(self.choice)

    @property
    def declared_grounded(self) -> bool:
        return declared_grounded_from_choice(self.choice)


def judgment_from_choice(choice: int) -> bool:
    """Choices 1 and 3 assert a contraindication."""
    return choice in (1, 3)


def declared_grounded_from_choice(choice: int) -> bool:
    """Choices 1 and 2 claim explicit context support."""
    return choice in (1, 2)


# ---------------------------------------------------------------------------
# Entity extraction and category detection
# ---------------------------------------------------------------------------

def extract_drug_entities(question: str, lexicon: Iterable[str]) -> list[str]:
    """Longest-match, non-overlapping scan of the normalized question
    against the normalized drug-name lexicon; order of first appearance,
    duplicates removed."""
    names = set(lexicon)
    norm = normalize_text(question)
    found: list[str] = []
    i = 0
    while i < len(norm):
        best: str | None = None
        for name in names:
            if name and norm.startswith(name, i) and (best is None or len(name) > len(best)):
                best = name
        if best is not None:
            if best not in found:
                found.append(best)
            i += len(best)
        else:
            i += 1
    return found


def detect_category(question: str, entities: Sequence[str]) -> Category | None:
    """Two entities imply an interaction query; otherwise fall back to
    question keywords; otherwise unknown (unfiltered retrieval)."""
    if len(entities) >= 2:
        return Category.DDI
    norm = normalize_text(question)
    if "pregnan" in norm or "임산부" in norm:
        return Category.PREGNANCY
    if "child" in norm or "어린" in norm:
        return Category.PEDIATRIC
    return None


# ---------------------------------------------------------------------------
# Prompt building
# ---------------------------------------------------------------------------

def load_prompt_template(path: str | Path | None = None) -> str:
    """Read a template file, or the packaged default when no path is given."""
    if path is not None:
        return Path(path).read_text(encoding="utf-8")
    return resources.files("durqa").joinpath("assets/prompt_template.txt").read_text(
        encoding="utf-8"
    )


def _passage_reason(text: str) -> str | None:
    """The chunk's reason field, when this chunk carries it (reason is the
    last rendered field, so everything after the marker belongs to it)."""
    marker = "Reason: "
    if text.startswith(marker):
        return text[len(marker):]
    idx = text.find("\n" + marker)
    if idx == -1:
        return None
    return text[idx + 1 + len(marker):]


def build_machine_block(
    entities: Sequence[str],
    category: Category | None,
    passages: Sequence[RetrievedPassage],
) -> str:
    lines = [MACHINE_BLOCK_HEADER]
    query_obj = {
        "category": category.value if category else None,
        "entities": list(entities),
    }
    lines.append("#! query " + json.dumps(query_obj, ensure_ascii=False, sort_keys=True))
    for p in passages:
        ctx_obj = {
            "rank": p.final_rank,
            "chunk_id": p.chunk_id,
            "category": p.category.value,
            "drugs": list(p.drugs),
            "reason": _passage_reason(p.text),
        }
        lines.append("#! ctx " + json.dumps(ctx_obj, ensure_ascii=False, sort_keys=True))
    return "\n".join(lines)


def build_prompt(
    question: str,
    passages: Sequence[RetrievedPassage],
    template: str,
    entities: Sequence[str] = (),
    category: Category | None = None,
) -> str:
    """Fill the template with numbered context blocks (final_rank order),
    the question, and the fixed four-option instruction; append the
    machine-readable sentinel block."""
    for placeholder in ("{{context}}", "{{question}}", "{{options}}"):
        if placeholder not in template:
            raise TemplateError(f"prompt template is missing placeholder {placeholder}")
    ordered = sorted(passages, key=lambda p: p.final_rank)
    if ordered:
        context = "\n\n".join(f"[{p.final_rank}] {p.text}" for p in ordered)
    else:
        context = NO_CONTEXT_TEXT
    filled = (
        template.replace("{{context}}", context)
        .replace("{{question}}", question)
        .replace("{{options}}", FOUR_OPTION_TEXT)
    )
    return filled + "\n\n" + build_machine_block(entities, category, ordered)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

class GenerationBackend(Protocol):
    tag: str

    def generate(self, prompt: str) -> str: ...


def mock_generate(prompt: str) -> str:
    """Deterministic rule-based completion driven by the sentinel block.

    Emits choice 1 with the matching passage's reason when some context
    entry covers every queried entity in the question's category, and
    choice 4 otherwise.
    """
    lines = prompt.splitlines()
    if MACHINE_BLOCK_HEADER not in lines:
        raise PromptFormatError("prompt has no machine-context block")
    query_obj: dict | None = None
    ctx_objs: list[dict] = []
    for line in lines:
        if line.startswith("#! query "):
            query_obj = json.loads(line[len("#! query "):])
        elif line.startswith("#! ctx "):
            ctx_objs.append(json.loads(line[len("#! ctx "):]))
    if query_obj is None:
        raise PromptFormatError("machine-context block has no query line")

    entities = [normalize_text(e) for e in query_obj.get("entities") or []]
    category = query_obj.get("category")
    if not entities:
        return "choice: 4\nreason: no drug entity recognized in the question"
    for ctx in sorted(ctx_objs, key=lambda c: c.get("rank", 0)):
        if category is not None and ctx.get("category") != category:
            continue
        ctx_drugs = {normalize_text(d) for d in ctx.get("drugs") or []}
        if ctx_drugs.issuperset(entities):
            reason = ctx.get("reason") or f"contraindicated per retrieved entry {ctx.get('chunk_id')}"
            return f"choice: 1\nreason: {reason}"
    return "choice: 4\nreason: no contraindication found in context"


class MockGenerator:
    """Offline backend applying the deterministic contraindication rule."""

    tag = "mock-rule/v1"

    def generate(self, prompt: str) -> str:
        return mock_generate(prompt)


class RemoteGenerator:
    """Client for a JSON-over-HTTP completion provider.

    Wire shape: request {"model": tag, "prompt": text}, response
    {"completion": text}. Retries mirror the embedding client.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        model_tag: str = "remote",
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_in_flight: int = 8,
    ):
        self.tag = model_tag
        self._client = HttpJsonClient(
            endpoint,
            api_key=api_key,
            max_attempts=max_attempts,
            backoff_base=backoff_base,
            max_in_flight=max_in_flight,
        )

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "RemoteGenerator":
        env = env if env is not None else dict(os.environ)
        endpoint = env.get("LLM_ENDPOINT")
        if not endpoint:
            raise ValueError("LLM_ENDPOINT is not configured")
        return cls(
            endpoint,
            api_key=env.get("LLM_API_KEY"),
            model_tag=env.get("LLM_MODEL_TAG", "remote"),
        )

    def generate(self, prompt: str) -> str:
        body = self._client.post({"model": self.tag, "prompt": prompt})
        completion = body.get("completion")
        if not isinstance(completion, str):
            raise ProtocolError(
                f"provider response missing 'completion' string, got {type(completion).__name__}"
            )
        return completion


# ---------------------------------------------------------------------------
# Structured answer parsing
# ---------------------------------------------------------------------------

_CHOICE_RE = re.compile(r"(?:금기선택|\bchoice\b)\s*[::]?\s*\**\s*(\d+)", re.IGNORECASE)
_REASON_RE = re.compile(r"(?:금기사유|\breason\b)\s*[::]?\s*", re.IGNORECASE)


def parse_structured_answer(raw: str) -> StructuredAnswer:
    """Extract the four-way choice and rationale, accepting both the Korean
    and English marker pairs with optional bold markers."""
    m = _CHOICE_RE.search(raw)
    if m is None:
        raise AnswerParseError("no choice marker found")
    choice = int(m.group(1))
    if choice not in (1, 2, 3, 4):
        raise AnswerParseError(f"choice {choice} outside 1..4")
    rm = _REASON_RE.search(raw, m.end()) or _REASON_RE.search(raw)
    if rm is not None and rm.end() > m.end():
        rationale = raw[rm.end():].strip()
    else:
        rationale = raw[m.end():].strip().lstrip("*,.:;-— ").strip()
    if not rationale:
        raise AnswerParseError("empty rationale")
    return StructuredAnswer(choice=choice, rationale=rationale, raw=raw)


def render_structured_answer(choice: int, rationale: str) -> str:
    """Canonical textual form; parse_structured_answer inverts it."""
    return f"choice: {choice}\nreason: {rationale}"
