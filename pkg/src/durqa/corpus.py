"""Contraindication corpus: CSV ingestion, chunking, and QA dataset handling."""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import CsvRowError, CsvSchemaError, DatasetError, TemplateError
from .tokenizer import count_tokens, normalize_text


class Category(str, Enum):
    PEDIATRIC = "pediatric"
    PREGNANCY = "pregnancy"
    DDI = "ddi"


CATEGORY_LABELS = {
    Category.PEDIATRIC: "Pediatric age",
    Category.PREGNANCY: "Pregnancy",
    Category.DDI: "Drug-drug interaction",
}

CSV_HEADERS = {
    Category.PEDIATRIC: ["id", "drug_name", "ingredient", "manufacturer", "age_rule", "reason"],
    Category.PREGNANCY: ["id", "drug_name", "ingredient", "manufacturer", "grade", "reason"],
    Category.DDI: [
        "id",
        "drug_name_a",
        "ingredient_a",
        "manufacturer_a",
        "drug_name_b",
        "ingredient_b",
        "manufacturer_b",
        "reason",
    ],
}


def normalize_drug_name(name: str) -> str:
    """Canonical matching form of a product name; display casing is kept elsewhere."""
    return normalize_text(name.strip())


@dataclass(frozen=True)
class ContraindicationEntry:
    """One restriction row from a DUR-style table."""

    id: str
    category: Category
    drug_names: tuple[str, ...]
    ingredients: tuple[str, ...]
    manufacturers: tuple[str, ...]
    reason_text: str
    grade: int | None = None
    age_rule: str | None = None

    def __post_init__(self) -> None:
        expected = 2 if self.category is Category.DDI else 1
        if len(self.drug_names) != expected:
            raise ValueError(
                f"entry {self.id!r}: category {self.category.value} requires "
                f"{expected} drug name(s), got {len(self.drug_names)}"
            )
        if len(self.ingredients) != len(self.drug_names):
            raise ValueError(f"entry {self.id!r}: ingredients must parallel drug_names")
        if not self.reason_text.strip():
            raise ValueError(f"entry {self.id!r}: reason_text is empty")
        if self.grade is not None:
            if self.category is not Category.PREGNANCY:
                raise ValueError(f"entry {self.id!r}: grade is pregnancy-only")
            if self.grade not in (1, 2):
                raise ValueError(f"entry {self.id!r}: grade must be 1 or 2, got {self.grade}")
        if self.age_rule is not None and self.category is not Category.PEDIATRIC:
            raise ValueError(f"entry {self.id!r}: age_rule is pediatric-only")

    @property
    def normalized_drugs(self) -> tuple[str, ...]:
        return tuple(normalize_drug_name(n) for n in self.drug_names)


@dataclass(frozen=True)
class Chunk:
    """One token-bounded, self-identifying unit of indexable restriction text."""

    chunk_id: str
    entry_id: str
    category: Category
    text: str
    token_count: int
    drugs: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "entry_id": self.entry_id,
            "category": self.category.value,
            "text": self.text,
            "token_count": self.token_count,
            "drugs": list(self.drugs),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Chunk":
        return cls(
            chunk_id=obj["chunk_id"],
            entry_id=obj["entry_id"],
            category=Category(obj["category"]),
            text=obj["text"],
            token_count=int(obj["token_count"]),
            drugs=tuple(obj.get("drugs", ())),
        )


GOLD_CONTRAINDICATED = "contraindicated"
GOLD_NOT_CONTRAINDICATED = "not_contraindicated"


@dataclass(frozen=True)
class QAPair:
    id: str
    category: Category
    question: str
    gold_label: str
    gold_reason: str
    drugs: tuple[str, ...]
    exclude_rationale_eval: bool = False

    def __post_init__(self) -> None:
        if self.gold_label not in (GOLD_CONTRAINDICATED, GOLD_NOT_CONTRAINDICATED):
            raise ValueError(f"qa pair {self.id!r}: invalid gold_label {self.gold_label!r}")
        if self.gold_label == GOLD_CONTRAINDICATED and not self.gold_reason.strip():
            raise ValueError(f"qa pair {self.id!r}: contraindicated pair needs a gold_reason")
        expected = 2 if self.category is Category.DDI else 1
        if len(self.drugs) != expected:
            raise ValueError(
                f"qa pair {self.id!r}: category {self.category.value} requires "
                f"{expected} drug(s), got {len(self.drugs)}"
            )

    def to_json(self) -> dict:
        obj = {
            "id": self.id,
            "category": self.category.value,
            "question": self.question,
            "gold_label": self.gold_label,
            "gold_reason": self.gold_reason,
            "drugs": list(self.drugs),
        }
        if self.exclude_rationale_eval:
            obj["exclude_rationale_eval"] = True
        return obj


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def parse_dur_csv(raw_bytes: bytes, category: Category) -> list[ContraindicationEntry]:
    """Parse one category's CSV export into validated entries.

    The header must match the category schema exactly. Row order is
    preserved; every field is whitespace-trimmed; ids must be unique.
    """
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CsvSchemaError(f"input is not valid UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    expected = CSV_HEADERS[category]
    if not rows:
        raise CsvSchemaError(f"empty file; expected header {','.join(expected)}")
    header = [h.strip() for h in rows[0]]
    if header != expected:
        missing = [c for c in expected if c not in header]
        if missing:
            raise CsvSchemaError(f"header missing column(s): {', '.join(missing)}")
        raise CsvSchemaError(
            f"header mismatch: expected {','.join(expected)}, got {','.join(header)}"
        )

    entries: list[ContraindicationEntry] = []
    seen_ids: set[str] = set()
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(expected):
            raise CsvRowError(line_no, f"expected {len(expected)} fields, got {len(row)}")
        cells = dict(zip(expected, (c.strip() for c in row)))
        if not cells["id"]:
            raise CsvRowError(line_no, "empty id")
        if cells["id"] in seen_ids:
            raise CsvRowError(line_no, f"duplicate id {cells['id']!r}")
        if not cells["reason"]:
            raise CsvRowError(line_no, "empty reason")

        try:
            if category is Category.DDI:
                if not cells["drug_name_a"] or not cells["drug_name_b"]:
                    raise CsvRowError(line_no, "empty drug name")
                if normalize_drug_name(cells["drug_name_a"]) == normalize_drug_name(
                    cells["drug_name_b"]
                ):
                    raise CsvRowError(line_no, "drug_name_a and drug_name_b are identical")
                entry = ContraindicationEntry(
                    id=cells["id"],
                    category=category,
                    drug_names=(cells["drug_name_a"], cells["drug_name_b"]),
                    ingredients=(cells["ingredient_a"], cells["ingredient_b"]),
                    manufacturers=(cells["manufacturer_a"], cells["manufacturer_b"]),
                    reason_text=cells["reason"],
                )
            else:
                if not cells["drug_name"]:
                    raise CsvRowError(line_no, "empty drug name")
                grade: int | None = None
                age_rule: str | None = None
                if category is Category.PREGNANCY and cells["grade"]:
                    try:
                        grade = int(cells["grade"])
                    except ValueError:
                        raise CsvRowError(line_no, f"grade is not an integer: {cells['grade']!r}")
                if category is Category.PEDIATRIC and cells["age_rule"]:
                    age_rule = cells["age_rule"]
                entry = ContraindicationEntry(
                    id=cells["id"],
                    category=category,
                    drug_names=(cells["drug_name"],),
                    ingredients=(cells["ingredient"],),
                    manufacturers=(cells["manufacturer"],),
                    reason_text=cells["reason"],
                    grade=grade,
                    age_rule=age_rule,
                )
        except ValueError as exc:
            raise CsvRowError(line_no, str(exc)) from exc
        seen_ids.add(entry.id)
        entries.append(entry)
    return entries


def serialize_dur_csv(entries: Sequence[ContraindicationEntry], category: Category) -> bytes:
    """Inverse of parse_dur_csv for valid entry lists (round-trip tested)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADERS[category])
    for e in entries:
        if e.category is not category:
            raise ValueError(f"entry {e.id!r} has category {e.category.value}, not {category.value}")
        if category is Category.DDI:
            writer.writerow(
                [
                    e.id,
                    e.drug_names[0],
                    e.ingredients[0],
                    e.manufacturers[0],
                    e.drug_names[1],
                    e.ingredients[1],
                    e.manufacturers[1],
                    e.reason_text,
                ]
            )
        elif category is Category.PREGNANCY:
            writer.writerow(
                [
                    e.id,
                    e.drug_names[0],
                    e.ingredients[0],
                    e.manufacturers[0],
                    "" if e.grade is None else str(e.grade),
                    e.reason_text,
                ]
            )
        else:
            writer.writerow(
                [
                    e.id,
                    e.drug_names[0],
                    e.ingredients[0],
                    e.manufacturers[0],
                    e.age_rule or "",
                    e.reason_text,
                ]
            )
    return buf.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# Rendering and chunking
# ---------------------------------------------------------------------------

def render_entry_text(entry: ContraindicationEntry) -> str:
    """Canonical chunk body: fixed field order so indexing is deterministic."""
    label = CATEGORY_LABELS[entry.category]
    lines = [f"{label} contraindication"]
    if entry.category is Category.DDI:
        a, b = entry.drug_names
        ia, ib = entry.ingredients
        ma, mb = entry.manufacturers
        lines.append(f"Drugs: {a} (ingredient: {ia}; manufacturer: {ma}) with "
                     f"{b} (ingredient: {ib}; manufacturer: {mb})")
    else:
        lines.append(
            f"Drug: {entry.drug_names[0]} (ingredient: {entry.ingredients[0]}; "
            f"manufacturer: {entry.manufacturers[0]})"
        )
    if entry.grade is not None:
        lines.append(f"Contraindication level: {entry.grade}")
    if entry.age_rule is not None:
        lines.append(f"Age restriction: {entry.age_rule}")
    lines.append(f"Reason: {entry.reason_text}")
    return "\n".join(lines)


def entity_preamble(entry: ContraindicationEntry) -> str:
    """One-line identity header repeated on continuation chunks."""
    return f"[{CATEGORY_LABELS[entry.category]}] {' + '.join(entry.drug_names)}"


_ATOM_SPANS = re.compile(
    r"[ᄀ-ᇿ぀-ヿ㐀-䶿一-鿿가-힣豈-﫿]"
    r"|(?:(?![ᄀ-ᇿ぀-ヿ㐀-䶿一-鿿가-힣豈-﫿])\w)+"
)
_SENTENCE_END = ".!?。！？"


def _sentence_boundaries(text: str) -> list[int]:
    """Positions where a split keeps sentences intact (after terminator or newline)."""
    bounds = []
    for i, ch in enumerate(text):
        if ch == "\n":
            bounds.append(i + 1)
        elif ch in _SENTENCE_END and (i + 1 == len(text) or text[i + 1].isspace()):
            bounds.append(i + 1)
    return bounds


def _split_by_budget(text: str, first_budget: int, cont_budget: int) -> list[str]:
    """Split text into pieces of at most the given token budgets.

    Prefers the last sentence boundary that fits; falls back to the last
    whole-token boundary. Every piece contains at least one token, so the
    split always terminates.
    """
    spans = [(m.start(), m.end()) for m in _ATOM_SPANS.finditer(text)]
    if not spans:
        return [text]
    bounds = _sentence_boundaries(text)
    pieces: list[str] = []
    start = 0
    tok = 0  # index of first token not yet assigned
    while tok < len(spans):
        budget = first_budget if not pieces else cont_budget
        if tok + budget >= len(spans):
            pieces.append(text[start:])
            break
        limit = spans[tok + budget][0]
        min_pos = spans[tok][1]
        cut = None
        for b in bounds:
            if min_pos < b <= limit:
                cut = b
        if cut is None:
            cut = spans[tok + budget - 1][1]
        pieces.append(text[start:cut])
        start = cut
        while tok < len(spans) and spans[tok][1] <= cut:
            tok += 1
    return pieces


def chunk_entry(
    entry: ContraindicationEntry,
    max_tokens: int,
    counter: Callable[[str], int] = count_tokens,
) -> list[Chunk]:
    """Chunk one entry's rendered text into non-overlapping, token-bounded units.

    Continuation chunks repeat the entity preamble so each chunk is
    self-identifying after retrieval; the preamble is skipped when it
    would not leave room for at least one body token.
    """
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    rendered = render_entry_text(entry)
    total = counter(rendered)
    if total <= max_tokens:
        return [
            Chunk(
                chunk_id=f"{entry.id}#0",
                entry_id=entry.id,
                category=entry.category,
                text=rendered,
                token_count=total,
                drugs=entry.drug_names,
            )
        ]

    preamble = entity_preamble(entry)
    cont_budget = max_tokens - counter(preamble)
    use_preamble = cont_budget >= 1
    if not use_preamble:
        cont_budget = max_tokens
    pieces = _split_by_budget(rendered, max_tokens, cont_budget)

    chunks: list[Chunk] = []
    for i, piece in enumerate(pieces):
        text = piece if i == 0 or not use_preamble else f"{preamble}\n{piece}"
        chunks.append(
            Chunk(
                chunk_id=f"{entry.id}#{i}",
                entry_id=entry.id,
                category=entry.category,
                text=text,
                token_count=counter(text),
                drugs=entry.drug_names,
            )
        )
    return chunks


def chunk_corpus(
    entries: Iterable[ContraindicationEntry],
    max_tokens: int,
    counter: Callable[[str], int] = count_tokens,
) -> list[Chunk]:
    """Chunk every entry, enforcing corpus-wide chunk id uniqueness."""
    chunks: list[Chunk] = []
    seen: set[str] = set()
    for entry in entries:
        for chunk in chunk_entry(entry, max_tokens, counter):
            if chunk.chunk_id in seen:
                raise ValueError(f"duplicate chunk id {chunk.chunk_id!r}")
            seen.add(chunk.chunk_id)
            chunks.append(chunk)
    return chunks


# ---------------------------------------------------------------------------
# QA pair generation and dataset IO
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuestionTemplates:
    """Per-category question templates and fixed negative answers.

    Single-drug templates need a {drug} placeholder; the interaction
    template needs {drug_a} and {drug_b}.
    """

    pediatric_question: str = "Can a young child take {drug} tablets?"
    pregnancy_question: str = "Can a pregnant woman take {drug} tablets?"
    ddi_question: str = "Can {drug_a} and {drug_b} tablets be taken together?"
    pediatric_negative: str = "{drug} is not classified as age-related contraindications."
    pregnancy_negative: str = "{drug} is not classified under any contraindication level."
    ddi_negative: str = "{drug_a} and {drug_b} are not classified as contraindicated for co-administration."

    def question_for(self, category: Category) -> str:
        return {
            Category.PEDIATRIC: self.pediatric_question,
            Category.PREGNANCY: self.pregnancy_question,
            Category.DDI: self.ddi_question,
        }[category]

    def negative_for(self, category: Category) -> str:
        return {
            Category.PEDIATRIC: self.pediatric_negative,
            Category.PREGNANCY: self.pregnancy_negative,
            Category.DDI: self.ddi_negative,
        }[category]

    def validate(self) -> None:
        for cat in Category:
            needed = ("{drug_a}", "{drug_b}") if cat is Category.DDI else ("{drug}",)
            for template in (self.question_for(cat), self.negative_for(cat)):
                for ph in needed:
                    if ph not in template:
                        raise TemplateError(
                            f"{cat.value} template {template!r} is missing placeholder {ph}"
                        )


def _fill(template: str, drugs: Sequence[str], category: Category) -> str:
    try:
        if category is Category.DDI:
            return template.format(drug_a=drugs[0], drug_b=drugs[1])
        return template.format(drug=drugs[0])
    except (KeyError, IndexError) as exc:
        raise TemplateError(f"template {template!r} has an unknown placeholder: {exc}") from exc


def _gold_reason(entry: ContraindicationEntry) -> str:
    parts = []
    if entry.grade is not None:
        parts.append(f"Classified as contraindication level {entry.grade}.")
    if entry.age_rule is not None:
        parts.append(f"Restricted {entry.age_rule}.")
    parts.append(entry.reason_text)
    return " ".join(parts)


def generate_qa_pairs(
    entries: Sequence[ContraindicationEntry],
    safe_drugs: Sequence[tuple[tuple[str, ...], Category]],
    templates: QuestionTemplates | None = None,
) -> list[QAPair]:
    """Build the QA dataset: one contraindicated pair per entry plus one
    not-contraindicated pair per safe drug (or drug pair)."""
    templates = templates or QuestionTemplates()
    templates.validate()
    pairs: list[QAPair] = []
    for entry in entries:
        pairs.append(
            QAPair(
                id=f"{entry.id}-qa",
                category=entry.category,
                question=_fill(templates.question_for(entry.category), entry.drug_names, entry.category),
                gold_label=GOLD_CONTRAINDICATED,
                gold_reason=_gold_reason(entry),
                drugs=entry.drug_names,
            )
        )
    for i, (names, category) in enumerate(safe_drugs):
        names = tuple(names)
        pairs.append(
            QAPair(
                id=f"safe-{category.value}-{i:03d}",
                category=category,
                question=_fill(templates.question_for(category), names, category),
                gold_label=GOLD_NOT_CONTRAINDICATED,
                gold_reason=_fill(templates.negative_for(category), names, category),
                drugs=names,
            )
        )
    return pairs


def load_qa_dataset(path: str | Path) -> list[QAPair]:
    """Read a JSONL QA dataset, validating every line."""
    pairs: list[QAPair] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(line_no, f"malformed JSON: {exc}") from exc
            try:
                pairs.append(
                    QAPair(
                        id=str(obj["id"]),
                        category=Category(obj["category"]),
                        question=str(obj["question"]),
                        gold_label=str(obj["gold_label"]),
                        gold_reason=str(obj.get("gold_reason", "")),
                        drugs=tuple(obj["drugs"]),
                        exclude_rationale_eval=bool(obj.get("exclude_rationale_eval", False)),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise DatasetError(line_no, str(exc)) from exc
    return pairs


def save_qa_dataset(pairs: Sequence[QAPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_json(), ensure_ascii=False) + "\n")


def load_safe_drugs(path: str | Path) -> list[tuple[tuple[str, ...], Category]]:
    """Read the external safe-drug list: [{"category": ..., "drugs": [...]}, ...]."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    out: list[tuple[tuple[str, ...], Category]] = []
    for item in raw:
        out.append((tuple(item["drugs"]), Category(item["category"])))
    return out


def build_drug_lexicon(entries: Iterable[ContraindicationEntry]) -> set[str]:
    """Normalized product names of every ingested entry, for entity extraction."""
    lexicon: set[str] = set()
    for entry in entries:
        lexicon.update(entry.normalized_drugs)
    return lexicon
