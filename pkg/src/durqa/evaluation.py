"""Three-part evaluation: judgment metrics, four-way grounding distribution,
and keyword-ontology rationale scoring."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .corpus import Category, QAPair, GOLD_CONTRAINDICATED
from .errors import DurqaError
from .pipeline import AnswerRecord, Pipeline
from .tokenizer import normalize_text

VERIFIED_GROUNDED = "verified_grounded"
UNSUPPORTED = "unsupported"


# ---------------------------------------------------------------------------
# Keyword ontology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KeywordClass:
    name: str
    patterns: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError(f"keyword class {self.name!r} has no patterns")


class KeywordOntology:
    """Per-category clinical rationale classes with case-insensitive patterns."""

    def __init__(self, classes_by_category: dict[Category, list[KeywordClass]]):
        for category, classes in classes_by_category.items():
            names = [c.name for c in classes]
            if len(names) != len(set(names)):
                raise ValueError(f"duplicate class names in {category.value} ontology")
        self.classes_by_category = classes_by_category

    def classes_for(self, category: Category | None) -> list[KeywordClass]:
        if category is not None:
            return self.classes_by_category.get(category, [])
        merged: list[KeywordClass] = []
        for classes in self.classes_by_category.values():
            merged.extend(classes)
        return merged

    @classmethod
    def from_json(cls, obj: dict) -> "KeywordOntology":
        classes_by_category = {
            Category(cat): [
                KeywordClass(name=c["name"], patterns=tuple(c["patterns"])) for c in classes
            ]
            for cat, classes in obj.items()
        }
        return cls(classes_by_category)

    @classmethod
    def load(cls, path: str | Path) -> "KeywordOntology":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def default(cls) -> "KeywordOntology":
        text = resources.files("durqa").joinpath("assets/ontology.json").read_text(
            encoding="utf-8"
        )
        return cls.from_json(json.loads(text))


def match_keywords(text: str, classes: Sequence[KeywordClass]) -> set[str]:
    """Class names whose patterns occur (case-insensitively, NFC) in text."""
    norm = normalize_text(text)
    return {
        c.name
        for c in classes
        if any(normalize_text(p) in norm for p in c.patterns)
    }


# ---------------------------------------------------------------------------
# Counting metrics
# ---------------------------------------------------------------------------

def prf_from_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall, F1 with the 0/0 -> 0 convention."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class ConfusionMatrix:
    """Positive class = contraindicated."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_json(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def confusion_and_metrics(
    records: Sequence[tuple[bool, bool]],
) -> tuple[ConfusionMatrix, float, float]:
    """Accuracy and macro-F1 over (predicted contraindicated, gold
    contraindicated) pairs; macro-F1 averages the two per-class F1 scores."""
    if not records:
        raise ValueError("cannot score an empty record list")
    tp = fp = fn = tn = 0
    for predicted, gold in records:
        if predicted and gold:
            tp += 1
        elif predicted and not gold:
            fp += 1
        elif not predicted and gold:
            fn += 1
        else:
            tn += 1
    matrix = ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)
    accuracy = (tp + tn) / matrix.n
    _, _, f1_pos = prf_from_counts(tp, fp, fn)
    _, _, f1_neg = prf_from_counts(tn, fn, fp)
    macro_f1 = (f1_pos + f1_neg) / 2
    return matrix, accuracy, macro_f1


@dataclass(frozen=True)
class FourWayRow:
    choice: int
    total: int
    actual_contraindicated: int
    actual_not_contraindicated: int

    def to_json(self) -> dict:
        return {
            "choice": self.choice,
            "total": self.total,
            "actual_contraindicated": self.actual_contraindicated,
            "actual_not_contraindicated": self.actual_not_contraindicated,
        }


def four_way_distribution(records: Sequence[tuple[int, bool]]) -> list[FourWayRow]:
    """Counts per decision type 1-4 of (choice, gold contraindicated) pairs."""
    contra = {c: 0 for c in (1, 2, 3, 4)}
    not_contra = {c: 0 for c in (1, 2, 3, 4)}
    for choice, gold in records:
        if choice not in contra:
            raise ValueError(f"choice {choice} outside 1..4")
        if gold:
            contra[choice] += 1
        else:
            not_contra[choice] += 1
    return [
        FourWayRow(
            choice=c,
            total=contra[c] + not_contra[c],
            actual_contraindicated=contra[c],
            actual_not_contraindicated=not_contra[c],
        )
        for c in (1, 2, 3, 4)
    ]


def four_way_to_confusion(rows: Sequence[FourWayRow]) -> ConfusionMatrix:
    """Decode a four-way table into the judgment confusion matrix
    (choices 1 and 3 predict contraindicated)."""
    tp = fp = fn = tn = 0
    for row in rows:
        if row.choice in (1, 3):
            tp += row.actual_contraindicated
            fp += row.actual_not_contraindicated
        else:
            fn += row.actual_contraindicated
            tn += row.actual_not_contraindicated
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class KeywordPRFRow:
    name: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def keyword_prf(
    samples: Sequence[tuple[str, str]],
    classes: Sequence[KeywordClass],
) -> list[KeywordPRFRow]:
    """Per-class precision/recall/F1 of predicted rationales against gold
    reasons, both reduced to ontology class sets."""
    rows: list[KeywordPRFRow] = []
    matched = [
        (match_keywords(gold, classes), match_keywords(predicted, classes))
        for gold, predicted in samples
    ]
    for cls in classes:
        tp = sum(1 for g, p in matched if cls.name in g and cls.name in p)
        fn = sum(1 for g, p in matched if cls.name in g and cls.name not in p)
        fp = sum(1 for g, p in matched if cls.name not in g and cls.name in p)
        precision, recall, f1 = prf_from_counts(tp, fp, fn)
        rows.append(
            KeywordPRFRow(
                name=cls.name, tp=tp, fp=fp, fn=fn,
                precision=precision, recall=recall, f1=f1,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Attribution grounding
# ---------------------------------------------------------------------------

def verify_grounding(record: AnswerRecord, ontology: KeywordOntology) -> str:
    """Check the rationale against the retrieved passages.

    Grounded means every queried entity occurs in some retrieved passage
    and the rationale shares at least one ontology class with a passage
    that mentions an entity. Reported next to the model's own declared
    grounding (choices 1/2) to surface disagreements.
    """
    if record.answer is None or not record.entities:
        return UNSUPPORTED
    passage_norms = [(p, normalize_text(p.text)) for p in record.passages]
    for entity in record.entities:
        if not any(entity in norm for _p, norm in passage_norms):
            return UNSUPPORTED
    classes = ontology.classes_for(record.category)
    rationale_classes = match_keywords(record.answer.rationale, classes)
    if not rationale_classes:
        return UNSUPPORTED
    for passage, norm in passage_norms:
        if not any(entity in norm for entity in record.entities):
            continue
        if rationale_classes & match_keywords(passage.text, classes):
            return VERIFIED_GROUNDED
    return UNSUPPORTED


# ---------------------------------------------------------------------------
# Evaluation harness
# ---------------------------------------------------------------------------

@dataclass
class CategoryReport:
    label: str
    n: int
    accuracy: float
    macro_f1: float
    confusion: ConfusionMatrix
    four_way: list[FourWayRow]
    keyword_rows: list[KeywordPRFRow]
    parse_errors: int
    declared_grounded: int
    verified_grounded: int
    choice1_total: int
    choice1_verified: int

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.to_json(),
            "four_way": [row.to_json() for row in self.four_way],
            "keyword_prf": [row.to_json() for row in self.keyword_rows],
            "parse_errors": self.parse_errors,
            "declared_grounded": self.declared_grounded,
            "verified_grounded": self.verified_grounded,
            "choice1_total": self.choice1_total,
            "choice1_verified": self.choice1_verified,
        }


@dataclass
class EvalReport:
    overall: CategoryReport
    categories: dict[str, CategoryReport]
    sample_failures: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "overall": self.overall.to_json(),
            "categories": {k: v.to_json() for k, v in self.categories.items()},
            "sample_failures": self.sample_failures,
        }

    def to_markdown(self) -> str:
        lines = ["# Evaluation report", "", "## Judgment accuracy", ""]
        lines.append("| Category | N | Accuracy | Macro-F1 | Parse errors |")
        lines.append("|---|---|---|---|---|")
        for report in [*self.categories.values(), self.overall]:
            lines.append(
                f"| {report.label} | {report.n} | {report.accuracy:.4f} "
                f"| {report.macro_f1:.4f} | {report.parse_errors} |"
            )
        for report in self.categories.values():
            lines += ["", f"## {report.label}", ""]
            c = report.confusion
            lines.append("| | Actual contraindicated | Actual not |")
            lines.append("|---|---|---|")
            lines.append(f"| Predicted contraindicated | {c.tp} | {c.fp} |")
            lines.append(f"| Predicted not | {c.fn} | {c.tn} |")
            lines += ["", "| Type | Total | Actual contraindicated | Actual not |", "|---|---|---|---|"]
            for row in report.four_way:
                lines.append(
                    f"| ({row.choice}) | {row.total} | {row.actual_contraindicated} "
                    f"| {row.actual_not_contraindicated} |"
                )
            if report.keyword_rows:
                lines += ["", "| Keyword | TP | FP | FN | Precision | Recall | F1 |", "|---|---|---|---|---|---|---|"]
                for row in report.keyword_rows:
                    lines.append(
                        f"| {row.name} | {row.tp} | {row.fp} | {row.fn} "
                        f"| {row.precision:.4f} | {row.recall:.4f} | {row.f1:.4f} |"
                    )
            lines += [
                "",
                f"Declared grounded: {report.declared_grounded} / {report.n}; "
                f"verified grounded: {report.verified_grounded} / {report.n}; "
                f"type-1 answers verified: {report.choice1_verified} / {report.choice1_total}.",
            ]
        if self.sample_failures:
            lines += ["", "## Sample failures", ""]
            for failure in self.sample_failures:
                lines.append(f"- {failure['id']}: {failure['error']}")
        return "\n".join(lines) + "\n"

    def write(self, directory: str | Path) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        json_path = directory / "report.json"
        md_path = directory / "report.md"
        json_path.write_text(
            json.dumps(self.to_json(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        md_path.write_text(self.to_markdown(), encoding="utf-8")
        return json_path, md_path


def _score_group(
    label: str,
    scored: Sequence[tuple[QAPair, AnswerRecord, str]],
    keyword_rows: list[KeywordPRFRow],
) -> CategoryReport:
    judged = [
        (record.contraindicated, pair.gold_label == GOLD_CONTRAINDICATED)
        for pair, record, _g in scored
    ]
    confusion, accuracy, macro_f1 = confusion_and_metrics(judged)
    four_way = four_way_distribution(
        [
            (record.effective_choice, pair.gold_label == GOLD_CONTRAINDICATED)
            for pair, record, _g in scored
        ]
    )
    choice1 = [
        (record, grounding)
        for _pair, record, grounding in scored
        if record.answer is not None and record.answer.choice == 1
    ]
    return CategoryReport(
        label=label,
        n=len(scored),
        accuracy=accuracy,
        macro_f1=macro_f1,
        confusion=confusion,
        four_way=four_way,
        keyword_rows=keyword_rows,
        parse_errors=sum(1 for _p, record, _g in scored if record.parse_error is not None),
        declared_grounded=sum(
            1
            for _p, record, _g in scored
            if record.answer is not None and record.answer.declared_grounded
        ),
        verified_grounded=sum(1 for _p, _r, g in scored if g == VERIFIED_GROUNDED),
        choice1_total=len(choice1),
        choice1_verified=sum(1 for _r, g in choice1 if g == VERIFIED_GROUNDED),
    )


def run_eval(
    dataset: Sequence[QAPair],
    pipeline: Pipeline,
    ontology: KeywordOntology | None = None,
) -> EvalReport:
    """Answer every dataset question and aggregate all metrics per category
    and overall. Per-sample failures are recorded and scored conservatively
    (not contraindicated, type 4) instead of aborting the run."""
    if not dataset:
        raise ValueError("dataset is empty")
    ontology = ontology or KeywordOntology.default()
    scored: list[tuple[QAPair, AnswerRecord, str]] = []
    failures: list[dict] = []
    for pair in dataset:
        try:
            record = pipeline.answer_query(pair.question)
        except DurqaError as exc:
            failures.append({"id": pair.id, "error": str(exc)})
            record = AnswerRecord(
                query=pair.question,
                entities=[],
                category=pair.category,
                passages=[],
                prompt="",
                raw="",
                answer=None,
                parse_error=f"pipeline failure: {exc}",
                backend_tag=pipeline.backend.tag,
                latency_s=0.0,
            )
        grounding = verify_grounding(record, ontology)
        scored.append((pair, record, grounding))

    categories: dict[str, CategoryReport] = {}
    for category in Category:
        group = [item for item in scored if item[0].category is category]
        if not group:
            continue
        keyword_samples = [
            (pair.gold_reason, record.answer.rationale)
            for pair, record, _g in group
            if pair.gold_label == GOLD_CONTRAINDICATED
            and record.answer is not None
            and record.contraindicated
            and not pair.exclude_rationale_eval
        ]
        keyword_rows = keyword_prf(keyword_samples, ontology.classes_for(category))
        categories[category.value] = _score_group(category.value, group, keyword_rows)
    overall = _score_group("overall", scored, [])
    return EvalReport(overall=overall, categories=categories, sample_failures=failures)
