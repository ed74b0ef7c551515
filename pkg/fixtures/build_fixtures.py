"""Regenerate qa_fixture.jsonl from the fixture CSVs and safe-drug list.

Ten contraindicated entries per category (chosen to cover every ontology
class) plus the thirty safe drugs give the 60-pair evaluation fixture.
"""
from pathlib import Path

from durqa.corpus import (
    Category,
    generate_qa_pairs,
    load_safe_drugs,
    parse_dur_csv,
    save_qa_dataset,
)

HERE = Path(__file__).parent

QA_ENTRY_IDS = {
    "PRG001", "PRG002", "PRG006", "PRG008", "PRG012",
    "PRG014", "PRG016", "PRG018", "PRG020", "PRG021",
    "PED001", "PED003", "PED005", "PED007", "PED009",
    "PED011", "PED013", "PED015", "PED017", "PED019",
    "DDI001", "DDI002", "DDI005", "DDI007", "DDI009",
    "DDI011", "DDI013", "DDI015", "DDI017", "DDI019",
}


def main() -> None:
    entries = []
    for category in Category:
        path = HERE / f"{category.value}.csv"
        entries.extend(parse_dur_csv(path.read_bytes(), category))
    picked = [e for e in entries if e.id in QA_ENTRY_IDS]
    assert len(picked) == 30, f"expected 30 picked entries, got {len(picked)}"
    safe = load_safe_drugs(HERE / "safe_drugs.json")
    pairs = generate_qa_pairs(picked, safe)
    assert len(pairs) == 60, f"expected 60 QA pairs, got {len(pairs)}"
    save_qa_dataset(pairs, HERE / "qa_fixture.jsonl")
    print(f"wrote {len(pairs)} pairs to {HERE / 'qa_fixture.jsonl'}")


if __name__ == "__main__":
    main()
