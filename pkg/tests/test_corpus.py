import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from durqa.corpus import (
    CSV_HEADERS,
    Category,
    ContraindicationEntry,
    QAPair,
    QuestionTemplates,
    chunk_corpus,
    chunk_entry,
    entity_preamble,
    generate_qa_pairs,
    load_qa_dataset,
    parse_dur_csv,
    render_entry_text,
    save_qa_dataset,
    serialize_dur_csv,
)
from durqa.errors import CsvRowError, CsvSchemaError, DatasetError, TemplateError
from durqa.tokenizer import count_tokens

PED_HEADER = "id,drug_name,ingredient,manufacturer,age_rule,reason\n"
DDI_HEADER = "id,drug_name_a,ingredient_a,manufacturer_a,drug_name_b,ingredient_b,manufacturer_b,reason\n"


def make_entry(
    category=Category.PREGNANCY,
    reason="Animal studies showed harm to the fetus.",
    grade=None,
    age_rule=None,
    entry_id="E001",
):
    if category is Category.DDI:
        return ContraindicationEntry(
            id=entry_id,
            category=category,
            drug_names=("Alpharin", "Betazol"),
            ingredients=("alphain", "betain"),
            manufacturers=("Acme", "Borix"),
            reason_text=reason,
        )
    return ContraindicationEntry(
        id=entry_id,
        category=category,
        drug_names=("Adone",),
        ingredients=("amiodarone",),
        manufacturers=("Acme",),
        reason_text=reason,
        grade=grade,
        age_rule=age_rule,
    )


# ---------------------------------------------------------------------------
# Entry invariants
# ---------------------------------------------------------------------------

def test_ddi_requires_two_drugs():
    with pytest.raises(ValueError):
        ContraindicationEntry(
            id="X", category=Category.DDI, drug_names=("OnlyOne",),
            ingredients=("i",), manufacturers=("m",), reason_text="r",
        )


def test_single_category_rejects_two_drugs():
    with pytest.raises(ValueError):
        ContraindicationEntry(
            id="X", category=Category.PEDIATRIC, drug_names=("A", "B"),
            ingredients=("i", "j"), manufacturers=("m", "n"), reason_text="r",
        )


def test_grade_outside_range_rejected():
    with pytest.raises(ValueError):
        make_entry(grade=3)


def test_grade_on_pediatric_rejected():
    with pytest.raises(ValueError):
        ContraindicationEntry(
            id="X", category=Category.PEDIATRIC, drug_names=("A",),
            ingredients=("i",), manufacturers=("m",), reason_text="r", grade=1,
        )


def test_empty_reason_rejected():
    with pytest.raises(ValueError):
        make_entry(reason="   ")


# ---------------------------------------------------------------------------
# CSV parsing
# ---------------------------------------------------------------------------

def test_parse_pediatric_row():
    csv_bytes = (
        PED_HEADER
        + 'T1,Tracan,tramadol,Haeun Pharm,under 12 years,"life-threatening respiratory depression and death in children"\n'
    ).encode()
    entries = parse_dur_csv(csv_bytes, Category.PEDIATRIC)
    assert len(entries) == 1
    entry = entries[0]
    assert entry.category is Category.PEDIATRIC
    assert entry.age_rule == "under 12 years"
    assert "respiratory depression" in entry.reason_text


def test_header_only_file_gives_empty_list():
    assert parse_dur_csv(PED_HEADER.encode(), Category.PEDIATRIC) == []


def test_ddi_identical_pair_is_row_error():
    csv_bytes = (DDI_HEADER + "D1,Samezol,a,m1,Samezol,b,m2,reason text\n").encode()
    with pytest.raises(CsvRowError) as exc_info:
        parse_dur_csv(csv_bytes, Category.DDI)
    assert exc_info.value.line == 2


def test_header_mismatch_names_missing_column():
    bad = "id,drug_name,ingredient,manufacturer,reason\nX,A,i,m,r\n".encode()
    with pytest.raises(CsvSchemaError) as exc_info:
        parse_dur_csv(bad, Category.PEDIATRIC)
    assert "age_rule" in str(exc_info.value)


def test_empty_drug_name_reports_line_number():
    csv_bytes = (
        PED_HEADER
        + "P1,Goodrin,i,m,under 2 years,fine reason\n"
        + "P2,,i,m,under 2 years,fine reason\n"
    ).encode()
    with pytest.raises(CsvRowError) as exc_info:
        parse_dur_csv(csv_bytes, Category.PEDIATRIC)
    assert exc_info.value.line == 3


def test_duplicate_id_rejected():
    csv_bytes = (
        PED_HEADER
        + "P1,Goodrin,i,m,,reason one\n"
        + "P1,Otherin,i,m,,reason two\n"
    ).encode()
    with pytest.raises(CsvRowError):
        parse_dur_csv(csv_bytes, Category.PEDIATRIC)


def test_row_order_preserved(fixture_entries):
    pregnancy = [e for e in fixture_entries if e.category is Category.PREGNANCY]
    assert [e.id for e in pregnancy] == sorted(e.id for e in pregnancy)


@pytest.mark.parametrize("category", list(Category))
def test_serialize_parse_round_trip(fixture_entries, category):
    entries = [e for e in fixture_entries if e.category is category]
    assert entries
    assert parse_dur_csv(serialize_dur_csv(entries, category), category) == entries


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def test_render_contains_all_fields():
    entry = make_entry(grade=2, reason="affects survival rate of offspring in animal studies")
    text = render_entry_text(entry)
    assert "Adone" in text
    assert "amiodarone" in text
    assert "2" in text
    assert "affects survival rate of offspring in animal studies" in text


def test_render_deterministic_for_identical_entries():
    a = make_entry(grade=2)
    b = make_entry(grade=2)
    assert render_entry_text(a) == render_entry_text(b)


def test_render_ddi_contains_both_drugs():
    text = render_entry_text(make_entry(category=Category.DDI))
    assert "Alpharin" in text and "Betazol" in text


# ---------------------------------------------------------------------------
# Chunking
# ---------------------------------------------------------------------------

def test_small_entry_is_single_chunk():
    chunks = chunk_entry(make_entry(), 1000)
    assert len(chunks) == 1
    assert chunks[0].text == render_entry_text(make_entry())
    assert chunks[0].chunk_id == "E001#0"


def test_long_reason_chunks_respect_budget_and_cover_text():
    rng = random.Random(7)
    words = ["risk", "severe", "reaction", "reported", "exposure", "animal", "study"]
    reason = " ".join(rng.choice(words) for _ in range(2500)) + "."
    entry = make_entry(reason=reason)
    chunks = chunk_entry(entry, 1000)
    assert len(chunks) >= 3
    for chunk in chunks:
        assert chunk.token_count <= 1000
        assert count_tokens(chunk.text) == chunk.token_count
    preamble = entity_preamble(entry)
    body = chunks[0].text + "".join(
        c.text[len(preamble) + 1:] for c in chunks[1:]
    )
    assert body == render_entry_text(entry)


def test_continuation_chunks_carry_preamble():
    reason = " ".join(f"word{i}" for i in range(300)) + "."
    entry = make_entry(reason=reason)
    chunks = chunk_entry(entry, 100)
    assert len(chunks) > 1
    preamble = entity_preamble(entry)
    for chunk in chunks[1:]:
        assert chunk.text.startswith(preamble + "\n")


def test_sentence_boundary_preferred():
    reason = "First sentence here. Second sentence follows. Third one ends."
    entry = make_entry(reason=reason)
    rendered = render_entry_text(entry)
    budget = count_tokens(rendered) - 3
    chunks = chunk_entry(entry, budget)
    assert len(chunks) >= 2
    assert chunks[0].text.rstrip().endswith(".")


def test_zero_max_tokens_is_error():
    with pytest.raises(ValueError):
        chunk_entry(make_entry(), 0)


def test_chunk_ids_unique_across_corpus(fixture_entries):
    chunks = chunk_corpus(fixture_entries, 1000)
    ids = [c.chunk_id for c in chunks]
    assert len(ids) == len(set(ids))
    entry_ids = {e.id for e in fixture_entries}
    assert all(c.entry_id in entry_ids for c in chunks)


_reason_words = st.lists(
    st.sampled_from(
        ["risk", "severe", "fatal", "reported", "exposure", "서맥", "호흡억제",
         "reaction", "infant", "study", "cardiac.", "renal,"]
    ),
    min_size=1,
    max_size=400,
)


@st.composite
def random_entries(draw):
    category = draw(st.sampled_from(list(Category)))
    reason = " ".join(draw(_reason_words))
    grade = draw(st.sampled_from([None, 1, 2])) if category is Category.PREGNANCY else None
    age_rule = "under 12 years" if category is Category.PEDIATRIC else None
    return make_entry(category=category, reason=reason, grade=grade, age_rule=age_rule)


@given(entry=random_entries(), max_tokens=st.integers(min_value=1, max_value=1200))
@settings(max_examples=150, deadline=None)
def test_chunk_budget_property(entry, max_tokens):
    for chunk in chunk_entry(entry, max_tokens):
        assert chunk.token_count <= max_tokens
        assert count_tokens(chunk.text) == chunk.token_count


# ---------------------------------------------------------------------------
# QA generation and dataset IO
# ---------------------------------------------------------------------------

def test_generate_qa_pregnancy_pair():
    entry = make_entry(grade=2, reason="affects the survival rate of offspring")
    pairs = generate_qa_pairs([entry], [])
    assert pairs[0].question == "Can a pregnant woman take Adone tablets?"
    assert pairs[0].gold_label == "contraindicated"
    assert "2" in pairs[0].gold_reason
    assert "survival rate of offspring" in pairs[0].gold_reason


def test_generate_qa_safe_drug():
    pairs = generate_qa_pairs([], [(("Narfen",), Category.PEDIATRIC)])
    assert len(pairs) == 1
    assert pairs[0].gold_label == "not_contraindicated"
    assert "not classified as age-related contraindications" in pairs[0].gold_reason


def test_generate_qa_empty_inputs():
    assert generate_qa_pairs([], []) == []


def test_generate_qa_count(fixture_entries):
    safe = [(("Safeone",), Category.PEDIATRIC), (("Safetwo", "Safethree"), Category.DDI)]
    pairs = generate_qa_pairs(fixture_entries, safe)
    assert len(pairs) == len(fixture_entries) + len(safe)


def test_template_missing_placeholder_is_error():
    templates = QuestionTemplates(pregnancy_question="Is it safe during pregnancy?")
    with pytest.raises(TemplateError):
        generate_qa_pairs([make_entry()], [], templates)


def test_load_qa_dataset_order_and_content(tmp_path):
    pairs = [
        QAPair(id=f"q{i}", category=Category.PEDIATRIC, question=f"Q{i}?",
               gold_label="not_contraindicated", gold_reason="", drugs=(f"Drug{i}",))
        for i in range(3)
    ]
    path = tmp_path / "qa.jsonl"
    save_qa_dataset(pairs, path)
    assert load_qa_dataset(path) == pairs


def test_load_qa_dataset_invalid_label(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text(
        '{"id":"x","category":"pediatric","question":"Q?","gold_label":"maybe","gold_reason":"","drugs":["A"]}\n'
    )
    with pytest.raises(DatasetError) as exc_info:
        load_qa_dataset(path)
    assert exc_info.value.line == 1


def test_load_qa_dataset_malformed_json(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text('{"id": "x"\nnot json\n')
    with pytest.raises(DatasetError):
        load_qa_dataset(path)


def test_load_qa_dataset_empty_file(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text("")
    assert load_qa_dataset(path) == []
