import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagent.data import load_dataset, parse_dataset_record, serialize_record, write_dataset
from triagent.errors import DuplicateRecord, EmptyDocument, MissingField, SchemaViolation
from triagent.text import join_sentences, normalize_text, split_sentences, tokenize
from triagent.types import InstructionKind, Scenario

DEFACTO_ROW = {
    "id": "df-1",
    "article": "Gunfire has been heard in Ivory Coast's city of Bouaké, a day after soldiers mutinied over pay.",
    "candidate": "Gunfire has been heard in Ivory Coast's second city of Bouaké, a day after soldiers mutinied over pay",
    "feedback": "Remove the information about second from the summary.",
    "corrected": "Gunfire has been heard in Ivory Coast city of Bouaké, a day after soldiers mutinied over pay.",
}
DEFACTO_MAP = {
    "article": "document",
    "candidate": "initial_summary",
    "feedback": "instruction",
    "corrected": "edited_summary",
}


def test_defacto_row_with_field_map_populates_human_instruction():
    raw = dict(DEFACTO_ROW, reference=DEFACTO_ROW["corrected"])
    rec = parse_dataset_record(raw, "defacto", DEFACTO_MAP)
    assert rec.scenario is Scenario.DEFACTO
    assert rec.human_instruction.kind is InstructionKind.FREE_TEXT
    assert rec.human_instruction.text == "Remove the information about second from the summary."
    assert rec.human_edited.text.startswith("Gunfire has been heard in Ivory Coast city")


def test_cnndm_row_without_instruction():
    rec = parse_dataset_record(
        {"id": "c1", "document": "A b. C d.", "reference": "A b.", "initial_summary": "C d."}, "cnndm"
    )
    assert rec.human_instruction is None and rec.human_edited is None
    assert rec.document.sentences == ("A b.", "C d.")


def test_missing_document_names_the_field():
    with pytest.raises(MissingField) as err:
        parse_dataset_record({"id": "x", "reference": "r", "initial_summary": "s"}, "cnndm")
    assert err.value.field == "document"


def test_empty_document_and_defacto_schema():
    with pytest.raises(EmptyDocument):
        parse_dataset_record({"id": "x", "document": "   ", "reference": "r", "initial_summary": "s"}, "cnndm")
    with pytest.raises(SchemaViolation):
        parse_dataset_record({"id": "x", "document": "d", "reference": "r", "initial_summary": "s"}, "defacto")


def test_whitespace_is_normalized_at_ingestion():
    rec = parse_dataset_record(
        {"id": "x", "document": "  A  b.\n\nC\td. ", "reference": "r", "initial_summary": "s"}, "cnndm"
    )
    assert rec.document.text == "A b. C d."


def test_duplicate_ids_rejected(tmp_path):
    row = {"id": "same", "document": "d", "reference": "r", "initial_summary": "s"}
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n")
    with pytest.raises(DuplicateRecord):
        load_dataset(path, "cnndm")


def test_ids_default_to_line_number(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps({"document": "d", "reference": "r", "initial_summary": "s"}) + "\n")
    assert load_dataset(path, "cnndm")[0].id == "1"


_words = st.text(alphabet="abcdefgh XYZ.", min_size=1, max_size=40).filter(lambda s: s.strip())


@settings(max_examples=150, deadline=None)
@given(doc=_words, ref=_words, init=_words, rid=st.text(alphabet="abc123", min_size=1, max_size=6))
def test_round_trip_matches_canonical_form(doc, ref, init, rid):
    raw = {"id": rid, "document": doc, "reference": ref, "initial_summary": init}
    canonical = {k: normalize_text(v) for k, v in raw.items()}
    assert serialize_record(parse_dataset_record(raw, "cnndm")) == canonical


def test_write_then_load_round_trip(tmp_path):
    raw = dict(DEFACTO_ROW, reference=DEFACTO_ROW["corrected"])
    rec = parse_dataset_record(raw, "defacto", DEFACTO_MAP)
    write_dataset(tmp_path / "o.jsonl", [rec])
    assert load_dataset(tmp_path / "o.jsonl", "defacto") == [rec]


# --- text --------------------------------------------------------------------


def test_tokenize_examples():
    assert tokenize("The cat sat.") == ["the", "cat", "sat"]
    assert tokenize("") == []
    assert tokenize("U.S. economy") == ["u", "s", "economy"]
    assert tokenize("U.S. economy", strip_punct=False) == ["u", ".", "s", ".", "economy"]


def test_sentence_split_abbreviations():
    text = "Mr. Smith went to Washington. He met Dr. Jones in the U.S. Senate. It rained!"
    assert split_sentences(text) == [
        "Mr. Smith went to Washington.",
        "He met Dr. Jones in the U.S. Senate.",
        "It rained!",
    ]
    assert split_sentences("pay was 3.5 percent. then nothing") == ["pay was 3.5 percent. then nothing"]


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="AbC d.!?", max_size=60))
def test_sentence_split_is_deterministic_and_lossless(text):
    text = normalize_text(text)
    first, second = split_sentences(text), split_sentences(text)
    assert first == second
    assert join_sentences(first) == text
