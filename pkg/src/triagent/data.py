"""JSON-lines dataset ingestion and canonical serialization."""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

from .errors import DuplicateRecord, EmptyDocument, MissingField, SchemaViolation
from .text import normalize_text
from .types import DatasetRecord, Document, Instruction, Origin, Scenario, Summary

CANONICAL_FIELDS = ("id", "document", "reference", "initial_summary", "instruction", "edited_summary")


def _remap(raw: Mapping[str, Any], field_map: Mapping[str, str] | None) -> dict[str, Any]:
    if not field_map:
        return dict(raw)
    out: dict[str, Any] = {}
    for key, value in raw.items():
        out[field_map.get(key, key)] = value
    return out


def _text(data: Mapping[str, Any], name: str, required: bool) -> str | None:
    value = data.get(name)
    if value is None:
        if required:
            raise MissingField(name)
        return None
    if isinstance(value, list):  # some releases store highlights as a sentence list
        value = " ".join(str(v) for v in value)
    return normalize_text(str(value))


def parse_dataset_record(
    raw: Mapping[str, Any],
    scenario: Scenario | str,
    field_map: Mapping[str, str] | None = None,
    default_id: str | None = None,
) -> DatasetRecord:
    """Validate one decoded JSON-lines row and build a :class:`DatasetRecord`.

    ``field_map`` renames source fields to the canonical names in
    :data:`CANONICAL_FIELDS` before validation.
    """
    scenario = Scenario(scenario)
    data = _remap(raw, field_map)

    record_id = data.get("id", default_id)
    if record_id is None:
        raise MissingField("id")
    document_text = _text(data, "document", required=True)
    if not document_text:
        raise EmptyDocument(f"record {record_id!r}: document is empty")
    reference = _text(data, "reference", required=True)
    initial = _text(data, "initial_summary", required=True)
    if not reference:
        raise SchemaViolation(f"record {record_id!r}: reference summary is empty")
    if not initial:
        raise SchemaViolation(f"record {record_id!r}: initial summary is empty")
    instruction = _text(data, "instruction", required=False)
    edited = _text(data, "edited_summary", required=False)

    if scenario is Scenario.DEFACTO:
        if not instruction:
            raise SchemaViolation(f"defacto record {record_id!r} lacks a human instruction")
        if edited is None:
            raise SchemaViolation(f"defacto record {record_id!r} lacks a human-edited summary")

    return DatasetRecord(
        document=Document(id=str(record_id), text=document_text),
        reference=Summary(reference, Origin.REFERENCE),
        initial=Summary(initial, Origin.INITIAL),
        scenario=scenario,
        human_instruction=Instruction.free(instruction) if instruction else None,
        human_edited=Summary(edited, Origin.HUMAN_EDITED) if edited is not None else None,
    )


def serialize_record(record: DatasetRecord) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": record.id,
        "document": record.document.text,
        "reference": record.reference.text,
        "initial_summary": record.initial.text,
    }
    if record.human_instruction is not None:
        out["instruction"] = record.human_instruction.text
    if record.human_edited is not None:
        out["edited_summary"] = record.human_edited.text
    return out


def load_dataset(
    path: str | Path,
    scenario: Scenario | str,
    field_map: Mapping[str, str] | None = None,
) -> list[DatasetRecord]:
    """Load a JSON-lines dataset; ids default to the 1-based line number.

    Raises :class:`DuplicateRecord` when two rows share an id.
    """
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"{path}:{line_no}: invalid JSON ({exc})") from exc
            record = parse_dataset_record(raw, scenario, field_map, default_id=str(line_no))
            if record.id in seen:
                raise DuplicateRecord(f"{path}:{line_no}: duplicate record id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return records


def write_dataset(path: str | Path, records: Iterable[DatasetRecord]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(serialize_record(record), ensure_ascii=False) + "\n")
