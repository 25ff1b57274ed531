"""Generator, instructor and editor agents behind one small contract each."""

from __future__ import annotations

import logging
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Protocol

from ..errors import TriagentError, UnparseableInstruction
from ..oracle import build_keyword_oracle, parse_instruction
from ..text import normalize_text
from ..types import DatasetRecord, Instruction, KeywordOps, Origin, Scenario, Summary
from .backends import Backend, CompletionRequest
from .mock import apply_ops
from .prompts import FewShotPool, PromptBudget, build_edit_prompt, instruction_prompt_with_count

log = logging.getLogger(__name__)

_ECHO = re.compile(r"^\s*new summary\s*:\s*", re.IGNORECASE)


@dataclass
class InstructorOutput:
    instruction: Instruction
    prompt: str | None = None
    meta: dict[str, str] = field(default_factory=dict)


@dataclass
class EditorOutput:
    summary: Summary
    prompt: str
    meta: dict[str, str] = field(default_factory=dict)


class Instructor(Protocol):
    name: str

    def instruct(self, record: DatasetRecord, iteration: int = 1) -> InstructorOutput: ...


class Editor(Protocol):
    name: str

    def edit(self, record: DatasetRecord, instruction: Instruction) -> EditorOutput: ...


class OracleInstructor:
    """Keyword oracle computed from the reference summary."""

    name = "oracle"

    def instruct(self, record: DatasetRecord, iteration: int = 1) -> InstructorOutput:
        ops = build_keyword_oracle(record.initial, record.reference, record.document)
        return InstructorOutput(Instruction.from_ops(ops), meta={"instructor": self.name})


class HumanInstructor:
    """Replays the record's human-written instruction on the first pass, then no-ops."""

    name = "human"

    def instruct(self, record: DatasetRecord, iteration: int = 1) -> InstructorOutput:
        if record.human_instruction is None:
            raise TriagentError(f"record {record.id!r} has no human instruction")
        if iteration > 1:
            return InstructorOutput(Instruction.from_ops(KeywordOps()), meta={"instructor": self.name})
        return InstructorOutput(record.human_instruction, meta={"instructor": self.name})


class ScriptedInstructor:
    """Fixed instruction texts per record id, one entry per iteration."""

    name = "scripted"

    def __init__(self, script: Mapping[str, str | Sequence[str]]) -> None:
        self.script = {k: [v] if isinstance(v, str) else list(v) for k, v in script.items()}

    def instruct(self, record: DatasetRecord, iteration: int = 1) -> InstructorOutput:
        texts = self.script.get(record.id)
        if not texts:
            raise TriagentError(f"no scripted instruction for record {record.id!r}")
        text = texts[min(iteration, len(texts)) - 1]
        return InstructorOutput(Instruction.free(text), meta={"instructor": self.name})


class LLMInstructor:
    """Few-shot prompted instruction generation through a completion backend."""

    name = "llm"

    def __init__(
        self,
        backend: Backend,
        scenario: Scenario | str,
        pool: FewShotPool | None = None,
        budget: PromptBudget | None = None,
        max_tokens: int = 128,
        temperature: float = 0.0,
    ) -> None:
        self.backend = backend
        self.scenario = Scenario(scenario)
        self.pool = pool
        self.budget = budget or PromptBudget()
        self.max_tokens = max_tokens
        self.temperature = temperature

    def instruct(self, record: DatasetRecord, iteration: int = 1) -> InstructorOutput:
        prompt, shots = instruction_prompt_with_count(
            self.scenario, record.document, record.initial, self.pool, self.budget
        )
        completion = self.backend.complete(CompletionRequest(prompt, self.max_tokens, self.temperature))
        meta = {f"instructor_{k}": v for k, v in completion.meta.items()}
        meta.update(instructor=self.name, shots=str(shots))
        if self.pool is not None:
            meta.update({f"pool_{k}": v for k, v in self.pool.describe().items()})
        text = normalize_text(completion.text)
        if not text:
            log.warning("record %s: instructor returned empty text; treating as no-op", record.id)
            return InstructorOutput(Instruction.from_ops(KeywordOps()), prompt, {**meta, "warning": "empty instruction"})
        return InstructorOutput(Instruction.free(text), prompt, meta)


def instruction_ops(instruction: Instruction) -> KeywordOps | None:
    """Structured ops for an instruction, or None when its text has no recognizable form."""
    if instruction.ops is not None:
        return instruction.ops
    try:
        return parse_instruction(instruction.text)
    except UnparseableInstruction:
        return None


class MockEditor:
    """Rule-based editor: honors add/remove keyword ops, ignores everything else."""

    name = "mock"

    def edit(self, record: DatasetRecord, instruction: Instruction) -> EditorOutput:
        prompt = build_edit_prompt(record.scenario, record.document, record.initial, instruction)
        meta = {"editor": self.name}
        ops = instruction_ops(instruction)
        if ops is None:
            meta["warning"] = "unparseable instruction; summary left unchanged"
            return EditorOutput(Summary(record.initial.text, Origin.EDITED), prompt, meta)
        text, skipped = apply_ops(record.document, record.initial.text, ops)
        if skipped:
            meta["ungrounded_add"] = "; ".join(skipped)
        return EditorOutput(Summary(text, Origin.EDITED), prompt, meta)


class LLMEditor:
    """Edits through a completion backend; strips an echoed "New summary:" cue."""

    name = "llm"

    def __init__(self, backend: Backend, max_tokens: int = 512, temperature: float = 0.0) -> None:
        self.backend = backend
        self.max_tokens = max_tokens
        self.temperature = temperature

    def edit(self, record: DatasetRecord, instruction: Instruction) -> EditorOutput:
        prompt = build_edit_prompt(record.scenario, record.document, record.initial, instruction)
        completion = self.backend.complete(CompletionRequest(prompt, self.max_tokens, self.temperature))
        text = normalize_text(_ECHO.sub("", completion.text, count=1))
        meta = {f"editor_{k}": v for k, v in completion.meta.items()}
        meta.update(editor=self.name, raw_output=completion.text)
        return EditorOutput(Summary(text, Origin.EDITED), prompt, meta)


GENERATOR_TEMPLATE = "Document: {document}\nSummarize the document.\nSummary:"


class LLMGenerator:
    """Produces an initial summary for a document through a completion backend."""

    name = "llm"

    def __init__(self, backend: Backend, template: str = GENERATOR_TEMPLATE, max_tokens: int = 256) -> None:
        self.backend = backend
        self.template = template
        self.max_tokens = max_tokens

    def generate(self, record: DatasetRecord) -> DatasetRecord:
        prompt = self.template.format(document=record.document.text)
        completion = self.backend.complete(CompletionRequest(prompt, self.max_tokens, 0.0))
        text = normalize_text(_ECHO.sub("", completion.text, count=1))
        if not text:
            raise TriagentError(f"record {record.id!r}: generator returned an empty summary")
        return record.with_initial(Summary(text, Origin.INITIAL))
