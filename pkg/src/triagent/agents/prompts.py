"""Editing and instruction-generation prompt templates with a token budget."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

from ..errors import BudgetTooSmall, EmptyInstruction, EmptyPool
from ..types import Document, Instruction, Scenario, Summary

EDIT_TEMPLATES = {
    Scenario.CNNDM: (
        "Summary: {summary}\n"
        "Document: {document}\n"
        "Rewrite the summary for the document, {instruction}\n"
        "New summary:"
    ),
    Scenario.DEFACTO: (
        "Document: {document}\n"
        "Summary: {summary}\n"
        "Instructions: {instruction}\n"
        "Edit the summary only following the instructions and only output the corrected summary.\n"
        "New summary:"
    ),
}

_DEFACTO_TASK = "The summary may contain some factual errors, generate the instructions to correct the summary."

SHOT_TEMPLATES = {
    Scenario.CNNDM: "Document: {document}\nSummary: {summary}\nInstructions: {instruction}\n\n",
    Scenario.DEFACTO: (
        "Document: {document}\nSummary: {summary}\n" + _DEFACTO_TASK + "\nInstructions: {instruction}\n\n"
    ),
}

QUERY_TEMPLATES = {
    Scenario.CNNDM: (
        "Document: {document}\n"
        "Summary: {summary}\n"
        "The summary may not cover the salient content, generate instructions to make the summary "
        "focus on salient content. The instructions should be chosen from the following formats:\n"
        "Delete content related to __.\n"
        "Add content related to __.\n"
        "No operation is needed.\n"
        "Only output the instructions without the corrected summaries, and make the instruction conservatively.\n"
        "Instructions:"
    ),
    Scenario.DEFACTO: (
        "Document: {document}\n"
        "Summary: {summary}\n" + _DEFACTO_TASK + "\n"
        "The instructions should be chosen from the following formats:\n"
        "Remove the information about __ from the summary.\n"
        "Add the information about __ to the summary.\n"
        "Replace the information about __ with the in-formation about __.\n"
        "Modify the information about __ in the summary.\n"
        "Rewrite the summary entirely by __.\n"
        "Only output the instructions without the corrected summaries, and make the instruction conservatively.\n"
        "Instructions:"
    ),
}

DEFAULT_SHOTS = {Scenario.CNNDM: 5, Scenario.DEFACTO: 10}


def chars_div_4(text: str) -> int:
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class PromptBudget:
    limit_tokens: int = 4096
    counter: Callable[[str], int] = chars_div_4

    def __post_init__(self) -> None:
        if self.limit_tokens < 256:
            raise ValueError("limit_tokens must be >= 256")

    def fits(self, text: str) -> bool:
        return self.counter(text) <= self.limit_tokens


@dataclass(frozen=True)
class FewShotExample:
    document: str
    summary: str
    instruction: str


@dataclass(frozen=True)
class FewShotPool:
    examples: tuple[FewShotExample, ...]
    k: int = 10
    selection: str = "first_k"
    seed: int = 0
    shots: tuple[FewShotExample, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.examples:
            raise EmptyPool("few-shot pool has no examples")
        if self.selection not in ("first_k", "seeded_random"):
            raise ValueError(f"unknown selection {self.selection!r}")
        k = min(self.k, len(self.examples))
        if self.selection == "first_k":
            chosen = self.examples[:k]
        else:
            chosen = tuple(random.Random(self.seed).sample(list(self.examples), k))
        object.__setattr__(self, "shots", tuple(chosen))

    def describe(self) -> dict[str, str]:
        return {"pool_size": str(len(self.examples)), "k": str(self.k), "selection": self.selection, "seed": str(self.seed)}


def build_edit_prompt(
    scenario: Scenario | str,
    document: Document | str,
    summary: Summary | str,
    instruction: Instruction | str,
) -> str:
    scenario = Scenario(scenario)
    if isinstance(instruction, Instruction):
        instruction_text = instruction.editor_text(scenario)
    else:
        instruction_text = instruction
    if not instruction_text.strip():
        raise EmptyInstruction("edit prompt needs a non-empty instruction")
    return EDIT_TEMPLATES[scenario].format(
        document=document.text if isinstance(document, Document) else document,
        summary=summary.text if isinstance(summary, Summary) else summary,
        instruction=instruction_text,
    )


def instruction_prompt_with_count(
    scenario: Scenario | str,
    document: Document | str,
    summary: Summary | str,
    pool: FewShotPool | None,
    budget: PromptBudget | None = None,
) -> tuple[str, int]:
    """Build the instruction-generation prompt; also return how many shots survived the budget.

    Trailing shots are dropped until the whole prompt fits. ``pool=None`` gives a
    zero-shot prompt.
    """
    scenario = Scenario(scenario)
    budget = budget or PromptBudget()
    query = QUERY_TEMPLATES[scenario].format(
        document=document.text if isinstance(document, Document) else document,
        summary=summary.text if isinstance(summary, Summary) else summary,
    )
    if not budget.fits(query):
        raise BudgetTooSmall(
            f"query block alone needs {budget.counter(query)} tokens, limit is {budget.limit_tokens}"
        )
    blocks = [
        SHOT_TEMPLATES[scenario].format(document=ex.document, summary=ex.summary, instruction=ex.instruction)
        for ex in (pool.shots if pool is not None else ())
    ]
    while blocks and not budget.fits("".join(blocks) + query):
        blocks.pop()
    return "".join(blocks) + query, len(blocks)


def build_instruction_prompt(
    scenario: Scenario | str,
    document: Document | str,
    summary: Summary | str,
    pool: FewShotPool | None,
    budget: PromptBudget | None = None,
) -> str:
    return instruction_prompt_with_count(scenario, document, summary, pool, budget)[0]
