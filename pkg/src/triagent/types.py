"""Canonical value types: documents, summaries, instructions, records, traces."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .errors import EmptyDocument, InvalidOps
from .text import normalize_text, split_sentences


class Scenario(str, enum.Enum):
    DEFACTO = "defacto"
    CNNDM = "cnndm"


class Origin(str, enum.Enum):
    INITIAL = "initial"
    EDITED = "edited"
    REFERENCE = "reference"
    HUMAN_EDITED = "human_edited"


class InstructionKind(str, enum.Enum):
    FREE_TEXT = "free_text"
    KEYWORD_OPS = "keyword_ops"


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    sentences: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text:
            raise EmptyDocument(f"document {self.id!r} has empty text")
        if not self.sentences:
            object.__setattr__(self, "sentences", tuple(split_sentences(self.text)))

    @classmethod
    def from_text(cls, id: str, text: str) -> Document:
        return cls(id=id, text=normalize_text(text))


@dataclass(frozen=True)
class Summary:
    text: str
    origin: Origin = Origin.INITIAL

    def __post_init__(self) -> None:
        # Empty edited summaries are legal; the pipeline flags them in trace metadata.
        if not self.text and self.origin in (Origin.INITIAL, Origin.REFERENCE):
            raise ValueError(f"{self.origin.value} summary must be non-empty")

    @property
    def sentences(self) -> list[str]:
        return split_sentences(self.text)


def _norm_key(keyword: str) -> str:
    return normalize_text(keyword).lower()


@dataclass(frozen=True)
class KeywordOps:
    """Structured add/remove keyword lists.

    ``leftover`` carries instruction sentences that matched no keyword template
    (e.g. DeFacto "Replace ..." forms); they are passed through to editors verbatim.
    """

    add: tuple[str, ...] = ()
    remove: tuple[str, ...] = ()
    leftover: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "add", tuple(self.add))
        object.__setattr__(self, "remove", tuple(self.remove))
        object.__setattr__(self, "leftover", tuple(self.leftover))
        for name in ("add", "remove"):
            keys = [_norm_key(k) for k in getattr(self, name)]
            if any(not k for k in keys):
                raise InvalidOps(f"empty keyword in {name} list")
            if len(set(keys)) != len(keys):
                raise InvalidOps(f"duplicate keyword in {name} list: {getattr(self, name)}")
        overlap = {_norm_key(k) for k in self.add} & {_norm_key(k) for k in self.remove}
        if overlap:
            raise InvalidOps(f"keywords both added and removed: {sorted(overlap)}")

    @property
    def is_noop(self) -> bool:
        return not self.add and not self.remove and not self.leftover

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"add": list(self.add), "remove": list(self.remove)}
        if self.leftover:
            d["leftover"] = list(self.leftover)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> KeywordOps:
        return cls(tuple(d.get("add", ())), tuple(d.get("remove", ())), tuple(d.get("leftover", ())))


@dataclass(frozen=True)
class Instruction:
    kind: InstructionKind
    text: str
    ops: KeywordOps | None = None

    def __post_init__(self) -> None:
        if self.kind is InstructionKind.KEYWORD_OPS:
            from .oracle import render_training

            if self.ops is None:
                raise ValueError("keyword_ops instruction requires ops")
            if self.text != render_training(self.ops):
                raise ValueError("instruction text must be the canonical rendering of its ops")
        elif self.ops is not None:
            raise ValueError("free_text instruction must not carry ops")

    @classmethod
    def free(cls, text: str) -> Instruction:
        return cls(InstructionKind.FREE_TEXT, normalize_text(text))

    @classmethod
    def from_ops(cls, ops: KeywordOps) -> Instruction:
        from .oracle import render_training

        return cls(InstructionKind.KEYWORD_OPS, render_training(ops), ops)

    def editor_text(self, scenario: Scenario) -> str:
        """The form shown to an editor: natural-language templates for keyword ops."""
        if self.ops is None:
            return self.text
        from .oracle import render_editor_facing

        return render_editor_facing(self.ops, scenario)

    @property
    def is_noop(self) -> bool:
        from .oracle import NOOP_TEXT

        if self.ops is not None:
            return self.ops.is_noop
        return self.text.strip().lower() == NOOP_TEXT.lower()

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value, "text": self.text}
        if self.ops is not None:
            d["ops"] = self.ops.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Instruction:
        ops = KeywordOps.from_dict(d["ops"]) if d.get("ops") is not None else None
        return cls(InstructionKind(d["kind"]), d["text"], ops)


@dataclass(frozen=True)
class DatasetRecord:
    document: Document
    reference: Summary
    initial: Summary
    scenario: Scenario
    human_instruction: Instruction | None = None
    human_edited: Summary | None = None

    def __post_init__(self) -> None:
        from .errors import SchemaViolation

        if self.scenario is Scenario.DEFACTO:
            if self.human_instruction is None:
                raise SchemaViolation(f"defacto record {self.id!r} lacks a human instruction")
            if self.human_edited is None:
                raise SchemaViolation(f"defacto record {self.id!r} lacks a human-edited summary")

    @property
    def id(self) -> str:
        return self.document.id

    def with_initial(self, summary: Summary) -> DatasetRecord:
        """Copy of this record that starts from ``summary`` (iterative editing)."""
        return DatasetRecord(
            document=self.document,
            reference=self.reference,
            initial=summary,
            scenario=self.scenario,
            human_instruction=self.human_instruction,
            human_edited=self.human_edited,
        )


@dataclass(frozen=True)
class RewardWeights:
    alpha: float = 0.5
    beta: float = 0.5
    rouge_mix: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rouge_mix", tuple(float(x) for x in self.rouge_mix))
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("weights need alpha, beta >= 0 and alpha + beta > 0")
        if len(self.rouge_mix) != 3 or any(x < 0 for x in self.rouge_mix):
            raise ValueError("rouge_mix must be three non-negative reals")
        if abs(sum(self.rouge_mix) - 1.0) > 1e-9:
            raise ValueError(f"rouge_mix must sum to 1, got {sum(self.rouge_mix)}")

    def scaled(self, c: float) -> RewardWeights:
        return RewardWeights(self.alpha * c, self.beta * c, self.rouge_mix)

    def to_dict(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "beta": self.beta, "rouge_mix": list(self.rouge_mix)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RewardWeights:
        mix = d.get("rouge_mix", (1 / 3, 1 / 3, 1 / 3))
        return cls(float(d.get("alpha", 0.5)), float(d.get("beta", 0.5)), tuple(mix))


@dataclass(frozen=True)
class EditTrace:
    record_id: str
    iteration: int
    instruction: Instruction
    edit_prompt: str
    edited: Summary
    score_before: Any  # ScoreCard; typed loosely to avoid an import cycle
    score_after: Any
    reward: float
    instruction_prompt: str | None = None
    backend_meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.iteration < 1:
            raise ValueError("iteration numbers start at 1")
        expected = self.score_after.f_value - self.score_before.f_value
        if abs(self.reward - expected) > 1e-9:
            raise ValueError(f"reward {self.reward} != f(after) - f(before) = {expected}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "record_id": self.record_id,
            "iteration": self.iteration,
            "instruction": self.instruction.to_dict(),
            "instruction_prompt": self.instruction_prompt,
            "edit_prompt": self.edit_prompt,
            "edited": {"text": self.edited.text, "origin": self.edited.origin.value},
            "score_before": self.score_before.to_dict(),
            "score_after": self.score_after.to_dict(),
            "reward": self.reward,
            "backend_meta": dict(self.backend_meta),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> EditTrace:
        from .reward import ScoreCard

        edited = d["edited"]
        summary = Summary(edited["text"], Origin(edited.get("origin", "edited")))
        return cls(
            record_id=str(d["record_id"]),
            iteration=int(d["iteration"]),
            instruction=Instruction.from_dict(d["instruction"]),
            instruction_prompt=d.get("instruction_prompt"),
            edit_prompt=d["edit_prompt"],
            edited=summary,
            score_before=ScoreCard.from_dict(d["score_before"]),
            score_after=ScoreCard.from_dict(d["score_after"]),
            reward=float(d["reward"]),
            backend_meta={str(k): str(v) for k, v in d.get("backend_meta", {}).items()},
        )
