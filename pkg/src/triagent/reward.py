"""Summary scoring f(S) and the editor-steered reward f(S_edit) - f(S_init)."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import EmptyReference
from .metrics import (
    EntityExtractor,
    KnowledgeScore,
    RougeScore,
    extract_entities,
    knowledge_f1,
    rouge_l,
    rouge_n,
)
from .text import tokenize
from .types import RewardWeights, Summary

# name -> callable(document_text, summary_text) -> float, e.g. DAE or QFE
ExternalScorer = Callable[[str, str], float]


@dataclass(frozen=True)
class ScoreCard:
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    knowledge: KnowledgeScore
    f_value: float
    weights: RewardWeights
    external: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "rouge1": self.rouge1.to_dict(),
            "rouge2": self.rouge2.to_dict(),
            "rougeL": self.rougeL.to_dict(),
            "knowledge": self.knowledge.to_dict(),
            "f_value": self.f_value,
            "weights": self.weights.to_dict(),
        }
        if self.external:
            d["external"] = dict(self.external)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ScoreCard:
        return cls(
            rouge1=RougeScore.from_dict(d["rouge1"]),
            rouge2=RougeScore.from_dict(d["rouge2"]),
            rougeL=RougeScore.from_dict(d["rougeL"]),
            knowledge=KnowledgeScore.from_dict(d["knowledge"]),
            f_value=float(d["f_value"]),
            weights=RewardWeights.from_dict(d["weights"]),
            external={k: float(v) for k, v in d.get("external", {}).items()},
        )


def f_value(r1: float, r2: float, rl: float, knowledge: float, weights: RewardWeights) -> float:
    m1, m2, ml = weights.rouge_mix
    return weights.alpha * (m1 * r1 + m2 * r2 + ml * rl) + weights.beta * knowledge


@dataclass(frozen=True)
class Scorer:
    """Bundles the knobs that must be identical for every summary in a run."""

    weights: RewardWeights = field(default_factory=RewardWeights)
    stem: bool = False
    extractor: str = "heuristic"
    external_extractor: EntityExtractor | None = None
    external_scorers: Mapping[str, ExternalScorer] = field(default_factory=dict)

    def score(self, summary: Summary | str, reference: Summary | str, document: str | None = None) -> ScoreCard:
        return score_summary(
            summary,
            reference,
            self.weights,
            stem=self.stem,
            extractor=self.extractor,
            external_extractor=self.external_extractor,
            external_scorers=self.external_scorers,
            document=document,
        )


def _text(s: Summary | str) -> str:
    return s.text if isinstance(s, Summary) else s


def score_summary(
    summary: Summary | str,
    reference: Summary | str,
    weights: RewardWeights,
    *,
    stem: bool = False,
    extractor: str = "heuristic",
    external_extractor: EntityExtractor | None = None,
    external_scorers: Mapping[str, ExternalScorer] | None = None,
    document: str | None = None,
) -> ScoreCard:
    summary_text, reference_text = _text(summary), _text(reference)
    if not reference_text.strip():
        raise EmptyReference("reference summary is empty")
    cand = tokenize(summary_text, stem=stem)
    ref = tokenize(reference_text, stem=stem)
    r1, r2, rl = rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)
    knowledge = knowledge_f1(
        extract_entities(summary_text, extractor, external_extractor),
        extract_entities(reference_text, extractor, external_extractor),
    )
    external = {}
    if external_scorers:
        external = {name: float(fn(document or "", summary_text)) for name, fn in external_scorers.items()}
    return ScoreCard(
        rouge1=r1,
        rouge2=r2,
        rougeL=rl,
        knowledge=knowledge,
        f_value=f_value(r1.f1, r2.f1, rl.f1, knowledge.f1, weights),
        weights=weights,
        external=external,
    )


def compute_reward(
    initial: Summary | str,
    edited: Summary | str,
    reference: Summary | str,
    weights: RewardWeights,
    **kwargs: Any,
) -> float:
    """f(edited) - f(initial); unclipped, may be negative."""
    before = score_summary(initial, reference, weights, **kwargs)
    after = score_summary(edited, reference, weights, **kwargs)
    return after.f_value - before.f_value


def rescore(card: ScoreCard, weights: RewardWeights) -> float:
    """f_value of an existing score card under different weights."""
    return f_value(card.rouge1.f1, card.rouge2.f1, card.rougeL.f1, card.knowledge.f1, weights)

