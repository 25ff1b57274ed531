"""Synthetic coverage-editing corpus with a known optimal edit.

Each document sentence mentions exactly one two-word person name and nothing
else capitalized. The reference covers the lead sentences' entities, so an
entity belongs in the summary exactly when it appears in the document lead.
The initial summary keeps some lead entities and mixes in distractors.
"""

from __future__ import annotations

import random

from .types import DatasetRecord, Document, Origin, Scenario, Summary

FIRST = (
    "Alice Bruno Carla Dmitri Elena Farid Greta Hugo Ines Jonas Keiko Lars Mira Nadia Omar "
    "Paula Quentin Rosa Sven Tariq Uma Viktor Wanda Xavier Yusuf Zora"
).split()
LAST = (
    "Abbott Brennan Castillo Dorsey Ellison Fairchild Garrido Holloway Iverson Jaramillo Kowalski "
    "Lindqvist Moreau Nakamura Okafor Petrov Quiroga Rasmussen Sokolov Thornton Underwood Valdez "
    "Whitfield Yamada Zeller"
).split()
DOC_PREDICATES = (
    "announced a new plan for the regional water supply",
    "was appointed to lead the review of school funding",
    "criticized the decision to close the rural clinic",
    "won the local election by a narrow margin",
    "testified about the collapse of the old bridge",
    "signed an agreement to expand the harbor",
    "warned that the drought could last another year",
    "opened a shelter for families displaced by the flood",
    "resigned after questions about the budget",
    "proposed a tax on empty apartments",
    "led the search for the missing hikers",
    "defended the new parking rules at the meeting",
)
REF_PREDICATES = (
    "is at the center of the story",
    "played a key role in the events",
    "was named in the official statement",
    "spoke to reporters on the day",
)


def make_names(rng: random.Random, n: int) -> list[str]:
    firsts = rng.sample(FIRST, n)
    lasts = rng.sample(LAST, n)
    return [f"{f} {l}" for f, l in zip(firsts, lasts)]


def make_record(
    rng: random.Random,
    record_id: str,
    *,
    n_entities: tuple[int, int] = (6, 10),
    lead: int = 3,
    ungrounded_prob: float = 0.0,
) -> DatasetRecord:
    n = rng.randint(*n_entities)
    names = make_names(rng, n + 1)
    doc_names, spare = names[:n], names[n]
    doc_sentences = [f"{name} {rng.choice(DOC_PREDICATES)}." for name in doc_names]
    lead_names = doc_names[:lead]
    tail_names = doc_names[lead:]

    ref_names = list(lead_names)
    if rng.random() < ungrounded_prob:
        ref_names.append(spare)  # in the reference but nowhere in the document
    reference = " ".join(f"{name} {rng.choice(REF_PREDICATES)}." for name in ref_names)

    kept = [s for s in doc_sentences[:lead] if rng.random() < 0.5]
    distractors = rng.sample(doc_sentences[lead:], k=min(len(tail_names), rng.randint(0, 2)))
    initial_sentences = kept + distractors
    if not initial_sentences:
        initial_sentences = [rng.choice(doc_sentences)]
    rng.shuffle(initial_sentences)
    return DatasetRecord(
        document=Document(id=record_id, text=" ".join(doc_sentences)),
        reference=Summary(reference, Origin.REFERENCE),
        initial=Summary(" ".join(initial_sentences), Origin.INITIAL),
        scenario=Scenario.CNNDM,
    )


def make_corpus(n_records: int, seed: int = 0, **kwargs) -> list[DatasetRecord]:
    rng = random.Random(seed)
    return [make_record(rng, f"syn-{seed}-{i:04d}", **kwargs) for i in range(n_records)]
