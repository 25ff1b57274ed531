"""Deterministic rule-based editor used for hermetic tests and the RL environment."""

from __future__ import annotations

import re

from ..metrics import contains_keyword, keyword_spans
from ..text import join_sentences, split_sentences
from ..types import Document, KeywordOps, Origin, Summary


def apply_ops(document: Document, summary_text: str, ops: KeywordOps) -> tuple[str, list[str]]:
    """Edit ``summary_text`` by sentence-level keyword rules.

    Returns the new text and the add-keywords that could not be grounded in the
    document. Empty ops return the input unchanged, byte for byte.
    """
    if not ops.add and not ops.remove:
        return summary_text, []
    sentences = split_sentences(summary_text)
    kept = [s for s in sentences if not any(contains_keyword(s, kw) for kw in ops.remove)]
    if sentences and not kept and not _groundable(document, ops):
        # Dropping every sentence would leave nothing; cut the keyword phrases instead.
        kept = [t for t in (_strip_keywords(s, ops.remove) for s in sentences) if t]
    skipped = []
    for kw in ops.add:
        if any(contains_keyword(s, kw) for s in kept):
            continue
        for sentence in document.sentences:
            if (
                sentence not in kept
                and contains_keyword(sentence, kw)
                and not any(contains_keyword(sentence, r) for r in ops.remove)
            ):
                kept.append(sentence)
                break
        else:
            skipped.append(kw)
    return join_sentences(kept), skipped


_SPACE_BEFORE_PUNCT = re.compile(r"\s+([,.;:!?])")


def _strip_keywords(sentence: str, keywords: tuple[str, ...]) -> str:
    for kw in keywords:
        for start, end in reversed(keyword_spans(sentence, kw)):
            sentence = sentence[:start] + sentence[end:]
    sentence = _SPACE_BEFORE_PUNCT.sub(r"\1", " ".join(sentence.split()))
    return sentence.strip(" ,;:")


def _groundable(document: Document, ops: KeywordOps) -> bool:
    return any(
        contains_keyword(s, kw) and not any(contains_keyword(s, r) for r in ops.remove)
        for kw in ops.add
        for s in document.sentences
    )


def mock_edit(document: Document, summary: Summary, ops: KeywordOps) -> Summary:
    """Drop summary sentences mentioning a remove-keyword; append the first document
    sentence mentioning each missing add-keyword.

    When removal would empty the summary and no add-keyword can be grounded, the
    remove-keyword phrases are cut out of their sentences instead.
    """
    text, _ = apply_ops(document, summary.text, ops)
    return Summary(text, Origin.EDITED)
