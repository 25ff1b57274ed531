"""Oracle keyword instructions: construction, rendering and parsing."""

from __future__ import annotations

import re

from .errors import EmptyReference, UnparseableInstruction
from .metrics import contains_keyword, heuristic_entities
from .types import Document, KeywordOps, Scenario, Summary

NOOP_TEXT = "No operation is needed."
KEYWORD_SEP = "; "

EDITOR_TEMPLATES: dict[Scenario, dict[str, str]] = {
    Scenario.CNNDM: {
        "add": "Add content related to {}.",
        "remove": "Delete content related to {}.",
    },
    Scenario.DEFACTO: {
        "add": "Add the information about {} to the summary.",
        "remove": "Remove the information about {} from the summary.",
    },
}


def _text(s: Summary | str) -> str:
    return s.text if isinstance(s, Summary) else s


def build_keyword_oracle(
    initial: Summary | str,
    reference: Summary | str,
    document: Document | str,
) -> KeywordOps:
    """Keywords to add (in the reference, absent from the initial summary, groundable in
    the document) and to remove (in the initial summary, absent from the reference)."""
    ref_text = _text(reference)
    if not ref_text.strip():
        raise EmptyReference("reference summary is empty")
    doc_text = document.text if isinstance(document, Document) else document
    initial_entities = heuristic_entities(_text(initial))
    reference_entities = heuristic_entities(ref_text)
    initial_set, reference_set = set(initial_entities), set(reference_entities)
    add = [e for e in reference_entities if e not in initial_set and contains_keyword(doc_text, e)]
    remove = [e for e in initial_entities if e not in reference_set]
    return KeywordOps(tuple(add), tuple(remove))


def render_training(ops: KeywordOps) -> str:
    """Angle-bracket form, e.g. ``<Add> chad hurst <remove> daily mail``."""
    parts = []
    if ops.add:
        parts.append("<Add> " + KEYWORD_SEP.join(ops.add))
    if ops.remove:
        parts.append("<remove> " + KEYWORD_SEP.join(ops.remove))
    parts.extend(ops.leftover)
    return " ".join(parts) if parts else NOOP_TEXT


def render_editor_facing(ops: KeywordOps, scenario: Scenario | str) -> str:
    templates = EDITOR_TEMPLATES[Scenario(scenario)]
    sentences = [templates["add"].format(k) for k in ops.add]
    sentences += [templates["remove"].format(k) for k in ops.remove]
    sentences += list(ops.leftover)
    return " ".join(sentences) if sentences else NOOP_TEXT


# --- parsing -----------------------------------------------------------------

_BRACKET = re.compile(r"<\s*(add|remove)\s*>", re.IGNORECASE)
_SENTENCE = re.compile(r"\S.*?[.!?](?=\s|$)|\S.*\S|\S")

_KEYWORD_PATTERNS = [
    (re.compile(r"add content related to (?P<kw>.+?)\.?", re.IGNORECASE), "add"),
    (re.compile(r"delete content related to (?P<kw>.+?)\.?", re.IGNORECASE), "remove"),
    (re.compile(r"add the information about (?P<kw>.+?) to the summary\.?", re.IGNORECASE), "add"),
    (re.compile(r"remove the information about (?P<kw>.+?) from the summary\.?", re.IGNORECASE), "remove"),
]
# Recognized DeFacto forms with no keyword semantics; kept verbatim as leftovers.
_PASSTHROUGH_PATTERNS = [
    re.compile(r"replace the in-?formation about .+ with the in-?formation about .+", re.IGNORECASE),
    re.compile(r"modify the information about .+ in the summary\.?", re.IGNORECASE),
    re.compile(r"rewrite the summary entirely by .+", re.IGNORECASE),
]
_NOOP = re.compile(r"no operation is needed\.?", re.IGNORECASE)


def _append(target: list[str], keyword: str) -> None:
    keyword = " ".join(keyword.split())
    if keyword and keyword.lower() not in {k.lower() for k in target}:
        target.append(keyword)


def _parse_bracketed(text: str) -> KeywordOps:
    pieces = _BRACKET.split(text)
    add: list[str] = []
    remove: list[str] = []
    # pieces = [prefix, tag, body, tag, body, ...]
    for tag, body in zip(pieces[1::2], pieces[2::2]):
        target = add if tag.lower() == "add" else remove
        for kw in body.split(";"):
            _append(target, kw.strip())
    return KeywordOps(tuple(add), tuple(remove))


def _sentences(text: str) -> list[str]:
    return [m.group().strip() for m in _SENTENCE.finditer(text)]


def parse_instruction(text: str) -> KeywordOps:
    """Inverse of the two renderers, tolerant of case and of unknown sentences.

    Sentences that match no keyword template land in ``leftover``. Raises
    :class:`UnparseableInstruction` only if nothing at all was recognized.
    """
    text = " ".join(text.split())
    if not text:
        return KeywordOps()
    if _BRACKET.search(text):
        return _parse_bracketed(text)

    add: list[str] = []
    remove: list[str] = []
    leftover: list[str] = []
    recognized = False
    for sentence in _sentences(text):
        if _NOOP.fullmatch(sentence):
            recognized = True
            continue
        for pattern, action in _KEYWORD_PATTERNS:
            m = pattern.fullmatch(sentence)
            if m:
                _append(add if action == "add" else remove, m.group("kw"))
                recognized = True
                break
        else:
            if any(p.fullmatch(sentence) for p in _PASSTHROUGH_PATTERNS):
                recognized = True
            leftover.append(sentence)
    if not recognized:
        raise UnparseableInstruction(f"no instruction template matched: {text!r}")
    return KeywordOps(tuple(add), tuple(remove), tuple(leftover))
