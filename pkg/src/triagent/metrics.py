"""ROUGE-N, ROUGE-L, heuristic entity extraction and entity-level Knowledge F1.

All scores live in [0, 1]; reports rescale to 0-100.
"""

from __future__ import annotations

import json
import re
import subprocess
import threading
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Protocol

import httpx

from .errors import ExternalExtractorUnavailable, InvalidN


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, overlap: int, n_candidate: int, n_reference: int) -> RougeScore:
        p = overlap / n_candidate if n_candidate else 0.0
        r = overlap / n_reference if n_reference else 0.0
        return cls(p, r, _f1(p, r))

    def to_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RougeScore:
        return cls(float(d["precision"]), float(d["recall"]), float(d["f1"]))


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap between two token lists."""
    if n < 1:
        raise InvalidN(f"n must be >= 1, got {n}")
    cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
    overlap = sum((cand & ref).values())
    return RougeScore.from_counts(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    return RougeScore.from_counts(lcs_length(candidate, reference), len(candidate), len(reference))


# --- entities -----------------------------------------------------------------

_ENTITY_TOKEN = re.compile(
    r"""
    (?P<acro>(?:[^\W\d_]\.){2,})
   |(?P<num>\d+(?:[.,:]\d+)*)
   |(?P<poss>['’]s(?![^\W\d_]))
   |(?P<word>[^\W\d_]+(?:-[^\W\d_]+|['’](?!s(?![^\W\d_]))[^\W\d_]+)*)
   |(?P<punct>[^\w\s])
    """,
    re.VERBOSE,
)
_CONNECTORS = frozenset({"of", "the"})
# Capitalized function words that open sentences; never entities on their own.
_LEADING_STOP = frozenset(
    """a an the this that these those there here it its he she his her him they them their
    we our us i you your my me in on at by for from to with after before during since but and
    or so if when while as what who whom which where why how mr mrs ms dr one some many most
    all both each every no not yes however meanwhile also then now""".split()
)
_STRIP = " \t\n.,;:!?\"'()[]{}<>«»“”‘’-–—"


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str


@lru_cache(maxsize=8192)
def _entity_tokens(text: str) -> tuple[_Tok, ...]:
    return tuple(_Tok(m.lastgroup or "punct", m.group()) for m in _ENTITY_TOKEN.finditer(text))


def keyword_tokens(text: str) -> tuple[str, ...]:
    """Lowercased token stream used for keyword containment tests."""
    return tuple(t.text.lower() for t in _entity_tokens(text))


def contains_keyword(text: str, keyword: str) -> bool:
    """True when ``keyword``'s tokens occur contiguously in ``text`` (case-insensitive)."""
    needle = keyword_tokens(keyword)
    if not needle:
        return False
    hay = keyword_tokens(text)
    n = len(needle)
    return any(hay[i : i + n] == needle for i in range(len(hay) - n + 1))


def keyword_spans(text: str, keyword: str) -> list[tuple[int, int]]:
    """Character spans of non-overlapping occurrences of ``keyword`` in ``text``."""
    needle = keyword_tokens(keyword)
    if not needle:
        return []
    matches = list(_ENTITY_TOKEN.finditer(text))
    hay = [m.group().lower() for m in matches]
    n, spans, i = len(needle), [], 0
    while i <= len(hay) - n:
        if tuple(hay[i : i + n]) == needle:
            spans.append((matches[i].start(), matches[i + n - 1].end()))
            i += n
        else:
            i += 1
    return spans


def normalize_entity(span: str) -> str:
    return " ".join(span.lower().split()).strip(_STRIP)


def _join(tokens: Sequence[_Tok]) -> str:
    out = ""
    for tok in tokens:
        out += tok.text if tok.kind == "poss" or not out else " " + tok.text
    return out


def _is_cap(tok: _Tok) -> bool:
    return tok.kind in ("word", "acro") and tok.text[0].isupper()


def _is_connector(tok: _Tok) -> bool:
    return tok.kind == "poss" or (tok.kind == "word" and tok.text in _CONNECTORS)


def heuristic_entities(text: str) -> list[str]:
    """Maximal capitalized spans (internal "of", "the", "'s" allowed) plus number tokens.

    Leading capitalized function words ("The", "He", ...) are trimmed from a span;
    spans left empty are dropped. Returns normalized strings in first-occurrence order.
    """
    toks = _entity_tokens(text)
    found: list[str] = []
    i = 0
    while i < len(toks):
        tok = toks[i]
        if tok.kind == "num":
            found.append(normalize_entity(tok.text))
            i += 1
            continue
        if not _is_cap(tok):
            i += 1
            continue
        end = i
        j = i + 1
        while j < len(toks):
            if _is_cap(toks[j]):
                end = j
            elif not _is_connector(toks[j]):
                break
            j += 1
        span = list(toks[i : end + 1])
        while span and (_is_connector(span[0]) or span[0].text.lower() in _LEADING_STOP):
            span.pop(0)
        if span:
            found.append(normalize_entity(_join(span)))
        i = end + 1
    return list(dict.fromkeys(e for e in found if e))


@dataclass(frozen=True)
class EntitySet:
    """Normalized entity strings; iteration follows first occurrence in the source text."""

    entities: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        cleaned = tuple(dict.fromkeys(normalize_entity(e) for e in self.entities))
        if any(not e for e in cleaned):
            raise ValueError("entity strings must be non-empty after normalization")
        object.__setattr__(self, "entities", cleaned)

    def __iter__(self):
        return iter(self.entities)

    def __len__(self) -> int:
        return len(self.entities)

    def __contains__(self, item: object) -> bool:
        return item in self.as_set

    @property
    def as_set(self) -> frozenset[str]:
        return frozenset(self.entities)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, EntitySet):
            return self.as_set == other.as_set
        if isinstance(other, (set, frozenset)):
            return self.as_set == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.as_set)


class EntityExtractor(Protocol):
    def __call__(self, text: str) -> list[str]: ...


class CommandExtractor:
    """Long-lived subprocess speaking one JSON string per line in, one JSON array per line out."""

    def __init__(self, argv: Sequence[str], timeout: float = 30.0) -> None:
        self.argv = list(argv)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    encoding="utf-8",
                    bufsize=1,
                )
            except OSError as exc:
                raise ExternalExtractorUnavailable(f"cannot start {self.argv}: {exc}") from exc
        return self._proc

    def __call__(self, text: str) -> list[str]:
        with self._lock:
            proc = self._ensure()
            try:
                assert proc.stdin is not None and proc.stdout is not None
                proc.stdin.write(json.dumps(text, ensure_ascii=False) + "\n")
                proc.stdin.flush()
                line = proc.stdout.readline()
            except (BrokenPipeError, OSError) as exc:
                raise ExternalExtractorUnavailable(f"extractor process failed: {exc}") from exc
        if not line:
            raise ExternalExtractorUnavailable("extractor process closed its output")
        return _decode_entities(line)

    def close(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None


class HTTPExtractor:
    """POSTs ``{"text": ...}`` and expects a JSON array of entity strings back."""

    def __init__(self, url: str, timeout: float = 30.0, client: httpx.Client | None = None) -> None:
        self.url = url
        self.timeout = timeout
        self._client = client or httpx.Client(timeout=timeout)

    def __call__(self, text: str) -> list[str]:
        try:
            resp = self._client.post(self.url, json={"text": text})
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise ExternalExtractorUnavailable(f"entity endpoint {self.url}: {exc}") from exc
        return _decode_entities(resp.text)


def _decode_entities(payload: str) -> list[str]:
    try:
        values = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ExternalExtractorUnavailable(f"extractor returned invalid JSON: {payload[:200]!r}") from exc
    if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
        raise ExternalExtractorUnavailable("extractor must return a JSON array of strings")
    return values


def extract_entities(
    text: str,
    extractor: str = "heuristic",
    external: EntityExtractor | None = None,
) -> EntitySet:
    if extractor == "heuristic":
        return EntitySet(tuple(heuristic_entities(text)))
    if extractor == "external":
        if external is None:
            raise ExternalExtractorUnavailable("no external extractor configured")
        return EntitySet(tuple(e for e in external(text) if normalize_entity(e)))
    raise ValueError(f"unknown extractor {extractor!r}")


@dataclass(frozen=True)
class KnowledgeScore:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> KnowledgeScore:
        return cls(float(d["precision"]), float(d["recall"]), float(d["f1"]))


def knowledge_f1(generated: EntitySet | Iterable[str], reference: EntitySet | Iterable[str]) -> KnowledgeScore:
    gen = generated.as_set if isinstance(generated, EntitySet) else frozenset(generated)
    ref = reference.as_set if isinstance(reference, EntitySet) else frozenset(reference)
    hit = len(gen & ref)
    p = hit / len(gen) if gen else 0.0
    r = hit / len(ref) if ref else 0.0
    return KnowledgeScore(p, r, _f1(p, r))
