"""Text normalization, sentence splitting and tokenization.

Everything downstream (metrics, the mock editor, the oracle) works on text
that has been through :func:`normalize_text` exactly once, at ingestion.
"""

from __future__ import annotations

import re
import unicodedata
from functools import lru_cache

_WS = re.compile(r"\s+")
_TERMINATOR = re.compile(r"[.!?]+")

ABBREVIATIONS = frozenset(
    {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "Mt.",
        "Gen.", "Gov.", "Sen.", "Rep.", "Lt.", "Col.", "Sgt.", "Capt.", "Rev.",
        "Inc.", "Ltd.", "Co.", "Corp.", "Bros.", "No.", "vs.", "etc.", "approx.",
        "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.",
        "Oct.", "Nov.", "Dec.",
    }
)
# U.S., U.K., e.g., i.e., and single initials such as "F."
_DOTTED = re.compile(r"(?:[^\W\d_]\.){2,}|[A-Z]\.")


def normalize_text(text: str) -> str:
    """NFC-normalize, collapse whitespace runs to one space, trim."""
    return _WS.sub(" ", unicodedata.normalize("NFC", text)).strip()


def _is_abbreviation(text: str, end: int) -> bool:
    start = text.rfind(" ", 0, end) + 1
    word = text[start:end].lstrip("\"'([")
    return word in ABBREVIATIONS or _DOTTED.fullmatch(word) is not None


@lru_cache(maxsize=4096)
def _split(text: str) -> tuple[str, ...]:
    sentences = []
    prev = 0
    for m in _TERMINATOR.finditer(text):
        end = m.end()
        rest = text[end:]
        if rest.strip():
            j = end + (len(rest) - len(rest.lstrip()))
            if j == end or not text[j].isupper():
                continue
        if _is_abbreviation(text, end) and rest.strip():
            continue
        chunk = text[prev:end].strip()
        if chunk:
            sentences.append(chunk)
        prev = end
    tail = text[prev:].strip()
    if tail:
        sentences.append(tail)
    return tuple(sentences)


def split_sentences(text: str) -> list[str]:
    """Split on ``.``/``!``/``?`` followed by whitespace and an uppercase letter, or end of text.

    Known abbreviations and dotted initials never end a sentence unless they
    close the text.
    """
    return list(_split(text))


def join_sentences(sentences: list[str] | tuple[str, ...]) -> str:
    return " ".join(s for s in sentences if s)


_ALNUM = re.compile(r"[^\W_]+")
_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]")


@lru_cache(maxsize=1)
def _stemmer():
    try:
        from nltk.stem.porter import PorterStemmer
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise ImportError("stemming requires nltk; install with `pip install artifact[stem]`") from exc
    return PorterStemmer()


def tokenize(
    text: str,
    lowercase: bool = True,
    strip_punct: bool = True,
    stem: bool = False,
) -> list[str]:
    """ROUGE tokenization.

    With ``strip_punct`` tokens are maximal alphanumeric runs, so "U.S." gives
    ``["u", "s"]``; without it punctuation marks become their own tokens.
    """
    if lowercase:
        text = text.lower()
    tokens = (_ALNUM if strip_punct else _WORD_OR_PUNCT).findall(text)
    if stem:
        stemmer = _stemmer()
        tokens = [stemmer.stem(t) for t in tokens]
    return tokens
