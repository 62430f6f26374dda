"""Text normalization: cleaning, tokenization, stopword removal, stemming."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .porter import stem

URL_RE = re.compile(r"https?://\S*")
CITATION_RE = re.compile(r"\(Citation:[^)]*\)")

MIN_TOKEN_LEN = 2

_ASCII_LOWER = str.maketrans(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ", "abcdefghijklmnopqrstuvwxyz"
)


@dataclass(frozen=True)
class TokenizedDoc:
    doc_id: str
    tokens: list[str] = field(default_factory=list)
    raw_len: int = 0


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    """The shipped English stopword list (``resources/stopwords.txt``)."""
    text = resources.files("ttpbench").joinpath("resources/stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def clean(text: str) -> str:
    """Drop URLs and ``(Citation: ...)`` markers, leaving everything else."""
    text = CITATION_RE.sub("", text)
    return URL_RE.sub("", text)


def ascii_lower(text: str) -> str:
    return text.translate(_ASCII_LOWER)


def split_words(text: str) -> list[str]:
    """Split on every non-alphanumeric character."""
    words = []
    start = None
    for i, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = i
        elif start is not None:
            words.append(text[start:i])
            start = None
    if start is not None:
        words.append(text[start:])
    return words


@lru_cache(maxsize=65536)
def stable_stem(word: str) -> str:
    # Porter is not idempotent ("agree" -> "agre" -> "agr"); iterate so that
    # re-processing output tokens is a no-op.
    prev, cur = None, word
    while cur != prev:
        prev, cur = cur, stem(cur)
    return cur


def normalize_words(words) -> list[str]:
    stop = stopwords()
    out = []
    for w in words:
        if w in stop or len(w) < MIN_TOKEN_LEN:
            continue
        s = stable_stem(w)
        if s in stop or len(s) < MIN_TOKEN_LEN:
            continue
        out.append(s)
    return out


def tokenize(text: str) -> list[str]:
    """clean -> lowercase -> split -> stopwords -> length filter -> stem."""
    return normalize_words(split_words(ascii_lower(clean(text))))


def preprocess(text: str, doc_id: str = "") -> TokenizedDoc:
    return TokenizedDoc(doc_id=doc_id, tokens=tokenize(text), raw_len=len(text))
