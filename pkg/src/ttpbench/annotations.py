"""CoNLL-U ingestion, noun-phrase chunking and subject-verb-object extraction.

Annotations are produced offline by any UD-compatible parser; every
document's sentences are preceded by a ``# doc_id = <id>`` comment.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .textprep import ascii_lower, normalize_words, split_words


class ConlluError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class AnnotatedSentence:
    doc_id: str
    tokens: tuple[Token, ...]
    index: int = 0  # position of the sentence within its document

    def __len__(self):
        return len(self.tokens)

    def children(self, i: int) -> list[int]:
        """0-based indices of the dependents of token ``i`` (0-based)."""
        return [j for j, t in enumerate(self.tokens) if t.head == i + 1]

    def root(self) -> int | None:
        for i, t in enumerate(self.tokens):
            if t.head == 0:
                return i
        return None


@dataclass(frozen=True)
class NounPhrase:
    tokens: tuple[str, ...]
    surface: str
    doc_id: str = ""
    sent_index: int | None = None
    start: int = 0
    end: int = 0

    @property
    def key(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class SvoTuple:
    subject: str
    verb: str
    object: str
    partial: bool = False

    def words(self) -> list[str]:
        return [w for w in (self.subject, self.verb, self.object) if w]


_DOC_ID_RE = re.compile(r"^#\s*doc_id\s*=\s*(.+?)\s*$")


def parse_conllu(text: str, source: str = "<string>") -> list[AnnotatedSentence]:
    sentences: list[AnnotatedSentence] = []
    doc_id: str | None = None
    per_doc: dict[str, int] = defaultdict(int)
    rows: list[Token] = []
    first_line = 0

    def flush(lineno: int) -> None:
        nonlocal rows
        if not rows:
            return
        n = len(rows)
        for t in rows:
            if not 0 <= t.head <= n:
                raise ConlluError(f"{source}:{first_line}: head {t.head} outside sentence of {n} tokens")
        sentences.append(AnnotatedSentence(doc_id, tuple(rows), per_doc[doc_id]))
        per_doc[doc_id] += 1
        rows = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            m = _DOC_ID_RE.match(line)
            if m:
                flush(lineno)
                doc_id = m.group(1)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"{source}:{lineno}: expected 10 tab-separated columns, got {len(cols)}")
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            # multiword ranges: the component words follow; empty nodes: skipped
            continue
        if doc_id is None:
            raise ConlluError(f"{source}:{lineno}: token before any '# doc_id =' comment")
        try:
            idx = int(tok_id)
            head = int(cols[6]) if cols[6] != "_" else 0
        except ValueError as exc:
            raise ConlluError(f"{source}:{lineno}: bad id or head column") from exc
        if idx != len(rows) + 1:
            raise ConlluError(f"{source}:{lineno}: token id {idx} breaks contiguity (expected {len(rows) + 1})")
        if not rows:
            first_line = lineno
        rows.append(Token(cols[1], cols[2], cols[3], head, cols[7]))
    flush(len(text.splitlines()) + 1)
    return sentences


def read_conllu(path) -> list[AnnotatedSentence]:
    path = Path(path)
    return parse_conllu(path.read_text(encoding="utf-8"), str(path))


def group_by_doc(sentences) -> dict[str, list[AnnotatedSentence]]:
    docs: dict[str, list[AnnotatedSentence]] = defaultdict(list)
    for s in sentences:
        docs[s.doc_id].append(s)
    return dict(docs)


# -- noun phrases -----------------------------------------------------------

_NP_TAG = {"ADJ": "A", "NOUN": "N", "PROPN": "N"}
_NP_RE = re.compile(r"A*N+")


def _word_stems(form: str) -> list[str]:
    return normalize_words(split_words(ascii_lower(form)))


def _phrase(sent: AnnotatedSentence, stems, start: int, end: int) -> NounPhrase:
    toks = tuple(s for i in range(start, end) for s in stems[i])
    surface = " ".join(sent.tokens[i].form for i in range(start, end))
    return NounPhrase(toks, surface, sent.doc_id, sent.index, start, end)


def _tag_string(sent: AnnotatedSentence):
    stems = [_word_stems(t.form) for t in sent.tokens]
    # stopwords and tokens that normalize to nothing break phrases
    tags = "".join(
        _NP_TAG.get(t.upos, "x") if stems[i] else "x"
        for i, t in enumerate(sent.tokens)
    )
    return tags, stems


def extract_noun_phrases(sent: AnnotatedSentence) -> list[NounPhrase]:
    """Maximal runs matching ``(ADJ|NOUN|PROPN)* (NOUN|PROPN)+``."""
    tags, stems = _tag_string(sent)
    return [_phrase(sent, stems, m.start(), m.end()) for m in _NP_RE.finditer(tags)]


def phrase_occurrences(sent: AnnotatedSentence) -> list[NounPhrase]:
    """Every pattern-matching span inside a maximal phrase, the maximal ones included."""
    tags, stems = _tag_string(sent)
    out = []
    for m in _NP_RE.finditer(tags):
        for a in range(m.start(), m.end()):
            for b in range(a + 1, m.end() + 1):
                if _NP_RE.fullmatch(tags, a, b):
                    out.append(_phrase(sent, stems, a, b))
    return out


def independent_phrases(phrases) -> set[str]:
    """Keys with at least one occurrence not strictly inside another occurrence.

    Occurrences without a sentence location are treated as standalone.
    """
    by_sentence = defaultdict(list)
    keys = set()
    for p in phrases:
        if p.sent_index is None:
            keys.add(p.key)
        else:
            by_sentence[(p.doc_id, p.sent_index)].append(p)
    for group in by_sentence.values():
        for p in group:
            if p.key in keys:
                continue
            nested = any(
                q.start <= p.start and p.end <= q.end and (q.end - q.start) > (p.end - p.start)
                for q in group
            )
            if not nested:
                keys.add(p.key)
    return keys


# -- subject / verb / object -----------------------------------------------

SUBJECT_RELS = frozenset({"nsubj", "nsubj:pass"})
OBJECT_RELS = frozenset({"obj", "dobj", "obl", "iobj"})
_INHERIT_RELS = frozenset({"conj", "xcomp", "advcl"})
_COMPOUND_RELS = ("compound", "flat")


def _lemma(tok: Token) -> str:
    lemma = tok.lemma if tok.lemma not in ("", "_") else tok.form
    return ascii_lower(lemma)


def _is_compound(rel: str) -> bool:
    return rel.split(":", 1)[0] in _COMPOUND_RELS and rel != "compound:prt"


def _expand(sent: AnnotatedSentence, i: int) -> str:
    """Lemma of token ``i`` with its adjacent compound dependents, in surface order."""
    span = [i]
    j = i - 1
    while j >= 0 and sent.tokens[j].head == i + 1 and _is_compound(sent.tokens[j].deprel):
        span.insert(0, j)
        j -= 1
    j = i + 1
    while j < len(sent) and sent.tokens[j].head == i + 1 and _is_compound(sent.tokens[j].deprel):
        span.append(j)
        j += 1
    return " ".join(_lemma(sent.tokens[k]) for k in span)


def _subjects(sent: AnnotatedSentence, v: int, depth: int = 0) -> list[str]:
    subj = [_expand(sent, c) for c in sent.children(v) if sent.tokens[c].deprel in SUBJECT_RELS]
    tok = sent.tokens[v]
    if not subj and depth < 8 and tok.head > 0 and tok.deprel.split(":", 1)[0] in _INHERIT_RELS:
        head = tok.head - 1
        if sent.tokens[head].upos in ("VERB", "AUX"):
            return _subjects(sent, head, depth + 1)
    return subj


def extract_svo(sent: AnnotatedSentence) -> list[SvoTuple]:
    """One tuple per (subject, object) pairing of every VERB token.

    Verbs in ``conj``/``xcomp``/``advcl`` position without their own
    subject inherit the governing verb's subject.
    """
    out = []
    for v, tok in enumerate(sent.tokens):
        if tok.upos != "VERB":
            continue
        subjects = _subjects(sent, v)
        objects = [_expand(sent, c) for c in sent.children(v) if sent.tokens[c].deprel in OBJECT_RELS]
        if not subjects and not objects:
            continue
        verb = _lemma(tok)
        for s in subjects or [""]:
            for o in objects or [""]:
                out.append(SvoTuple(s, verb, o, partial=not (s and o)))
    return out


def svo_bag(tuples) -> list[str]:
    """Flatten tuples to stemmed tokens (subject, verb, object words)."""
    bag = []
    for t in tuples:
        for part in t.words():
            bag.extend(normalize_words(split_words(part)))
    return bag
