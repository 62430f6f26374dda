from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .matrix import FeatureMatrix, MethodTag


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    df: np.ndarray
    n_docs: int

    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    def idf(self) -> np.ndarray:
        # smoothed idf with +1 floor
        return np.log((1.0 + self.n_docs) / (1.0 + self.df)) + 1.0


def _tokens(doc):
    return getattr(doc, "tokens", doc)


def tfidf_fit(docs) -> Vocabulary:
    """Vocabulary and document frequencies over ``docs`` (token lists or TokenizedDoc)."""
    bags = [set(_tokens(d)) for d in docs]
    if not any(bags):
        raise ValueError("tfidf_fit: every document is empty")
    df: dict[str, int] = {}
    for bag in bags:
        for t in bag:
            df[t] = df.get(t, 0) + 1
    terms = tuple(sorted(df))
    return Vocabulary(terms, np.array([df[t] for t in terms], dtype=np.int64), len(bags))


def count_matrix(vocab: Vocabulary, docs) -> sp.csr_matrix:
    index = vocab.index()
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for d in docs:
        counts: dict[int, int] = {}
        for t in _tokens(d):
            j = index.get(t)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            indices.append(j)
            data.append(counts[j])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(indptr) - 1, len(vocab.terms)),
    )


def l2_normalize_rows(X: sp.csr_matrix) -> sp.csr_matrix:
    X = X.tocsr(copy=True)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.csr_matrix(sp.diags(scale) @ X)


def tfidf_transform(vocab: Vocabulary, docs, labels=None,
                    method_tag: MethodTag = MethodTag.TFIDF, label_set=()) -> FeatureMatrix:
    """tf * idf per term, each nonzero row scaled to unit L2 norm; unseen terms ignored."""
    counts = count_matrix(vocab, docs)
    weighted = counts @ sp.diags(vocab.idf())
    values = l2_normalize_rows(sp.csr_matrix(weighted))
    if labels is None:
        labels = np.zeros(values.shape[0], dtype=np.int64)
    return FeatureMatrix(values, labels, method_tag, tuple(label_set), list(vocab.terms))
