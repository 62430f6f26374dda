"""Okapi BM25 similarity between per-document SVO bags and per-technique SVO bags."""

from __future__ import annotations

import numpy as np

from .matrix import FeatureMatrix, MethodTag
from .tfidf import Vocabulary, count_matrix


def bm25_weights(technique_bags, k1: float = 1.5, b: float = 0.75):
    """Per-(technique, term) BM25 contribution of one query occurrence.

    Returns ``(terms, W)`` where ``W[j, t]`` is the score a single
    occurrence of term ``t`` in the query adds against technique ``j``.
    """
    terms = tuple(sorted({t for bag in technique_bags for t in bag}))
    N = len(technique_bags)
    if not terms:
        return terms, np.zeros((N, 0))
    vocab = Vocabulary(terms, np.zeros(len(terms), dtype=np.int64), N)
    F = count_matrix(vocab, technique_bags).toarray()
    df = (F > 0).sum(axis=0)
    idf = np.log((N - df + 0.5) / (df + 0.5) + 1.0)
    lengths = F.sum(axis=1)
    avglen = lengths.mean()
    norm = k1 * (1.0 - b + b * lengths / avglen)
    W = idf[None, :] * F * (k1 + 1.0) / (F + norm[:, None])
    return terms, W


def bm25_features(corpus_bags, technique_bags, k1: float = 1.5, b: float = 0.75,
                  labels=None, label_set=()) -> FeatureMatrix:
    """Feature j of document d is the BM25 score of d's bag, as a query, against technique j."""
    terms, W = bm25_weights(technique_bags, k1, b)
    if terms:
        vocab = Vocabulary(terms, np.zeros(len(terms), dtype=np.int64), len(technique_bags))
        Q = count_matrix(vocab, corpus_bags)
        values = np.asarray(Q @ W.T)
    else:
        values = np.zeros((len(corpus_bags), len(technique_bags)))
    if labels is None:
        labels = np.zeros(values.shape[0], dtype=np.int64)
    return FeatureMatrix(values, labels, MethodTag.BM25, tuple(label_set))
