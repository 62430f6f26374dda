"""Latent semantic indexing by truncated SVD of a TF-IDF matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .matrix import FeatureMatrix, MethodTag
from .tfidf import tfidf_fit, tfidf_transform

DEFAULT_TOPICS = 500
DENSE_SVD_LIMIT = 500


@dataclass(frozen=True)
class LsiModel:
    k: int
    term_topic: np.ndarray  # |V| x k, orthonormal columns
    singular_values: np.ndarray


def default_topics(rows: int, cols: int, num_topics: int = DEFAULT_TOPICS) -> int:
    return max(1, min(num_topics, min(rows, cols) - 1))


def _fix_signs(vt: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each right singular vector made positive
    idx = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), idx])
    signs[signs == 0] = 1.0
    return vt * signs[:, None]


def randomized_svd(X, k: int, n_oversamples: int = 10, n_iter: int = 4, seed: int = 0):
    """Rank-``k`` SVD via range finding with power iterations (Halko et al.).

    Returns ``(s, vt)`` with ``vt`` of shape ``(k, n_cols)``.
    """
    m, n = X.shape
    ell = min(k + n_oversamples, m, n)
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n, ell))
    Q, _ = np.linalg.qr(X @ omega)
    for _ in range(n_iter):
        Z, _ = np.linalg.qr(X.T @ Q)
        Q, _ = np.linalg.qr(X @ Z)
    B = np.asarray((X.T @ Q).T)
    _, s, vt = np.linalg.svd(B, full_matrices=False)
    return s[:k], vt[:k]


def lsi_fit(tfidf, k: int, seed: int = 0, n_oversamples: int = 10, n_iter: int = 4) -> LsiModel:
    X = tfidf.values if isinstance(tfidf, FeatureMatrix) else tfidf
    m, n = X.shape
    if k < 1:
        raise ValueError(f"lsi_fit: k must be >= 1, got {k}")
    if k > min(m, n):
        raise ValueError(f"lsi_fit: k={k} exceeds min(rows, cols)={min(m, n)}")
    if max(m, n) < DENSE_SVD_LIMIT:
        dense = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=np.float64)
        _, s, vt = np.linalg.svd(dense, full_matrices=False)
        s, vt = s[:k], vt[:k]
    else:
        s, vt = randomized_svd(X, k, n_oversamples, n_iter, seed)
    return LsiModel(k, np.ascontiguousarray(_fix_signs(vt).T), s)


def lsi_project(model: LsiModel, rows, labels=None, label_set=()) -> FeatureMatrix:
    X = rows.values if isinstance(rows, FeatureMatrix) else rows
    if X.shape[1] != model.term_topic.shape[0]:
        raise ValueError(
            f"lsi_project: {X.shape[1]} columns, model vocabulary has {model.term_topic.shape[0]}"
        )
    values = np.asarray(X @ model.term_topic)
    if labels is None:
        labels = rows.labels if isinstance(rows, FeatureMatrix) else np.zeros(values.shape[0])
    return FeatureMatrix(values, labels, MethodTag.LSI, tuple(label_set))


def cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise cosine of rows; any zero vector gives 0."""
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    An = np.divide(A, na[:, None], out=np.zeros_like(A), where=na[:, None] > 0)
    Bn = np.divide(B, nb[:, None], out=np.zeros_like(B), where=nb[:, None] > 0)
    return np.clip(An @ Bn.T, -1.0, 1.0)


def lsi_co_features(docs, technique_docs, k: int = DEFAULT_TOPICS, labels=None,
                    fit_rows=None, seed: int = 0, label_set=()) -> FeatureMatrix:
    """Cosine between each document and each technique description in a joint topic space.

    The TF-IDF vocabulary and the SVD are fitted on the technique
    descriptions plus the documents selected by ``fit_rows`` (all when None).
    """
    fit_docs = list(docs) if fit_rows is None else [docs[i] for i in fit_rows]
    joint = fit_docs + list(technique_docs)
    vocab = tfidf_fit(joint)
    X = tfidf_transform(vocab, joint).values
    model = lsi_fit(X, min(k, *X.shape), seed=seed)
    doc_topics = lsi_project(model, tfidf_transform(vocab, docs)).values
    tech_topics = lsi_project(model, tfidf_transform(vocab, technique_docs)).values
    values = cosine_matrix(doc_topics, tech_topics)
    if labels is None:
        labels = np.zeros(values.shape[0], dtype=np.int64)
    return FeatureMatrix(values, labels, MethodTag.LSI_CO, tuple(label_set))
