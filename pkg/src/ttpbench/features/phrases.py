from __future__ import annotations

from ..annotations import independent_phrases, phrase_occurrences
from .matrix import FeatureMatrix, MethodTag
from .tfidf import tfidf_fit, tfidf_transform


class MissingAnnotationError(KeyError):
    pass


def document_phrases(doc_ids, annotations) -> list[list]:
    """Phrase occurrences (nested spans included) for each document."""
    out = []
    for doc_id in doc_ids:
        if doc_id not in annotations:
            raise MissingAnnotationError(f"no CoNLL-U annotations for document {doc_id!r}")
        occ = []
        for sent in annotations[doc_id]:
            occ.extend(phrase_occurrences(sent))
        out.append(occ)
    return out


def tfidf_np_features(doc_ids, annotations, labels=None, fit_rows=None,
                      label_set=()) -> FeatureMatrix:
    """TF-IDF over the independent noun phrases found in the fitting documents.

    Term frequency counts every occurrence of a vocabulary phrase in the
    document, including occurrences nested in a longer phrase.
    """
    occurrences = document_phrases(doc_ids, annotations)
    fit = range(len(doc_ids)) if fit_rows is None else fit_rows
    keys = independent_phrases(p for i in fit for p in occurrences[i])
    bags = [[p.key for p in occ if p.key in keys] for occ in occurrences]
    fit_bags = [bags[i] for i in fit]
    if not any(fit_bags):
        raise ValueError("tfidf_np_features: no independent noun phrases in the fitting documents")
    vocab = tfidf_fit(fit_bags)
    return tfidf_transform(vocab, bags, labels, MethodTag.TFIDF_NP, label_set)
