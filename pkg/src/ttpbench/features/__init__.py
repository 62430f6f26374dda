from .bm25 import bm25_features, bm25_weights
from .lsi import (
    DEFAULT_TOPICS,
    LsiModel,
    cosine_matrix,
    default_topics,
    lsi_co_features,
    lsi_fit,
    lsi_project,
    randomized_svd,
)
from .matrix import FeatureMatrix, MethodTag, load_fmx, save_fmx
from .phrases import MissingAnnotationError, tfidf_np_features
from .tfidf import Vocabulary, count_matrix, l2_normalize_rows, tfidf_fit, tfidf_transform

__all__ = [
    "DEFAULT_TOPICS", "FeatureMatrix", "LsiModel", "MethodTag", "MissingAnnotationError",
    "Vocabulary", "bm25_features", "bm25_weights", "cosine_matrix", "count_matrix",
    "default_topics", "l2_normalize_rows", "load_fmx", "lsi_co_features", "lsi_fit",
    "lsi_project", "randomized_svd", "save_fmx", "tfidf_fit", "tfidf_np_features",
    "tfidf_transform",
]
