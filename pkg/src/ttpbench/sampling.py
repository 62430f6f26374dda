"""SMOTE oversampling in feature space."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .features.matrix import FeatureMatrix


class SmoteMode(str, enum.Enum):
    FULL_DATASET = "full_dataset"  # oversample before splitting
    TRAIN_ONLY = "train_only"      # oversample each training fold only


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 6
    mode: SmoteMode = SmoteMode.TRAIN_ONLY
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")


class SmoteError(ValueError):
    pass


def _sq_distances(Xc) -> np.ndarray:
    if sp.issparse(Xc):
        G = (Xc @ Xc.T).toarray()
    else:
        G = Xc @ Xc.T
    sq = np.diag(G).copy()
    D = sq[:, None] + sq[None, :] - 2.0 * G
    np.maximum(D, 0.0, out=D)
    return D


def nearest_neighbors(Xc, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other rows (Euclidean), ties to the lower index."""
    D = _sq_distances(Xc)
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def smote(X: FeatureMatrix, cfg: SmoteConfig) -> FeatureMatrix:
    """Upsample every class to the majority count with interpolated points.

    Each synthetic row is ``x + u * (x_nb - x)`` with ``x`` drawn uniformly
    from its class, ``x_nb`` one of its ``k`` nearest same-class
    neighbours and ``u ~ U(0, 1)``. Original rows come first, unchanged.
    """
    labels = X.labels
    classes, counts = np.unique(labels, return_counts=True)
    target = counts.max() if len(counts) else 0
    small = classes[counts < 2]
    if len(small):
        raise SmoteError(
            f"class(es) {small.tolist()} have a single sample; raise min_support"
        )
    blocks = []
    new_labels = []
    parents = []
    for c, count in zip(classes, counts):
        need = int(target - count)
        if need == 0:
            continue
        rows = np.flatnonzero(labels == c)
        k = cfg.k_neighbors
        if count <= k:
            warnings.warn(f"class {c}: {count} samples, reducing k from {k} to {count - 1}")
            k = count - 1
        Xc = X.values[rows]
        nn = nearest_neighbors(Xc, k)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, int(c)]))
        base = rng.integers(0, count, size=need)
        pick = nn[base, rng.integers(0, k, size=need)]
        u = rng.random(need)
        if sp.issparse(Xc):
            synth = sp.diags(1.0 - u) @ Xc[base] + sp.diags(u) @ Xc[pick]
        else:
            synth = Xc[base] + u[:, None] * (Xc[pick] - Xc[base])
        blocks.append(synth)
        new_labels.append(np.full(need, c))
        parents.append(np.column_stack([rows[base], rows[pick]]))
    if not blocks:
        out = replace(X, extra={**X.extra, "n_original": X.rows, "parents": np.zeros((0, 2), int)})
        return out
    if X.is_sparse:
        values = sp.vstack([X.values, *blocks]).tocsr()
    else:
        values = np.vstack([X.values, *blocks])
    return replace(
        X,
        values=values,
        labels=np.concatenate([labels, *new_labels]),
        extra={**X.extra, "n_original": X.rows, "parents": np.vstack(parents)},
    )
