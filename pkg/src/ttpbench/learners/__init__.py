"""Six classifiers behind one train / score interface."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..features.matrix import FeatureMatrix
from .mlp import MLP
from .simple import KNN, GaussianNB, LinearSVM
from .tree import DecisionTree, RandomForest, bootstrap_indices


class LearnerKind(str, enum.Enum):
    KNN = "KNN"
    NB = "NB"
    SVM = "SVM"
    DT = "DT"
    RF = "RF"
    NN = "NN"


DEFAULT_PARAMS = {
    LearnerKind.KNN: {"k": 5},
    LearnerKind.NB: {"var_smoothing": 1e-9},
    LearnerKind.SVM: {"lam": 1e-4, "epochs": 200, "batch_size": 32},
    LearnerKind.DT: {"min_samples_split": 2},
    LearnerKind.RF: {"n_trees": 100, "max_features": "sqrt", "min_samples_split": 2},
    LearnerKind.NN: {"hidden": 100, "lr": 1e-3, "beta1": 0.9, "beta2": 0.999, "epochs": 200,
                     "batch_size": 32, "alpha": 1e-4, "tol": 1e-4, "n_iter_no_change": 10},
}

_FACTORIES = {
    LearnerKind.KNN: KNN,
    LearnerKind.NB: GaussianNB,
    LearnerKind.SVM: LinearSVM,
    LearnerKind.DT: DecisionTree,
    LearnerKind.RF: RandomForest,
    LearnerKind.NN: MLP,
}


class LearnerError(ValueError):
    pass


@dataclass(frozen=True)
class LearnerSpec:
    kind: LearnerKind
    params: dict = field(default_factory=dict)
    seed: int = 0

    def resolved_params(self) -> dict:
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise LearnerError(f"{self.kind.value}: unknown parameter(s) {sorted(unknown)}")
        return {**DEFAULT_PARAMS[self.kind], **self.params}


@dataclass
class TrainedModel:
    spec: LearnerSpec
    n_classes: int
    n_features: int
    classes: np.ndarray  # class indices seen in training
    estimator: object


def _unpack(X):
    if isinstance(X, FeatureMatrix):
        return X.values, X.labels
    return X, None


def _check_finite(values) -> None:
    data = values.data if sp.issparse(values) else np.asarray(values)
    if not np.all(np.isfinite(data)):
        raise LearnerError("non-finite feature value in input")


def train(spec: LearnerSpec, X_train, y=None, n_classes: int | None = None) -> TrainedModel:
    values, labels = _unpack(X_train)
    y = np.asarray(labels if y is None else y, dtype=np.int64)
    _check_finite(values)
    classes = np.unique(y)
    if len(classes) < 2:
        raise LearnerError(f"training set has {len(classes)} class(es); need at least 2")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    compact = np.searchsorted(classes, y)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, list(LearnerKind).index(spec.kind)]))
    est = _FACTORIES[spec.kind](**spec.resolved_params())
    if sp.issparse(values):
        values = sp.csr_matrix(values, dtype=np.float64)
    else:
        values = np.asarray(values, dtype=np.float64)
    est.fit(values, compact, len(classes), rng)
    return TrainedModel(spec, n_classes, values.shape[1], classes, est)


def _raw_scores(model: TrainedModel, values) -> np.ndarray:
    est = model.estimator
    kind = model.spec.kind
    if kind is LearnerKind.NB:
        return est.predict_log_proba(values)
    if kind is LearnerKind.SVM:
        return est.decision_function(values)
    return est.predict_proba(values)


def predict_scores(model: TrainedModel, X) -> np.ndarray:
    """Per-class scores, higher meaning more likely.

    KNN: neighbour class frequency. NB: log posterior. SVM: one-vs-rest
    margin. DT/RF: leaf / mean leaf class proportions. NN: softmax.
    """
    values, _ = _unpack(X)
    if values.shape[1] != model.n_features:
        raise LearnerError(f"feature dimension {values.shape[1]} != trained {model.n_features}")
    if sp.issparse(values):
        values = sp.csr_matrix(values, dtype=np.float64)
    else:
        values = np.asarray(values, dtype=np.float64)
    raw = _raw_scores(model, values)
    if len(model.classes) == model.n_classes:
        return raw
    # classes absent from training get a score below every seen class
    if model.spec.kind in (LearnerKind.NB, LearnerKind.SVM):
        fill = raw.min(axis=1, keepdims=True) - 1.0
    else:
        fill = np.zeros((raw.shape[0], 1))
    out = np.repeat(fill, model.n_classes, axis=1)
    out[:, model.classes] = raw
    return out


def predict_labels(model: TrainedModel, X) -> np.ndarray:
    """Argmax of :func:`predict_scores`; ties go to the lowest class index."""
    return np.argmax(predict_scores(model, X), axis=1)


__all__ = [
    "DEFAULT_PARAMS", "DecisionTree", "GaussianNB", "KNN", "LearnerError", "LearnerKind",
    "LearnerSpec", "LinearSVM", "MLP", "RandomForest", "TrainedModel", "bootstrap_indices",
    "predict_labels", "predict_scores", "train",
]
