"""Experiment declaration, read from and written to a flat JSON document."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .features.matrix import MethodTag
from .learners import LearnerKind

ALLOWED_N = (2, 4, 8, 16, 32, 64)
OVERSAMPLE_MODES = ("none", "full_dataset", "train_only")

DISPLAY_NAMES = {
    MethodTag.TFIDF: "M:TFIDF",
    MethodTag.TFIDF_NP: "M:TFIDF-NP",
    MethodTag.LSI: "M:LSI",
    MethodTag.LSI_CO: "M:LSI-Co",
    MethodTag.BM25: "M:BM25",
}
METHOD_ORDER = [MethodTag.TFIDF, MethodTag.TFIDF_NP, MethodTag.LSI, MethodTag.LSI_CO, MethodTag.BM25]
CLASSIFIER_ORDER = [LearnerKind.KNN, LearnerKind.NB, LearnerKind.SVM, LearnerKind.DT,
                    LearnerKind.RF, LearnerKind.NN]


class ConfigError(ValueError):
    pass


def normalize_method(name: str) -> str:
    """Accept ``TFIDF``, ``M:TFIDF-NP``, ``lsi-co`` and similar spellings."""
    key = name.strip().upper()
    if key.startswith("M:"):
        key = key[2:]
    key = key.replace("-", "_")
    try:
        return MethodTag(key).value
    except ValueError:
        raise ConfigError(f"unknown method {name!r}") from None


def normalize_classifier(name: str) -> str:
    try:
        return LearnerKind(name.strip().upper()).value
    except ValueError:
        raise ConfigError(f"unknown classifier {name!r}") from None


@dataclass
class GridConfig:
    bundle_path: str
    out_dir: str
    methods: list[str] = field(default_factory=lambda: [m.value for m in METHOD_ORDER])
    classifiers: list[str] = field(default_factory=lambda: [c.value for c in CLASSIFIER_ORDER])
    n_list: list[int] = field(default_factory=lambda: list(ALLOWED_N))
    oversample_modes: list[str] = field(default_factory=lambda: ["none", "full_dataset"])
    conllu_path: str | None = None
    K: int = 5
    seed: int = 0
    min_support: int = 30
    num_topics: int = 500
    smote_k: int = 6
    bm25_k1: float = 1.5
    bm25_b: float = 0.75
    collapse_subtechniques: bool = True

    def __post_init__(self):
        self.methods = [normalize_method(m) for m in self.methods]
        self.classifiers = [normalize_classifier(c) for c in self.classifiers]
        self.n_list = [int(n) for n in self.n_list]
        if not self.methods or not self.classifiers or not self.n_list or not self.oversample_modes:
            raise ConfigError("methods, classifiers, n_list and oversample_modes must be non-empty")
        bad_n = [n for n in self.n_list if n not in ALLOWED_N]
        if bad_n:
            raise ConfigError(f"n_list values {bad_n} not in {list(ALLOWED_N)}")
        bad_modes = [m for m in self.oversample_modes if m not in OVERSAMPLE_MODES]
        if bad_modes:
            raise ConfigError(f"unknown oversample mode(s) {bad_modes}; expected {list(OVERSAMPLE_MODES)}")
        for name in ("K", "min_support", "num_topics", "smote_k"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.K < 2:
            raise ConfigError("K must be >= 2")

    @classmethod
    def from_dict(cls, data: dict) -> "GridConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        missing = {"bundle_path", "out_dir"} - set(data)
        if missing:
            raise ConfigError(f"missing config key(s): {sorted(missing)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "GridConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "GridConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def needs_annotations(self) -> list[str]:
        return [m for m in self.methods if m in (MethodTag.TFIDF_NP.value, MethodTag.BM25.value)]
