"""The (method x classifier x n x oversampling x fold) experiment grid.

The unit of work is one ``(n, method, mode)`` job: it builds the fold
features once and trains every requested classifier on every fold.
Jobs run in a bounded process pool; the parent process is the only
writer of ``results.csv``.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..annotations import extract_svo, svo_bag
from ..attack_ingest import LabeledCorpus, select_top_n
from ..features import (
    MethodTag, bm25_features, default_topics, lsi_co_features, lsi_fit, lsi_project,
    tfidf_fit, tfidf_np_features, tfidf_transform,
)
from ..features.matrix import FeatureMatrix
from ..learners import LearnerKind, LearnerSpec, predict_scores, train
from ..sampling import SmoteConfig, SmoteMode, smote
from ..textprep import preprocess
from .metrics import confusion, macro_auc, macro_prf, percent, stratified_kfold

log = logging.getLogger(__name__)

RESULTS_HEADER = ["method", "classifier", "n", "oversampled", "fold", "precision", "recall", "f1", "auc"]
METRICS = ("precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class CellResult:
    method: str
    classifier: str
    n: int
    oversampled: str
    fold: int
    precision: float
    recall: float
    f1: float
    auc: float

    @property
    def key(self) -> tuple:
        return (self.method, self.classifier, self.n, self.oversampled, self.fold)

    def row(self) -> list[str]:
        head = [self.method, self.classifier, str(self.n), self.oversampled, str(self.fold)]
        return head + [f"{getattr(self, m):.6f}" for m in METRICS]


@dataclass(frozen=True)
class CellFailure:
    key: tuple
    reason: str


@dataclass
class GridRun:
    results: list[CellResult]   # everything in the store after the run
    new: list[CellResult]       # cells computed by this run
    failures: list[CellFailure]
    skipped: int                # cells already present before the run


def derive_seed(seed: int, *parts) -> int:
    """Stable 32-bit seed from the base seed and a cell key."""
    text = "|".join(str(p) for p in (seed, *parts))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")


def read_results(path) -> list[CellResult]:
    path = Path(path)
    if not path.exists():
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        if header != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        out = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(RESULTS_HEADER):
                raise ValueError(f"{path}:{line}: expected {len(RESULTS_HEADER)} fields, got {len(row)}")
            m, c, n, o, f, *vals = row
            out.append(CellResult(m, c, int(n), o, int(f), *map(float, vals)))
    return out


def _append_results(path: Path, results) -> None:
    new_file = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new_file:
            writer.writerow(RESULTS_HEADER)
        for r in results:
            writer.writerow(r.row())


# ---- featurization ----------------------------------------------------

@dataclass
class _Context:
    corpus: LabeledCorpus
    techniques: dict
    annotations: dict | None
    grid: object
    tokens: list            # stemmed tokens per corpus record
    fit_observer: object = None


_CTX: _Context | None = None


def _init_worker(ctx: _Context) -> None:
    global _CTX
    _CTX = ctx


def _technique_docs(ctx: _Context, label_set) -> list[list[str]]:
    out = []
    for tid in label_set:
        info = ctx.techniques.get(tid)
        if info is None:
            raise KeyError(f"no description for technique {tid}")
        out.append(preprocess(info.description, tid).tokens)
    return out


def _svo_bags(ctx: _Context, doc_ids) -> list[list[str]]:
    bags = []
    for doc_id in doc_ids:
        if doc_id not in ctx.annotations:
            raise KeyError(f"no CoNLL-U annotations for document {doc_id!r}")
        bags.append(svo_bag(t for s in ctx.annotations[doc_id] for t in extract_svo(s)))
    return bags


def featurize(ctx: _Context, method: MethodTag, rows, labels, label_set, fit_rows, fold=None):
    """Feature matrix for corpus ``rows``; fitted parameters see only ``fit_rows`` (positions in ``rows``)."""
    grid = ctx.grid
    docs = [ctx.tokens[i] for i in rows]
    doc_ids = [ctx.corpus.records[i].doc_id for i in rows]
    if ctx.fit_observer is not None and method is not MethodTag.BM25:
        ctx.fit_observer(method.value, fold, [doc_ids[i] for i in fit_rows])
    if method is MethodTag.TFIDF:
        vocab = tfidf_fit([docs[i] for i in fit_rows])
        return tfidf_transform(vocab, docs, labels, MethodTag.TFIDF, label_set)
    if method is MethodTag.LSI:
        fit_docs = [docs[i] for i in fit_rows]
        vocab = tfidf_fit(fit_docs)
        X_fit = tfidf_transform(vocab, fit_docs).values
        k = default_topics(*X_fit.shape, grid.num_topics)
        model = lsi_fit(X_fit, k, seed=grid.seed)
        return lsi_project(model, tfidf_transform(vocab, docs).values, labels, label_set)
    if method is MethodTag.LSI_CO:
        return lsi_co_features(docs, _technique_docs(ctx, label_set), k=grid.num_topics,
                               labels=labels, fit_rows=fit_rows, seed=grid.seed, label_set=label_set)
    if method is MethodTag.TFIDF_NP:
        return tfidf_np_features(doc_ids, ctx.annotations, labels, fit_rows, label_set)
    if method is MethodTag.BM25:
        return bm25_features(_svo_bags(ctx, doc_ids), _svo_bags(ctx, label_set),
                             grid.bm25_k1, grid.bm25_b, labels, label_set)
    raise ValueError(f"unknown method {method}")


# ---- one job ----------------------------------------------------------

def _score_cell(grid, key, X_train: FeatureMatrix, X_test: FeatureMatrix, n: int) -> CellResult:
    method, clf, _, mode, fold = key
    spec = LearnerSpec(LearnerKind(clf), seed=derive_seed(grid.seed, *key))
    model = train(spec, X_train, n_classes=n)
    scores = predict_scores(model, X_test)
    pred = np.argmax(scores, axis=1)
    p, r, f1 = macro_prf(confusion(X_test.labels, pred, n))
    auc = macro_auc(X_test.labels, scores)
    return CellResult(method, clf, n, mode, fold, p, r, f1, auc)


def _fold_seed(grid, n: int) -> int:
    return derive_seed(grid.seed, "folds", n)


def run_job(job) -> tuple[list[CellResult], list[CellFailure]]:
    """Every (classifier, fold) cell of one ``(n, method, mode)`` job, minus ``done`` keys."""
    n, method_name, mode, done = job
    ctx = _CTX
    grid = ctx.grid
    method = MethodTag(method_name)
    keys = [(method_name, c, n, mode, f) for c in grid.classifiers for f in range(grid.K)]
    results: list[CellResult] = []
    failures: list[CellFailure] = []

    def fail_all(fold_keys, exc):
        reason = f"{type(exc).__name__}: {exc}"
        log.debug("job %s failed:\n%s", (n, method_name, mode), traceback.format_exc())
        failures.extend(CellFailure(k, reason) for k in fold_keys if k not in done)

    try:
        sub = select_top_n(ctx.corpus, n)
        index = {id(r): i for i, r in enumerate(ctx.corpus.records)}
        rows = np.array([index[id(r)] for r in sub.records], dtype=np.int64)
        labels = np.asarray(sub.labels(), dtype=np.int64)
        label_set = sub.label_set
        if mode == "full_dataset":
            X = featurize(ctx, method, rows, labels, label_set, np.arange(len(rows)))
            X = smote(X, SmoteConfig(grid.smote_k, SmoteMode.FULL_DATASET,
                                     derive_seed(grid.seed, "smote", n, method_name)))
            plan = stratified_kfold(X.labels, grid.K, _fold_seed(grid, n))
        else:
            X = None
            plan = stratified_kfold(labels, grid.K, _fold_seed(grid, n))
    except Exception as exc:  # noqa: BLE001 - recorded per cell
        fail_all(keys, exc)
        return results, failures

    for fold in range(grid.K):
        fold_keys = [k for k in keys if k[4] == fold]
        if all(k in done for k in fold_keys):
            continue
        train_idx, test_idx = plan.split(fold)
        try:
            if X is not None:
                X_train, X_test = X.take(train_idx), X.take(test_idx)
            else:
                X_fold = featurize(ctx, method, rows, labels, label_set, train_idx, fold)
                X_train, X_test = X_fold.take(train_idx), X_fold.take(test_idx)
                if mode == "train_only":
                    X_train = smote(X_train, SmoteConfig(
                        grid.smote_k, SmoteMode.TRAIN_ONLY,
                        derive_seed(grid.seed, "smote", n, method_name, fold)))
        except Exception as exc:  # noqa: BLE001
            fail_all(fold_keys, exc)
            continue
        for key in fold_keys:
            if key in done:
                continue
            try:
                results.append(_score_cell(grid, key, X_train, X_test, n))
            except Exception as exc:  # noqa: BLE001
                failures.append(CellFailure(key, f"{type(exc).__name__}: {exc}"))
    return results, failures


def grid_keys(grid) -> list[tuple]:
    return [(m, c, n, o, f) for n in grid.n_list for m in grid.methods
            for o in grid.oversample_modes for c in grid.classifiers for f in range(grid.K)]


def worker_count(n_jobs: int) -> int:
    env = os.environ.get("TTPBENCH_WORKERS")
    if env:
        try:
            limit = int(env)
        except ValueError:
            raise ValueError(f"TTPBENCH_WORKERS must be an integer, got {env!r}") from None
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, n_jobs))


def run_grid(corpus: LabeledCorpus, grid, techniques=None, annotations=None,
             out_dir=None, fit_observer=None) -> GridRun:
    """Run every missing cell of ``grid`` and append them to ``out_dir/results.csv``.

    ``techniques`` maps technique id to :class:`TechniqueInfo` (needed by
    LSI-Co and BM25); ``annotations`` maps doc_id to parsed sentences
    (needed by TFIDF-NP and BM25; technique descriptions use the
    technique id as doc_id). ``fit_observer(method, fold, doc_ids)`` is
    called in-process whenever a vocabulary or SVD is fitted, and forces
    a single worker.
    """
    if isinstance(techniques, (list, tuple)):
        techniques = {t.technique_id: t for t in techniques}
    techniques = techniques or {}
    need = [m for m in grid.methods if m in (MethodTag.TFIDF_NP.value, MethodTag.BM25.value)]
    if need and annotations is None:
        raise ValueError(f"methods {need} need CoNLL-U annotations")
    too_big = [n for n in grid.n_list if n > len(corpus.label_set)]
    if too_big:
        raise ValueError(f"n values {too_big} exceed the {len(corpus.label_set)} classes in the corpus")

    out = Path(out_dir if out_dir is not None else grid.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = out / "results.csv"
    existing = read_results(store)
    done = {r.key for r in existing}
    wanted = grid_keys(grid)
    skipped = sum(1 for k in wanted if k in done)

    jobs = []
    for n in grid.n_list:
        for m in grid.methods:
            for o in grid.oversample_modes:
                job_keys = {k for k in wanted if k[0] == m and k[2] == n and k[3] == o}
                if job_keys - done:
                    jobs.append((n, m, o, frozenset(job_keys & done)))

    new: list[CellResult] = []
    failures: list[CellFailure] = []
    if jobs:
        ctx = _Context(corpus, techniques, annotations, grid,
                       [preprocess(r.text, r.doc_id).tokens for r in corpus.records], fit_observer)
        workers = 1 if fit_observer is not None else worker_count(len(jobs))
        if workers == 1:
            _init_worker(ctx)
            outcomes = map(run_job, jobs)
        else:
            pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(ctx,))
            outcomes = pool.map(run_job, jobs)
        try:
            for results, fails in outcomes:
                _append_results(store, results)
                new.extend(results)
                failures.extend(fails)
                for f in fails:
                    log.error("cell %s failed: %s", f.key, f.reason)
        finally:
            if workers > 1:
                pool.shutdown()
    if failures:
        with open(out / "failures.log", "a", encoding="utf-8") as fh:
            for f in failures:
                fh.write("\t".join(map(str, f.key)) + "\t" + f.reason + "\n")
    return GridRun(existing + new, new, failures, skipped)


# ---- aggregation ------------------------------------------------------

SETTING_KEYS = ("method", "classifier", "n", "oversampled")


@dataclass(frozen=True)
class Aggregate:
    keys: dict
    count: int
    stats: dict     # metric -> (min, max, mean)

    def format(self, metric: str) -> str:
        lo, hi, mean = self.stats[metric]
        return f"{percent(lo)}-{percent(hi)}({percent(mean)})"


def fold_means(results) -> dict[tuple, dict[str, float]]:
    """Mean of each metric over folds, per (method, classifier, n, oversampled) setting."""
    groups: dict[tuple, list[CellResult]] = {}
    for r in results:
        groups.setdefault(tuple(getattr(r, k) for k in SETTING_KEYS), []).append(r)
    return {
        key: {m: float(np.mean([getattr(r, m) for r in rs])) for m in METRICS}
        for key, rs in groups.items()
    }


def aggregate(results, group_by) -> list[Aggregate]:
    """Min / max / mean of fold-mean metrics over the settings sharing ``group_by`` values."""
    group_by = tuple(group_by)
    bad = [g for g in group_by if g not in SETTING_KEYS]
    if bad:
        raise ValueError(f"cannot group by {bad}; choose from {SETTING_KEYS}")
    means = fold_means(results)
    if not means:
        raise ValueError("aggregate: no results")
    groups: dict[tuple, list[dict]] = {}
    for setting, vals in means.items():
        row = dict(zip(SETTING_KEYS, setting))
        groups.setdefault(tuple(row[g] for g in group_by), []).append(vals)
    out = []
    for gkey in sorted(groups, key=lambda k: tuple(str(x).zfill(4) if isinstance(x, int) else x for x in k)):
        vals = groups[gkey]
        stats = {}
        for m in METRICS:
            xs = [v[m] for v in vals]
            stats[m] = (min(xs), max(xs), sum(xs) / len(xs))
        out.append(Aggregate(dict(zip(group_by, gkey)), len(vals), stats))
    return out


__all__ = [
    "Aggregate", "CellFailure", "CellResult", "GridRun", "METRICS", "RESULTS_HEADER",
    "aggregate", "derive_seed", "featurize", "fold_means", "grid_keys", "read_results",
    "run_grid", "run_job", "worker_count",
]
