"""Exit criteria. Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line.

Criteria 1-6 need the ATT&CK v9 STIX bundle (``TTPBENCH_BUNDLE``) and,
for the methods built on parses, a CoNLL-U file covering its corpus
(``TTPBENCH_CONLLU``). Without them those criteria fail with a message
saying so. ``TTPBENCH_ACCEPT_OUT`` keeps the grid results between runs so
an interrupted run resumes.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from ttpbench.annotations import group_by_doc, read_conllu
from ttpbench.attack_ingest import filter_min_support, load_attack_bundle, select_top_n
from ttpbench.config import GridConfig
from ttpbench.evaluation import fold_means, run_grid
from ttpbench.features import MethodTag, tfidf_fit, tfidf_transform
from ttpbench.sampling import SmoteConfig, SmoteMode, smote
from ttpbench.textprep import preprocess

pytestmark = pytest.mark.acceptance

HERE = Path(__file__).parent
ALL_METHODS = ["TFIDF", "TFIDF_NP", "LSI", "LSI_CO", "BM25"]
ALL_CLASSIFIERS = ["KNN", "NB", "SVM", "DT", "RF", "NN"]


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"
    return emit


def _env_path(name):
    value = os.environ.get(name)
    return Path(value) if value and Path(value).exists() else None


@pytest.fixture(scope="module")
def bundle():
    return _env_path("TTPBENCH_BUNDLE")


@pytest.fixture(scope="module")
def loaded(bundle):
    if bundle is None:
        return None
    t0 = time.perf_counter()
    records, techniques = load_attack_bundle(bundle)
    corpus = filter_min_support(records, 30)
    return records, techniques, corpus, time.perf_counter() - t0


def _need_bundle(verdict, number, loaded):
    if loaded is None:
        verdict(number, False, "ATT&CK v9 bundle not available (set TTPBENCH_BUNDLE)")


def _need_conllu(verdict, number):
    path = _env_path("TTPBENCH_CONLLU")
    if path is None:
        verdict(number, False, "CoNLL-U parses of the corpus not available (set TTPBENCH_CONLLU); "
                               "TFIDF_NP and BM25 need them")
    return group_by_doc(read_conllu(path))


@pytest.fixture(scope="module")
def grid_results(loaded, bundle, tmp_path_factory):
    """Fold results for n in {2,4,8} (both modes) and n=32 (no oversampling), all methods."""
    def run(verdict, number):
        _need_bundle(verdict, number, loaded)
        annotations = _need_conllu(verdict, number)
        _, techniques, corpus, _ = loaded
        out = Path(os.environ.get("TTPBENCH_ACCEPT_OUT") or tmp_path_factory.mktemp("accept"))
        tech = {t.technique_id: t for t in techniques}
        results = []
        for n_list, modes in (([2, 4, 8], ["none", "full_dataset"]), ([32], ["none"])):
            grid = GridConfig(str(bundle), str(out), methods=ALL_METHODS, classifiers=ALL_CLASSIFIERS,
                              n_list=n_list, oversample_modes=modes)
            run_ = run_grid(corpus, grid, tech, annotations, out)
            if run_.failures:
                verdict(number, False, f"{len(run_.failures)} grid cells failed, see {out}/failures.log")
            results = run_.results
        return fold_means(results)
    return run


def test_1_golden_counts(verdict, loaded):
    _need_bundle(verdict, 1, loaded)
    records, _, corpus, seconds = loaded
    got = (len(records), len({r.technique_id for r in records}), len(corpus), len(corpus.label_set))
    ok = got == (8104, 170, 7061, 64) and seconds < 30
    verdict(1, ok, f"records/techniques {got}, expected (8104, 170, 7061, 64); ingest {seconds:.1f}s < 30s")


def test_2_top_n_counts(verdict, loaded):
    _need_bundle(verdict, 2, loaded)
    corpus = loaded[2]
    sizes, smoted = [], []
    for n in (2, 4, 8, 16, 32, 64):
        sub = select_top_n(corpus, n)
        sizes.append(len(sub))
        docs = [preprocess(r.text, r.doc_id).tokens for r in sub.records]
        X = tfidf_transform(tfidf_fit(docs), docs, sub.labels(), MethodTag.TFIDF, sub.label_set)
        smoted.append(smote(X, SmoteConfig(6, SmoteMode.FULL_DATASET, 0)).rows)
    ok = sizes == [890, 1492, 2448, 3688, 5390, 7061] and smoted == [1064, 2128, 4256, 8512, 17024, 34048]
    verdict(2, ok, f"top-n {sizes}, after SMOTE {smoted}")


def test_3_score_parity(verdict, loaded, bundle, tmp_path):
    _need_bundle(verdict, 3, loaded)
    _, techniques, corpus, _ = loaded
    grid = GridConfig(str(bundle), str(tmp_path), methods=["TFIDF"], classifiers=["SVM", "NB"],
                      n_list=[2], oversample_modes=["none"])
    means = fold_means(run_grid(corpus, grid, techniques).results)
    svm = means[("TFIDF", "SVM", 2, "none")]
    nb = means[("TFIDF", "NB", 2, "none")]
    ok = svm["f1"] >= 0.85 and svm["auc"] >= 0.95 and abs(nb["f1"] - 0.71) <= 0.15
    verdict(3, ok, f"TFIDF+SVM F1 {svm['f1']:.3f} (>=0.85) AUC {svm['auc']:.3f} (>=0.95); "
                   f"TFIDF+NB F1 {nb['f1']:.3f} (0.71 +/- 0.15)")


def _mean_f1(means, method, ns, mode, classifiers=None):
    vals = [v["f1"] for (m, c, n, o), v in means.items()
            if m == method and n in ns and o == mode and (classifiers is None or c in classifiers)]
    return float(np.mean(vals)) if vals else float("nan")


def test_4_method_ordering(verdict, grid_results):
    means = grid_results(verdict, 4)
    f = {m: _mean_f1(means, m, (2, 4, 8), "none") for m in ("TFIDF", "LSI", "LSI_CO")}
    ok = f["TFIDF"] > f["LSI_CO"] and f["LSI"] > f["LSI_CO"]
    verdict(4, ok, "mean F1 over n in {2,4,8}: " + ", ".join(f"{k} {v:.3f}" for k, v in f.items()))


def test_5_oversampling_gain(verdict, grid_results):
    means = grid_results(verdict, 5)
    parts, ok = [], True
    for m in ALL_METHODS:
        no = _mean_f1(means, m, (2, 4, 8), "none")
        yes = _mean_f1(means, m, (2, 4, 8), "full_dataset")
        ok &= yes > no
        parts.append(f"{m} {no:.3f}->{yes:.3f}")
    verdict(5, ok, "mean F1 without -> with SMOTE: " + ", ".join(parts))


def test_6_label_growth(verdict, grid_results):
    means = grid_results(verdict, 6)
    parts, ok = [], True
    for m in ALL_METHODS:
        best = max(ALL_CLASSIFIERS, key=lambda c: _mean_f1(means, m, (2, 8, 32), "none", {c}))
        f = [_mean_f1(means, m, (n,), "none", {best}) for n in (2, 8, 32)]
        ok &= f[0] > f[1] > f[2]
        parts.append(f"{m}/{best} " + ">".join(f"{x:.3f}" for x in f))
    verdict(6, ok, "F1 at n=2,8,32: " + ", ".join(parts))


PROPERTY_SUITE = [
    "tests/test_features.py::test_tfidf_matches_scalar_oracle_and_unit_norm",
    "tests/test_features.py::test_dense_svd_orthonormal_and_oracle",
    "tests/test_features.py::test_randomized_path_orthonormal_and_accurate",
    "tests/test_features.py::test_dense_svd_oracle_at_500_scale",
    "tests/test_sampling.py::test_segment_property_and_counts",
    "tests/test_metrics.py::test_prf_matches_brute_force",
    "tests/test_metrics.py::test_auc_matches_pairwise",
    "tests/test_learners.py::test_mlp_gradient_check",
    "tests/test_learners.py::test_rf_single_tree_equals_dt",
    "tests/test_learners.py::test_dt_matches_textbook_oracle",
    "tests/test_grid.py::test_byte_identical_reruns",
]


def test_7_property_suites(verdict):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SUITE],
                          cwd=HERE.parent, capture_output=True, text=True)
    seconds = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    verdict(7, proc.returncode == 0 and seconds < 300, f"{summary}; {seconds:.0f}s < 300s")


def test_8_svo_audit(verdict):
    from test_annotations import svo_audit_recall

    sentences = read_conllu(HERE / "fixtures" / "svo_audit.conllu")
    recall = svo_audit_recall()
    verdict(8, len(sentences) >= 30 and recall >= 0.74,
            f"SVO recall {recall:.3f} (>=0.74) on {len(sentences)} hand-annotated sentences")
