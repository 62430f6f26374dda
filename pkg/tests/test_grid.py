import numpy as np
import pytest

from ttpbench.config import GridConfig
from ttpbench.evaluation import aggregate, derive_seed, grid_keys, read_results, run_grid
from ttpbench.evaluation.grid import CellResult


def small(tmp_path, **kw):
    base = dict(methods=["TFIDF"], classifiers=["KNN"], n_list=[2], oversample_modes=["none"])
    base.update(kw)
    return GridConfig("unused", str(tmp_path), **base)


def test_cell_count_one_setting(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    run = run_grid(corpus, small(tmp_path), tech, ann)
    assert len(run.new) == 5 and not run.failures
    assert [r.fold for r in run.new] == [0, 1, 2, 3, 4]
    run = run_grid(corpus, small(tmp_path / "b", oversample_modes=["none", "full_dataset"]), tech, ann)
    assert len(run.new) == 10


def test_full_product_arithmetic():
    g = GridConfig("b", "o", oversample_modes=["none", "full_dataset"])
    keys = grid_keys(g)
    assert len(keys) == 5 * 6 * 6 * 2 * 5 == 1800
    assert len(set(keys)) == 1800


def test_resume_runs_nothing(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    grid = small(tmp_path)
    first = run_grid(corpus, grid, tech, ann)
    before = (tmp_path / "results.csv").read_bytes()
    again = run_grid(corpus, grid, tech, ann)
    assert len(again.new) == 0 and again.skipped == 5
    assert (tmp_path / "results.csv").read_bytes() == before
    assert len(again.results) == len(first.results)


def test_partial_resume_fills_gaps(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    full = run_grid(corpus, small(tmp_path / "full"), tech, ann)
    store = tmp_path / "part" / "results.csv"
    store.parent.mkdir()
    lines = (tmp_path / "full" / "results.csv").read_text().splitlines(keepends=True)
    store.write_text("".join(lines[:3]))  # header plus folds 0 and 1
    run = run_grid(corpus, small(tmp_path / "part"), tech, ann)
    assert [r.fold for r in run.new] == [2, 3, 4]
    assert sorted(r.key for r in read_results(store)) == sorted(r.key for r in full.results)


def test_byte_identical_reruns(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    kw = dict(methods=["TFIDF", "LSI", "BM25"], classifiers=["KNN", "NB", "SVM"],
              oversample_modes=["none", "full_dataset", "train_only"])
    run_grid(corpus, small(tmp_path / "a", **kw), tech, ann)
    run_grid(corpus, small(tmp_path / "b", **kw), tech, ann)
    a = (tmp_path / "a" / "results.csv").read_bytes()
    assert a == (tmp_path / "b" / "results.csv").read_bytes()
    assert a.count(b"\n") == 1 + 3 * 3 * 3 * 5


def test_seed_changes_results(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    kw = dict(classifiers=["SVM"], oversample_modes=["full_dataset"])
    a = run_grid(corpus, small(tmp_path / "a", seed=0, **kw), tech, ann).results
    b = run_grid(corpus, small(tmp_path / "b", seed=1, **kw), tech, ann).results
    assert [r.row() for r in a] != [r.row() for r in b]


@pytest.mark.parametrize("mode", ["none", "train_only"])
@pytest.mark.parametrize("method", ["TFIDF", "TFIDF_NP", "LSI", "LSI_CO"])
def test_no_test_fold_leakage(tmp_path, synth_inputs, method, mode):
    corpus, tech, ann = synth_inputs
    seen = []
    grid = small(tmp_path, methods=[method], oversample_modes=[mode])
    run_grid(corpus, grid, tech, ann, fit_observer=lambda m, f, ids: seen.append((f, set(ids))))
    assert [f for f, _ in seen] == [0, 1, 2, 3, 4]
    from ttpbench.attack_ingest import select_top_n
    from ttpbench.evaluation import stratified_kfold
    sub = select_top_n(corpus, 2)
    plan = stratified_kfold(sub.labels(), 5, derive_seed(0, "folds", 2))
    doc_ids = np.array([r.doc_id for r in sub.records])
    for fold, ids in seen:
        train, test = plan.split(fold)
        assert not ids & set(doc_ids[test])
        assert set(doc_ids[train]) <= ids
        assert ids - set(doc_ids) <= set(tech)  # only technique descriptions added


def test_full_dataset_fits_once_on_everything(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    seen = []
    grid = small(tmp_path, oversample_modes=["full_dataset"])
    run_grid(corpus, grid, tech, ann, fit_observer=lambda m, f, ids: seen.append((f, ids)))
    assert len(seen) == 1 and seen[0][0] is None


def test_missing_annotations_rejected(tmp_path, synth_inputs):
    corpus, tech, _ = synth_inputs
    with pytest.raises(ValueError, match="annotations"):
        run_grid(corpus, small(tmp_path, methods=["BM25"]), tech, None)
    with pytest.raises(ValueError, match="exceed"):
        run_grid(corpus, small(tmp_path, n_list=[16]), tech, None)


def test_failures_are_logged(tmp_path, synth_inputs):
    corpus, tech, ann = synth_inputs
    # TFIDF-NP without the annotation for any record: featurization fails for every cell
    empty = {k: v for k, v in ann.items() if k in tech}
    run = run_grid(corpus, small(tmp_path, methods=["TFIDF_NP"]), tech, empty)
    assert len(run.failures) == 5 and not run.new
    log = (tmp_path / "failures.log").read_text().splitlines()
    assert len(log) == 5 and log[0].startswith("TFIDF_NP\tKNN\t2\tnone\t0\t")


def _cell(method, clf, n, fold, f1):
    return CellResult(method, clf, n, "none", fold, f1, f1, f1, f1)


def test_aggregate_uses_fold_means():
    rs = [_cell("LSI", "KNN", 2, 0, 0.6), _cell("LSI", "KNN", 2, 1, 0.8),
          _cell("LSI", "NB", 2, 0, 0.9), _cell("LSI", "NB", 2, 1, 0.9),
          _cell("BM25", "KNN", 2, 0, 0.5)]
    aggs = aggregate(rs, ["method"])
    assert [a.keys["method"] for a in aggs] == ["BM25", "LSI"]
    lsi = aggs[1]
    assert lsi.count == 2
    assert lsi.stats["f1"] == pytest.approx((0.7, 0.9, 0.8))
    assert lsi.format("f1") == "70-90(80)"
    with pytest.raises(ValueError):
        aggregate(rs, ["colour"])
    with pytest.raises(ValueError):
        aggregate([], ["method"])


def test_derive_seed_stable():
    assert derive_seed(0, "folds", 2) == derive_seed(0, "folds", 2)
    assert derive_seed(0, "folds", 2) != derive_seed(0, "folds", 4)
    assert 0 <= derive_seed(123, "x") < 2**32
