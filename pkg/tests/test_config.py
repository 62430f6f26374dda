import json

import pytest

from ttpbench.config import ConfigError, GridConfig, normalize_classifier, normalize_method


def test_defaults():
    g = GridConfig("b.json", "out")
    assert g.methods == ["TFIDF", "TFIDF_NP", "LSI", "LSI_CO", "BM25"]
    assert g.classifiers == ["KNN", "NB", "SVM", "DT", "RF", "NN"]
    assert g.n_list == [2, 4, 8, 16, 32, 64]
    assert (g.K, g.seed, g.min_support, g.num_topics, g.smote_k) == (5, 0, 30, 500, 6)
    assert (g.bm25_k1, g.bm25_b) == (1.5, 0.75)
    assert g.needs_annotations() == ["TFIDF_NP", "BM25"]


def test_round_trip():
    g = GridConfig("b.json", "out", methods=["M:LSI-Co", "tfidf"], n_list=[4, 2], seed=9)
    back = GridConfig.from_json(g.to_json())
    assert back == g
    assert back.methods == ["LSI_CO", "TFIDF"]


def test_aliases():
    assert normalize_method("M:TFIDF-NP") == "TFIDF_NP"
    assert normalize_method(" bm25 ") == "BM25"
    assert normalize_classifier("rf") == "RF"


@pytest.mark.parametrize("data,match", [
    ({"methods": ["WORD2VEC"]}, "unknown method"),
    ({"classifiers": ["XGB"]}, "unknown classifier"),
    ({"n_list": [3]}, "n_list"),
    ({"oversample_modes": ["sometimes"]}, "oversample"),
    ({"K": 1}, "K"),
    ({"colour": "red"}, "unknown config key"),
])
def test_rejects(data, match):
    with pytest.raises(ConfigError, match=match):
        GridConfig.from_dict({"bundle_path": "b", "out_dir": "o", **data})


def test_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigError, match="missing"):
        GridConfig.from_dict({"bundle_path": "b"})
    with pytest.raises(ConfigError, match="JSON"):
        GridConfig.from_json("{")
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"bundle_path": "b", "out_dir": "o"}))
    assert GridConfig.load(path).out_dir == "o"


def test_shipped_full_grid_config():
    from pathlib import Path

    from ttpbench.evaluation import grid_keys

    g = GridConfig.load(Path(__file__).parent.parent / "configs" / "full_grid.json")
    assert len(grid_keys(g)) == 1800
