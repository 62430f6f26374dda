import pytest

from synth import make_dataset


@pytest.fixture(scope="session")
def synth_data(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp("synth"))


@pytest.fixture(scope="session")
def synth_inputs(synth_data):
    """``(corpus, techniques, annotations)`` for the synthetic bundle at min_support=30."""
    from ttpbench.annotations import group_by_doc, read_conllu
    from ttpbench.attack_ingest import filter_min_support, load_attack_bundle

    records, techniques = load_attack_bundle(synth_data["bundle"])
    corpus = filter_min_support(records, 30)
    annotations = group_by_doc(read_conllu(synth_data["conllu"]))
    return corpus, {t.technique_id: t for t in techniques}, annotations
