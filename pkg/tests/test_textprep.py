from hypothesis import given, settings, strategies as st

from ttpbench.porter import stem
from ttpbench.textprep import clean, preprocess, stopwords, tokenize


def test_clean_examples():
    assert clean("") == ""
    assert clean("see https://x.y/z for details") == "see  for details"
    assert clean("uses PowerShell(Citation: FireEye 2020) daily") == "uses PowerShell daily"


def test_clean_leaves_other_text():
    text = "APT29 (the group) ran cmd.exe"
    assert clean(text) == text


def test_preprocess_golden():
    assert preprocess("").tokens == []
    assert preprocess("APT29 has used encoded PowerShell scripts").tokens == [
        "apt29", "us", "encod", "powershel", "script"]
    assert preprocess("the of and").tokens == []


def test_preprocess_strips_citations_and_urls():
    doc = preprocess("Emotet used https://evil.example/a.ps1 scripts.(Citation: Foo 2019)", "d1")
    assert doc.doc_id == "d1"
    assert doc.tokens == ["emotet", "us", "script"]
    assert doc.raw_len == len("Emotet used https://evil.example/a.ps1 scripts.(Citation: Foo 2019)")


def test_non_ascii_letters_pass_through():
    # only A-Z are lowercased; other letters stay as they are
    assert tokenize("ÄRGER")[0].startswith("Ä")
    assert tokenize("Ärger")[0].startswith("Ä")


def test_stopword_list_shape():
    words = stopwords()
    assert 300 <= len(words) <= 340
    assert "the" in words and "us" not in words


def test_porter_reference_words():
    # from Porter's published vocabulary / output pairs
    pairs = {
        "caresses": "caress", "ponies": "poni", "ties": "ti", "cats": "cat", "feed": "feed",
        "agreed": "agre", "plastered": "plaster", "motoring": "motor", "sing": "sing",
        "conflated": "conflat", "troubled": "troubl", "sized": "size", "hopping": "hop",
        "falling": "fall", "filing": "file", "happy": "happi", "relational": "relat",
        "conditional": "condit", "valenci": "valenc", "digitizer": "digit",
        "operator": "oper", "feudalism": "feudal", "decisiveness": "decis",
        "hopefulness": "hope", "formaliti": "formal", "triplicate": "triplic",
        "formative": "form", "electrical": "electr", "revival": "reviv",
        "adjustable": "adjust", "adoption": "adopt", "activate": "activ",
        "effective": "effect", "probate": "probat", "controll": "control", "roll": "roll",
        "generalization": "gener", "oscillators": "oscil",
    }
    for word, expected in pairs.items():
        assert stem(word) == expected, word


word = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=12)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.one_of(word, st.sampled_from(["the", "used", "us", "http://x", "-", "42"])), max_size=12))
def test_preprocess_idempotent_and_stopword_free(words):
    tokens = preprocess(" ".join(words)).tokens
    assert preprocess(" ".join(tokens)).tokens == tokens
    sw = stopwords()
    for t in tokens:
        assert t and t not in sw and len(t) >= 2
        assert t.isalnum()
