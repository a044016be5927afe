import pytest

from query_expansion.text.lex import (StopList, UnigramFrequencyTable, is_clean_term, is_stopword, load_stoplist,
                                      porter_stem, tokenize)

from .conftest import data_path


@pytest.mark.parametrize("term, stem", [
    ("coping", "cope"),
    ("prisons", "prison"),
    ("caresses", "caress"),
    ("ponies", "poni"),
    ("run", "run"),
    ("banned", "ban"),
    ("bans", "ban"),
    ("overcrowded", "overcrowd"),
    ("agreed", "agre"),
    ("feed", "feed"),
    ("sized", "size"),
    ("filing", "file"),
    ("falling", "fall"),
    ("happy", "happi"),
    ("sky", "sky"),
    ("relational", "relat"),
    ("conditional", "condit"),
    ("rational", "ration"),
    ("generalizations", "gener"),
    ("oscillators", "oscil"),
    ("hopefulness", "hope"),
])
def test_porter_stem(term, stem):
    assert porter_stem(term) == stem


def test_porter_stem_leaves_non_alphabetic_terms():
    assert porter_stem("United_States") == "United_States"
    assert porter_stem("108") == "108"
    assert porter_stem("") == ""


def test_porter_vocabulary():
    """ The opening entries of Martin Porter's test vocabulary with his reference output. """
    with open(data_path("porter_vocabulary.txt")) as f:
        words = f.read().split()
    with open(data_path("porter_output.txt")) as f:
        stems = f.read().split()

    assert len(words) == len(stems)
    mismatches = [(w, s, porter_stem(w)) for w, s in zip(words, stems) if porter_stem(w) != s]
    assert mismatches == []


def test_tokenize_strips_edge_punctuation():
    assert tokenize("Coping, with (overcrowded) prisons?") == ["Coping", "with", "overcrowded", "prisons"]
    assert tokenize("United_States well-known") == ["United_States", "well-known"]
    assert tokenize("  ... ") == []


def test_stoplist():
    stoplist = load_stoplist()

    assert len(stoplist) > 100
    assert is_stopword("with", stoplist)
    assert is_stopword("The", stoplist)
    assert not is_stopword("prisons", stoplist)
    assert not is_stopword("", stoplist)


def test_stoplist_rejects_phrases():
    with pytest.raises(ValueError):
        StopList(["of the"])


@pytest.mark.parametrize("term, ncp, clean", [
    ("prisons", False, True),
    ("108", False, False),
    ("13/jan/06", False, False),
    ("café", False, False),
    ("well-known", False, False),
    ("United_States", False, False),
    ("United_States", True, True),
    ("United__States", True, False),
    ("", False, False),
])
def test_is_clean_term(term, ncp, clean):
    assert is_clean_term(term, ncp) is clean


def test_unigram_table(unigrams):
    assert unigrams.frequency("state") == 900
    assert unigrams.frequency("State") == 900
    assert unigrams.frequency("United_States") == 3000
    assert unigrams.frequency("nowhere") == 0


def test_unigram_table_sums_case_variants():
    table = UnigramFrequencyTable({"Prison": 3, "prison": 4})
    assert table.frequency("prison") == 7

    with pytest.raises(ValueError):
        UnigramFrequencyTable({"prison": -1})
