import pytest

from query_expansion.exceptions import MalformedLineError
from query_expansion.parsing.dependencies import Word, parse_dependencies, parse_dependency_line, read_parse_file


def test_parse_dependency_line():
    dep = parse_dependency_line("amod(prisons-4, overcrowded-3)")

    assert dep.relation == "amod"
    assert dep.head == Word("prisons", 4)
    assert dep.dependent == Word("overcrowded", 3)
    assert dep.words() == [Word("prisons", 4), Word("overcrowded", 3)]


def test_relation_word_rows_have_no_dependent():
    dep = parse_dependency_line("prep_for(for-3, -)")

    assert dep.relation == "prep_for"
    assert dep.head == Word("for", 3)
    assert dep.dependent is None
    assert dep.words() == [Word("for", 3)]


def test_hyphenated_words_and_copy_nodes():
    dep = parse_dependency_line("conj_and(well-known-2', long-term-5)")

    assert dep.head == Word("well-known", 2)
    assert dep.dependent == Word("long-term", 5)


def test_ncp_units_and_case():
    dep = parse_dependency_line("NN(Hostage_Takers-5, Lebanese-4)")

    assert dep.relation == "nn"
    assert dep.head.term == "Hostage_Takers"


def test_malformed_line():
    with pytest.raises(MalformedLineError) as err:
        parse_dependencies("amod(prisons-4, overcrowded-3)\n\namod(prisons, overcrowded)\n", path="q.txt")

    assert err.value.line_number == 3
    assert "q.txt:3" in str(err.value)


def test_read_parse_file(parses):
    assert sorted(parses) == ["301", "302", "303", "304", "305"]
    assert [d.relation for d in parses["301"]] == ["amod", "prep_with", "prep_with"]
    assert parses["302"][1].relation == "undef"


def test_dependencies_need_a_header(tmp_path):
    path = tmp_path / "parses.txt"
    path.write_text("amod(prisons-4, overcrowded-3)\n")

    with pytest.raises(MalformedLineError):
        read_parse_file(str(path))
