import pytest

from query_expansion.retrieval.query_language import (OrderedWindow, QueryElement, StructuredQuery,
                                                      format_structured_query, parse_structured_query)


def test_format_and_parse():
    text = "#weight( 0.157 coping 0.000 with 0.859 prisons 0.064 #2(united states) )"
    query = parse_structured_query(text, query_id="301")

    assert query.query_id == "301"
    assert query.weights == [0.157, 0.0, 0.859, 0.064]
    assert query.elements[3].element == OrderedWindow(2, ("united", "states"))
    assert format_structured_query(query) == text


def test_single_term_is_bare():
    query = StructuredQuery("q", [QueryElement(1.0, "prisons")])

    assert format_structured_query(query) == "prisons"
    assert parse_structured_query("prisons").elements == (QueryElement(1.0, "prisons"),)


def test_single_window_keeps_the_operator():
    query = StructuredQuery("q", [QueryElement(1.0, OrderedWindow(2, ["united", "states"]))])
    assert format_structured_query(query) == "#weight( 1.000 #2(united states) )"


def test_with_weights_rounds():
    query = StructuredQuery("q", [QueryElement(1.0, "a"), QueryElement(1.0, "b")])
    assert query.with_weights([0.12345, 0.9996]).weights == [0.123, 1.0]
    assert query.total_weight == 2.0


@pytest.mark.parametrize("text", [
    "",
    "#weight( 0.5 )",
    "#weight( 0.5 prisons",
    "#weight( high prisons )",
    "#2(#1(a b) c)",
    "prisons jails",
])
def test_malformed_queries(text):
    with pytest.raises(ValueError):
        parse_structured_query(text)


def test_element_validation():
    with pytest.raises(ValueError):
        QueryElement(-0.1, "prisons")
    with pytest.raises(ValueError):
        QueryElement(1.0, "two words")
    with pytest.raises(ValueError):
        OrderedWindow(0, ["a", "b"])
    with pytest.raises(ValueError):
        OrderedWindow(1, ["a"])
    with pytest.raises(ValueError):
        StructuredQuery("q", [])
