"""
The structured query subset used for retrieval:

    #weight( w1 term1 w2 term2 ... wk #N(c1 c2) )

`#weight` combines its elements by a weight-normalised geometric average and `#N(...)` matches its
terms in order with at most N-1 other tokens between neighbours. A query of a single plain term may
be written bare.
"""

import re
from collections import namedtuple

WEIGHT_DECIMALS = 3

_TOKEN = re.compile(r"#weight\(|#(\d+)\(|\)|[^\s()]+")


class OrderedWindow(namedtuple("OrderedWindow", ["n", "terms"])):
    """ Terms that must appear in order with at most n-1 tokens between neighbours. """
    __slots__ = ()

    def __new__(cls, n, terms):
        terms = tuple(terms)
        if n < 1:
            raise ValueError(f"Window size must be at least 1, got {n}")
        if len(terms) < 2:
            raise ValueError(f"An ordered window needs at least two terms, got {terms}")
        return super().__new__(cls, int(n), terms)

    def __str__(self):
        return f"#{self.n}({' '.join(self.terms)})"


class QueryElement(namedtuple("QueryElement", ["weight", "element"])):
    """ A weight and either a single term (str) or an OrderedWindow. """
    __slots__ = ()

    def __new__(cls, weight, element):
        if weight < 0:
            raise ValueError(f"Weight of {element} is negative: {weight}")
        if isinstance(element, str) and (not element or any(c.isspace() or c in "()#" for c in element)):
            raise ValueError(f"'{element}' is not a valid query term")
        return super().__new__(cls, float(weight), element)


class StructuredQuery(namedtuple("StructuredQuery", ["query_id", "elements"])):
    """ A query id and its weighted elements. """
    __slots__ = ()

    def __new__(cls, query_id, elements):
        elements = tuple(elements)
        if not elements:
            raise ValueError(f"Query {query_id} has no elements")
        return super().__new__(cls, query_id, elements)

    @property
    def weights(self):
        return [e.weight for e in self.elements]

    @property
    def total_weight(self):
        return sum(self.weights)

    def with_weights(self, weights):
        """ The same elements with new weights, rounded as they would be printed. """
        return StructuredQuery(self.query_id, [QueryElement(round(w, WEIGHT_DECIMALS), e.element)
                                               for w, e in zip(weights, self.elements)])


def format_structured_query(q):
    """
    Print a query in the #weight syntax, weights with three decimals.

    :param q: (StructuredQuery) The query.
    :returns: (str) The query text, a bare term for a single plain-term query.
    """
    if len(q.elements) == 1 and isinstance(q.elements[0].element, str):
        return q.elements[0].element

    parts = [f"{e.weight:.{WEIGHT_DECIMALS}f} {e.element}" for e in q.elements]
    return f"#weight( {' '.join(parts)} )"


def parse_structured_query(text, query_id=None):
    """
    Parse the #weight syntax back into a StructuredQuery. A bare term or a bare window has weight 1.

    :param text: (str) The query text.
    :param query_id: (str) The query id to attach.
    :returns: (StructuredQuery) The query.
    """
    tokens = [(m.group(0), m.group(1)) for m in _TOKEN.finditer(text)]
    if not tokens:
        raise ValueError("Empty structured query")

    position = 0

    def take():
        nonlocal position
        if position >= len(tokens):
            raise ValueError(f"Unexpected end of query '{text}'")
        token = tokens[position]
        position += 1
        return token

    def element():
        token, window = take()
        if window is not None:
            terms = []
            while True:
                term, nested = take()
                if term == ")":
                    break
                if nested is not None or term.startswith("#"):
                    raise ValueError(f"Operators cannot be nested in a window: '{text}'")
                terms.append(term)
            return OrderedWindow(int(window), terms)
        if token.startswith("#") or token == ")":
            raise ValueError(f"Expected a term or window, got '{token}' in '{text}'")
        return token

    if tokens[0][0] == "#weight(":
        position = 1
        elements = []
        while True:
            token, _ = take()
            if token == ")":
                break
            try:
                weight = float(token)
            except ValueError:
                raise ValueError(f"Expected a weight, got '{token}' in '{text}'")
            elements.append(QueryElement(weight, element()))
        query = StructuredQuery(query_id, elements)
    else:
        query = StructuredQuery(query_id, [QueryElement(1.0, element())])

    if position != len(tokens):
        raise ValueError(f"Trailing text after query in '{text}'")
    return query
