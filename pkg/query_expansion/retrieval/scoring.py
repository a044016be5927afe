"""
Query likelihood retrieval with Dirichlet smoothing.

A term scores log((tf + mu * cf / |C|) / (|D| + mu)) in a document. Ordered windows score the same way with
window counts standing in for tf and cf. A #weight query scores the weight-normalised sum of its element
log scores, i.e. the log of their weighted geometric average.
"""

import logging

import numpy as np

from query_expansion import CONFIG
from query_expansion.exceptions import EvaluationError
from query_expansion.retrieval.evaluation import RunResult
from query_expansion.retrieval.index import analyse, ordered_window_count
from query_expansion.retrieval.query_language import OrderedWindow

logger = logging.getLogger(__name__)

DEFAULT_MU = CONFIG['retrieval']['mu']


def _dirichlet(tf, cf, doc_lengths, collection_length, mu):
    if cf > 0:
        return np.log((tf + mu * cf / collection_length) / (doc_lengths + mu))
    # a collection of empty documents counts as one token so unseen terms keep a finite floor
    epsilon = 1.0 / (10 * max(collection_length, 1))
    return np.log(mu * epsilon / (doc_lengths + mu)) + np.zeros_like(tf)


def element_scores(element, index, mu=DEFAULT_MU):
    """
    Log score of a query element in every document of the collection.

    :param element: (str or OrderedWindow) A term or an ordered window, unanalysed.
    :param index: (CollectionIndex) The collection.
    :param mu: (float) The Dirichlet prior.
    :returns: (numpy.ndarray) Score per document in collection order.
    """
    if mu <= 0:
        raise ValueError(f"Dirichlet prior must be positive, got {mu}")
    if not len(index):
        return np.zeros(0)

    if isinstance(element, OrderedWindow):
        counts = index.window_vector(tuple(analyse(t) for t in element.terms), element.n)
    else:
        counts = index.term_vector(analyse(element))

    cf = counts.sum()
    if cf == 0:
        logger.debug(f"'{element}' does not occur in the collection, scoring it with the floor")
    return _dirichlet(counts, cf, index.doc_lengths, index.collection_length, mu)


def term_score(term, doc, index, mu=DEFAULT_MU):
    """
    :param term: (str) The query term, analysed here.
    :param doc: (str) The document id.
    :param index: (CollectionIndex) The collection.
    :param mu: (float) The Dirichlet prior.
    :returns: (float) Log probability of the term in the document.
    """
    return float(element_scores(term, index, mu)[index.position(doc)])


def score_weighted(q, doc, index, mu=DEFAULT_MU):
    """
    :param q: (StructuredQuery) The query.
    :param doc: (str) The document id.
    :param index: (CollectionIndex) The collection.
    :param mu: (float) The Dirichlet prior.
    :returns: (float) Weight-normalised sum of the element log scores.
    """
    matrix = ScoreMatrix(index, [e.element for e in q.elements], mu)
    return float(matrix.scores(q.weights)[index.position(doc)])


class ScoreMatrix:
    """
    Element by document log scores of a fixed list of query elements, so that any weight vector over
    those elements is scored with one matrix product.

    :param index: (CollectionIndex) The collection.
    :param elements: (list) Terms and OrderedWindows.
    :param mu: (float) The Dirichlet prior.
    """

    def __init__(self, index, elements, mu=DEFAULT_MU):
        self.index = index
        self.elements = list(elements)
        self.mu = mu
        if len(index):
            self.matrix = np.vstack([element_scores(e, index, mu) for e in self.elements])
        else:
            self.matrix = np.zeros((len(self.elements), 0))

    def scores(self, weights):
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(self.elements),):
            raise ValueError(f"Expected {len(self.elements)} weights, got {weights.shape}")
        total = weights.sum()
        if total <= 0:
            raise EvaluationError("All query weights are zero")
        return weights @ self.matrix / total

    def rank(self, query_id, weights, k=None):
        """
        :returns: (RunResult) The top k documents, ties broken by ascending doc id.
        """
        if not len(self.index):
            return RunResult(query_id, [])
        scores = self.scores(weights)
        order = np.lexsort((self.index.doc_id_rank, -scores))
        if k is not None:
            order = order[:k]
        return RunResult(query_id, [(self.index.doc_ids[i], float(scores[i])) for i in order])


def retrieve(index, q, k=None, mu=DEFAULT_MU):
    """
    Rank the collection for a structured query.

    :param index: (CollectionIndex) The collection.
    :param q: (StructuredQuery) The query.
    :param k: (int) Number of documents to return, defaults to the configured depth.
    :param mu: (float) The Dirichlet prior.
    :returns: (RunResult) The ranking.
    """
    if k is None:
        k = CONFIG['retrieval']['depth']
    if k < 1:
        raise ValueError(f"Retrieval depth must be positive, got {k}")
    return ScoreMatrix(index, [e.element for e in q.elements], mu).rank(q.query_id, q.weights, k)
