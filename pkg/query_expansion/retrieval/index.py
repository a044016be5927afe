"""
In-memory positional index of a document collection. Stop words are kept and every token is
lowercased and Porter stemmed, the same treatment query terms get at scoring time.
"""

import csv
import logging
import os
import threading
from collections import Counter, defaultdict

import numpy as np
import pandas as pd

from query_expansion.exceptions import DuplicateDocumentError
from query_expansion.text.lex import porter_stem, tokenize

logger = logging.getLogger(__name__)


def analyse(term):
    """ Lowercase and stem a term the way document tokens are indexed. """
    return porter_stem(term.lower())


class CollectionIndex:
    """
    Term statistics of a document collection.

    :param doc_ids: (list) Document identifiers in collection order.
    :param doc_tokens: (list) The analysed tokens of each document.
    """

    def __init__(self, doc_ids, doc_tokens):
        self.doc_ids = list(doc_ids)
        self.doc_tokens = [list(tokens) for tokens in doc_tokens]
        self._positions = {doc_id: i for i, doc_id in enumerate(self.doc_ids)}
        # rank of each doc id in sorted order, the tie breaker of rankings
        self.doc_id_rank = np.empty(len(self.doc_ids), dtype=int)
        self.doc_id_rank[sorted(range(len(self.doc_ids)), key=self.doc_ids.__getitem__)] = np.arange(len(self.doc_ids))

        self.postings = defaultdict(dict)
        self.collection_tf = Counter()
        for i, tokens in enumerate(self.doc_tokens):
            for term, tf in Counter(tokens).items():
                self.postings[term][i] = tf
                self.collection_tf[term] += tf

        self.doc_lengths = np.array([len(tokens) for tokens in self.doc_tokens], dtype=float)
        self.collection_length = int(self.doc_lengths.sum())

        self._window_cache = {}
        self._window_lock = threading.Lock()

    def __len__(self):
        return len(self.doc_ids)

    def position(self, doc_id):
        """ Collection position of a document id. """
        try:
            return self._positions[doc_id]
        except KeyError:
            raise KeyError(f"Document {doc_id} is not in the collection")

    def tf(self, term, doc_id):
        """ Frequency of an analysed term in a document. """
        return self.postings.get(term, {}).get(self.position(doc_id), 0)

    def term_vector(self, term):
        """
        :param term: (str) An analysed term.
        :returns: (numpy.ndarray) Frequency of the term in every document.
        """
        counts = np.zeros(len(self.doc_ids))
        for i, tf in self.postings.get(term, {}).items():
            counts[i] = tf
        return counts

    def window_vector(self, terms, n):
        """
        Ordered window counts of analysed terms in every document. Computed once per (terms, n) and cached.

        :param terms: (tuple) The analysed terms.
        :param n: (int) The window size.
        :returns: (numpy.ndarray) Count per document.
        """
        key = (tuple(terms), n)
        with self._window_lock:
            if key not in self._window_cache:
                self._window_cache[key] = self._count_windows(key[0], n)
            return self._window_cache[key]

    def _count_windows(self, terms, n):
        counts = np.zeros(len(self.doc_ids))
        candidates = None
        for term in set(terms):
            docs = set(self.postings.get(term, {}))
            candidates = docs if candidates is None else candidates & docs
        for i in sorted(candidates or ()):
            counts[i] = ordered_window_count(terms, n, self.doc_tokens[i])
        return counts


def ordered_window_count(terms, n, doc):
    """
    Count the positions of the first term from which the remaining terms follow in order, each within
    n positions of the previous one (at most n-1 tokens in between).

    :param terms: (sequence) The terms, compared exactly with the document tokens.
    :param n: (int) The window size, 1 for exact adjacency.
    :param doc: (list) The document tokens.
    :returns: (int) The number of matching start positions.
    """
    if n < 1:
        raise ValueError(f"Window size must be at least 1, got {n}")
    if len(terms) < 2:
        raise ValueError(f"An ordered window needs at least two terms, got {terms}")

    positions = defaultdict(list)
    for i, token in enumerate(doc):
        positions[token].append(i)

    count = 0
    for start in positions.get(terms[0], ()):
        reachable = {start}
        for term in terms[1:]:
            reachable = {q for q in positions.get(term, ()) if any(0 < q - r <= n for r in reachable)}
            if not reachable:
                break
        if reachable:
            count += 1
    return count


def index_collection(docs):
    """
    Index a stream of documents.

    :param docs: (iterable) (doc_id, text) pairs.
    :returns: (CollectionIndex) The index.
    """
    doc_ids, doc_tokens, seen = [], [], set()
    for doc_id, text in docs:
        if doc_id in seen:
            raise DuplicateDocumentError(f"Document {doc_id} appears more than once")
        seen.add(doc_id)
        doc_ids.append(doc_id)
        doc_tokens.append([analyse(token) for token in tokenize(text)])

    index = CollectionIndex(doc_ids, doc_tokens)
    logger.info(f"Indexed {len(index)} documents, {index.collection_length} tokens, "
                f"{len(index.collection_tf)} distinct terms")
    return index


def read_documents(path):
    """
    Read a collection from a 'doc_id<TAB>text' file, or from a directory holding one file per
    document named by its id.

    :param path: (str) File or directory.
    :returns: (list) (doc_id, text) pairs.
    """
    path = os.path.expanduser(path)

    if os.path.isdir(path):
        docs = []
        for name in sorted(os.listdir(path)):
            file_path = os.path.join(path, name)
            if os.path.isfile(file_path):
                with open(file_path, encoding="utf-8") as f:
                    docs.append((name, f.read()))
        return docs

    if not os.path.isfile(path):
        raise FileNotFoundError(f"Document collection {path} does not exist")

    df = pd.read_csv(path, sep="\t", header=None, names=["doc_id", "text"], dtype=str,
                     quoting=csv.QUOTE_NONE, keep_default_na=False)
    return list(zip(df["doc_id"].str.strip(), df["text"]))
