"""
Lexical helpers shared by every stage of the pipeline: tokenisation, Porter stemming,
stop list membership, term cleanliness and unigram frequencies.
"""

import csv
import logging
import os
import string

import pandas as pd
from nltk.stem.porter import PorterStemmer

from query_expansion import CONFIG

logger = logging.getLogger(__name__)

DEFAULT_STOPLIST = os.path.join(os.path.dirname(os.path.dirname(__file__)), "etc", "stoplist.txt")

_STEMMER = PorterStemmer(mode=CONFIG['text']['porter_mode'])

# edge characters removed from a token; underscore and hyphen survive inside a word
_EDGE_PUNCTUATION = string.punctuation
_ASCII_LETTERS = frozenset(string.ascii_letters)


class StopList:
    """
    An immutable set of lowercase stop words.

    :param entries: (iterable) The stop words. Entries are lowercased and stripped.
    """

    def __init__(self, entries):
        terms = set()
        for entry in entries:
            entry = entry.strip().lower()
            if not entry:
                continue
            if any(c.isspace() for c in entry):
                raise ValueError(f"Stop list entry '{entry}' contains whitespace")
            terms.add(entry)
        self._entries = frozenset(terms)

    @property
    def entries(self):
        return self._entries

    def __contains__(self, term):
        return term.lower() in self._entries

    def __len__(self):
        return len(self._entries)


class UnigramFrequencyTable:
    """
    Term frequencies taken from the n-gram corpus. Absent terms have frequency 0.

    :param counts: (dict) Mapping of term to non-negative count. Keys are lowercased, counts of keys
                   that collide after lowercasing are summed.
    """

    def __init__(self, counts=None):
        self._counts = {}
        for term, count in (counts or {}).items():
            if count < 0:
                raise ValueError(f"Frequency of '{term}' is negative: {count}")
            key = term.lower()
            self._counts[key] = self._counts.get(key, 0) + int(count)

    def frequency(self, term):
        """
        Look up the frequency of a term. NCP units (United_States) are looked up
        under their underscore form first and then under the space joined form.

        :param term: (str) The term to look up.
        :returns: (int) The frequency, 0 if the term is not in the table.
        """
        key = term.lower()
        if key in self._counts:
            return self._counts[key]
        if "_" in key:
            return self._counts.get(key.replace("_", " "), 0)
        return 0

    def __contains__(self, term):
        return term.lower() in self._counts

    def __len__(self):
        return len(self._counts)


def tokenize(raw):
    """
    Split a line of text on whitespace and strip punctuation attached to the edges of each word.
    Underscores and hyphens inside a word are kept, so 'United_States' stays a single token.

    :param raw: (str) The text to tokenize.
    :returns: (list) The tokens in order.
    """
    tokens = []
    for piece in raw.split():
        token = piece.strip(_EDGE_PUNCTUATION)
        if token:
            tokens.append(token)
    return tokens


def porter_stem(term):
    """
    Return the Porter stem of an alphabetic term. Anything else, including underscore joined
    NCP units, is returned unchanged. The algorithm is not idempotent so stem only once.

    :param term: (str) The term to stem.
    :returns: (str) The stem.
    """
    if not term or not term.isascii() or not term.isalpha():
        return term
    return _STEMMER.stem(term)


def is_stopword(term, stoplist):
    """
    :param term: (str) The term to test.
    :param stoplist: (StopList) The stop list.
    :returns: (bool) True if the lowercased term is in the stop list.
    """
    if not term:
        return False
    return term in stoplist


def is_clean_term(term, ncp=False):
    """
    Check that a term is made of ASCII letters only (codes 65-90 and 97-122), which rules out
    digits, symbols and temporal or number expressions such as '108' or '13/jan/06'.

    :param term: (str) The term to check.
    :param ncp: (bool) If True the term is a flagged NCP unit and underscores between
                alphabetic components are allowed.
    :returns: (bool) True if the term is clean.
    """
    if not term:
        return False
    if ncp and "_" in term:
        return all(part and set(part) <= _ASCII_LETTERS for part in term.split("_"))
    return set(term) <= _ASCII_LETTERS


def load_stoplist(path="default"):
    """
    Read a stop list file with one term per line.

    :param path: (str) Path to the file, or 'default' for the list shipped with the package.
    :returns: (StopList) The stop list.
    """
    if path == "default":
        path = DEFAULT_STOPLIST

    with open(os.path.expanduser(path), encoding="utf-8") as f:
        return StopList(f.read().splitlines())


def load_unigram_table(path):
    """
    Read a unigram frequency file of 'term<TAB>count' lines.

    :param path: (str) Path to the file.
    :returns: (UnigramFrequencyTable) The table.
    """
    df = pd.read_csv(os.path.expanduser(path), sep="\t", header=None, names=["term", "count"],
                     dtype={"term": str, "count": "int64"}, quoting=csv.QUOTE_NONE,
                     keep_default_na=False)
    df["term"] = df["term"].str.lower()
    counts = df.groupby("term")["count"].sum().to_dict()
    logger.info(f"Loaded {len(counts)} unigram frequencies from {path}")
    return UnigramFrequencyTable(counts)
