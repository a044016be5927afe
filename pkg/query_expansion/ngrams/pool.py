"""
Turning matched n-grams into the ranked pool of candidate expansion terms for a query.
"""

import logging
import os
from collections import Counter, defaultdict, namedtuple

import pandas as pd

from query_expansion import CONFIG
from query_expansion.exceptions import UnexpandableQueryError
from query_expansion.ngrams.index import generate_wildcard_sequences, match_sequences
from query_expansion.parsing.roles import RoledTerm, RoleType
from query_expansion.text.lex import is_clean_term, is_stopword, porter_stem

logger = logging.getLogger(__name__)

CandidateTerm = namedtuple("CandidateTerm", ["surface", "root", "frequency"])


class CandidatePool:
    """
    The candidate expansion terms of one query, one per Porter root, ranked by frequency.

    :param query_id: (str) The query the pool belongs to.
    :param candidates: (list) CandidateTerm objects, sorted by the caller or sorted here.
    """

    def __init__(self, query_id, candidates):
        self.query_id = query_id
        self.candidates = sorted(candidates, key=lambda c: (-c.frequency, c.surface))

        roots = [c.root for c in self.candidates]
        if len(roots) != len(set(roots)):
            raise ValueError(f"Pool for query {query_id} holds two candidates with the same root")

    @property
    def terms(self):
        return [c.surface for c in self.candidates]

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


def extract_candidates(matches, pair):
    """
    Split matched n-grams into their tokens, leaving out the base pair terms wherever they occur.

    :param matches: (list) NGramRecords matched for the pair.
    :param pair: (BasePair) The base pair.
    :returns: (collections.Counter) Lowercased token -> summed record frequency.
    """
    pair_terms = {t.lower() for t in pair.terms}
    raw = Counter()
    for record in matches:
        for token in record.tokens:
            token = token.lower()
            if token not in pair_terms:
                raw[token] += record.frequency
    return raw


def _original_stems(original_terms):
    stems = set()
    for term in original_terms:
        term = term.lower()
        stems.add(term)
        stems.add(porter_stem(term))
        if "_" in term:
            stems.update(porter_stem(part) for part in term.split("_"))
    return stems


def filter_candidates(raw, original_terms, stoplist):
    """
    Drop stop words, terms with anything but letters in them and terms sharing a stem with an original
    query term. NCP query terms contribute the stems of their components too.

    :param raw: (collections.Counter) Output of extract_candidates, possibly merged over base pairs.
    :param original_terms: (iterable) The query terms.
    :param stoplist: (StopList) The stop list.
    :returns: (collections.Counter) One entry per remaining surface form.
    """
    originals = _original_stems(original_terms)
    clean = Counter()
    for term, weight in raw.items():
        term = term.lower()
        if is_stopword(term, stoplist) or not is_clean_term(term):
            continue
        if term in originals or porter_stem(term) in originals:
            continue
        clean[term] += weight
    return clean


def collapse_variants(cands, freqs, query_id=None):
    """
    Merge morphological variants sharing a Porter root. The variant with the highest unigram frequency
    (first alphabetically on ties) stands for the group, which is ranked by the summed frequency of its variants.

    :param cands: (iterable) Clean candidate surface forms.
    :param freqs: (UnigramFrequencyTable) Unigram frequencies, absent terms count 0.
    :param query_id: (str) The query the pool belongs to.
    :returns: (CandidatePool) The ranked pool.
    """
    groups = defaultdict(list)
    for surface in cands:
        groups[porter_stem(surface)].append((surface, freqs.frequency(surface)))

    candidates = []
    for root, variants in groups.items():
        surface, _ = min(variants, key=lambda v: (-v[1], v[0]))
        candidates.append(CandidateTerm(surface, root, sum(f for _, f in variants)))

    return CandidatePool(query_id, candidates)


def select_top_n(pool, n=None):
    """
    :param pool: (CandidatePool) The ranked pool.
    :param n: (int) How many terms to take, defaults to the configured top_n.
    :returns: (list) RoledTerm with role Ec for the first min(n, len(pool)) candidates.
    """
    if n is None:
        n = CONFIG['expansion']['top_n']
    if n < 1:
        raise ValueError(f"Number of expansion terms must be positive, got {n}")
    if not len(pool):
        raise UnexpandableQueryError(f"No candidate expansion terms for query {pool.query_id}")
    return [RoledTerm(c.surface, RoleType.Ec) for c in pool.candidates[:n]]


def build_pool(query_id, base_pairs, index, original_terms, stoplist, freqs, limit=None):
    """
    Match every base pair of a query against the n-gram index and rank the surviving candidates.

    :param query_id: (str) The query identifier.
    :param base_pairs: (list) BasePair objects of the query.
    :param index: (NGramIndex) The n-gram index.
    :param original_terms: (iterable) The query terms.
    :param stoplist: (StopList) The stop list.
    :param freqs: (UnigramFrequencyTable) Unigram frequencies.
    :param limit: (int) Matched n-grams kept per pair, defaults to max_matched_ngrams_per_pair.
    :returns: (CandidatePool) The ranked pool, possibly empty.
    """
    if not base_pairs:
        raise UnexpandableQueryError(f"Query {query_id} has no base pairs")
    if limit is None:
        limit = CONFIG['ngrams']['max_matched_ngrams_per_pair']

    raw = Counter()
    for pair in base_pairs:
        matches = match_sequences(index, generate_wildcard_sequences(pair), limit=limit)
        logger.debug(f"Query {query_id}: {len(matches)} n-grams for ({', '.join(pair.terms)})")
        raw.update(extract_candidates(matches, pair))

    clean = filter_candidates(raw, original_terms, stoplist)
    pool = collapse_variants(clean, freqs, query_id=query_id)
    logger.debug(f"Query {query_id}: pool of {len(pool)} candidates from {len(raw)} tokens")
    return pool


def write_pool_dump(pools, path):
    """
    Write pools as 'query_id<TAB>term<TAB>root<TAB>freq' lines in rank order.

    :param pools: (iterable) CandidatePool objects.
    :param path: (str) The file to write.
    """
    rows = [(pool.query_id, c.surface, c.root, c.frequency) for pool in pools for c in pool.candidates]
    df = pd.DataFrame(rows, columns=["query_id", "term", "root", "freq"])
    df.to_csv(os.path.expanduser(path), sep="\t", header=False, index=False)
