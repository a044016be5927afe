"""
Query expansion modes. Each mode segments a raw query, gives every original token a role type,
forms base pairs and picks the expansion terms; the result is weighted by a chromosome and emitted
in the #weight syntax.
"""

import logging
from collections import namedtuple

from query_expansion import CONFIG
from query_expansion.exceptions import MissingParseError, UnexpandableQueryError, UnsupportedQueryError
from query_expansion.ngrams.pool import build_pool, select_top_n
from query_expansion.optimise.genetic import FREE_GENES, Chromosome
from query_expansion.parsing.roles import RoleType, annotate_query, sequential_base_pairs
from query_expansion.retrieval.query_language import (OrderedWindow, QueryElement, StructuredQuery,
                                                      format_structured_query)
from query_expansion.text.lex import is_stopword, tokenize
from query_expansion.text.ncp import NcpBank, detect_ncp, parser_tokens

logger = logging.getLogger(__name__)

ExpansionElement = namedtuple("ExpansionElement", ["term", "role", "ncp"])

_OPERATOR_CHARACTERS = "()#"


def index_element(term, ncp=False):
    """
    The retrieval element for a query term: NCP units become an ordered window over their lowercased
    components, other terms are lowercased with query operator characters removed.

    :param term: (str) The term.
    :param ncp: (bool) True if the term is an NCP unit.
    :returns: (str or OrderedWindow) The element, None if nothing remains of the term.
    """
    if ncp and "_" in term:
        components = [c.lower() for c in term.split("_") if c]
        return OrderedWindow(len(components), components)
    term = "".join(c for c in term.lower() if c not in _OPERATOR_CHARACTERS)
    return term or None


class ExpandedQuery:
    """
    A query's original tokens and expansion terms, each with its role type.

    :param query_id: (str) The query identifier.
    :param mode: (str) The expansion mode that produced it.
    :param elements: (list) ExpansionElement for every original token in order, then the expansion terms in rank order.
    :param base_pairs: (list) The base pairs used to mine expansion terms.
    :param pool: (CandidatePool) The candidate pool, None if the mode does not expand.
    :param length: (int) Number of words in the raw query.
    """

    def __init__(self, query_id, mode, elements, base_pairs=(), pool=None, length=None):
        self.query_id = query_id
        self.mode = mode
        self.elements = list(elements)
        self.base_pairs = list(base_pairs)
        self.pool = pool
        self.length = length if length is not None else len(self.original)

        for element in self.elements:
            if element.role not in (RoleType.CoI, RoleType.Dc, RoleType.Rc, RoleType.Sc, RoleType.Ec):
                raise ValueError(f"'{element.term}' of query {query_id} has no final role")

    @property
    def original(self):
        return [e for e in self.elements if e.role is not RoleType.Ec]

    @property
    def expansion(self):
        return [e for e in self.elements if e.role is RoleType.Ec]

    def weight_of(self, role, weights):
        """ The weight of a role under a chromosome. Unweighted (LM) queries give every element 1. """
        if self.mode == LanguageModelQuery.mode:
            return 1.0
        return weights.weight(role)

    def to_structured_query(self, weights):
        """
        :param weights: (Chromosome) The role weights.
        :returns: (StructuredQuery) The query with weights rounded as they are printed.
        """
        elements = []
        for e in self.elements:
            element = index_element(e.term, e.ncp)
            if element is None:
                logger.debug(f"Query {self.query_id}: '{e.term}' has no retrievable text, left out")
                continue
            elements.append(QueryElement(round(self.weight_of(e.role, weights), 3), element))
        return StructuredQuery(self.query_id, elements)


def emit_weighted_query(eq, weights):
    """
    Print an expanded query in the #weight syntax.

    :param eq: (ExpandedQuery) The expanded query.
    :param weights: (Chromosome) The role weights.
    :returns: (str) The query text.
    """
    return format_structured_query(eq.to_structured_query(weights))


class QueryExpansion:
    """
    Base class for the expansion modes. A mode implements annotate (roles and base pairs of the
    original tokens) and may override expansion_terms. Resources a mode does not use may be None.

    :param stoplist: (StopList) Stop words.
    :param ncp_bank: (NcpBank) Known phrases and acronyms.
    :param ngram_index: (NGramIndex) The n-gram corpus.
    :param freqs: (UnigramFrequencyTable) Unigram frequencies.
    :param overrides: (dict) query id -> extra NCP phrases.
    """

    mode = 'UNDEFINED'
    free_genes = FREE_GENES
    top_n = CONFIG['expansion']['top_n']
    max_matched_ngrams = CONFIG['ngrams']['max_matched_ngrams_per_pair']

    def __init__(self, stoplist, ncp_bank=None, ngram_index=None, freqs=None, overrides=None, top_n=None,
                 max_matched_ngrams=None):
        self.stoplist = stoplist
        self.ncp_bank = ncp_bank or NcpBank()
        self.ngram_index = ngram_index
        self.freqs = freqs
        self.overrides = overrides or {}
        if top_n is not None:
            self.top_n = top_n
        if max_matched_ngrams is not None:
            self.max_matched_ngrams = max_matched_ngrams

    def segment(self, query_id, text):
        """
        Isolate NCPs using the bank plus any phrases overridden for the query.

        :returns: (SegmentedQuery) The parser tokens with their NCP flags.
        """
        bank = self.ncp_bank
        if query_id in self.overrides:
            bank = bank.with_phrases(self.overrides[query_id])
        return parser_tokens(detect_ncp(text, bank))

    def annotate(self, query_id, segmented):
        """
        Class specific implementation giving the original tokens their roles.

        :returns: (tuple) (list of RoleType per token, list of BasePair)
        """
        raise NotImplementedError

    def expansion_terms(self, query_id, segmented, base_pairs):
        """
        Mine, filter and rank candidate terms from the base pairs and take the top n.

        :returns: (tuple) (list of RoledTerm tagged Ec, CandidatePool)
        """
        pool = build_pool(query_id, base_pairs, self.ngram_index, segmented.tokens, self.stoplist, self.freqs,
                          limit=self.max_matched_ngrams)
        return select_top_n(pool, self.top_n), pool

    def expand(self, query_id, text):
        """
        Run the mode on one raw query.

        :param query_id: (str) The query identifier.
        :param text: (str) The raw query.
        :returns: (ExpandedQuery) The expanded query.
        """
        segmented = self.segment(query_id, text)
        roles, base_pairs = self.annotate(query_id, segmented)
        expansion, pool = self.expansion_terms(query_id, segmented, base_pairs)

        elements = [ExpansionElement(term, role, ncp)
                    for term, role, ncp in zip(segmented.tokens, roles, segmented.ncp_flags)]
        elements += [ExpansionElement(t.term, RoleType.Ec, False) for t in expansion]

        logger.debug(f"Query {query_id} ({self.mode}): {[(e.term, str(e.role)) for e in elements]}")
        return ExpandedQuery(query_id, self.mode, elements, base_pairs, pool, length=len(tokenize(text)))


class LanguageModelQuery(QueryExpansion):
    """ The unexpanded baseline: every original token with weight 1. """

    mode = 'lm'

    def annotate(self, query_id, segmented):
        return [RoleType.CoI] * len(segmented.tokens), []

    def expansion_terms(self, query_id, segmented, base_pairs):
        return [], None


class SequentialQueryExpansion(QueryExpansion):
    """
    Expansion from adjacent non stop word pairs. Original tokens form a single weight class (CoI)
    and expansion terms the other (Ec).
    """

    mode = 'spqe'
    free_genes = (0, 4)

    def annotate(self, query_id, segmented):
        if len(segmented.tokens) < 2:
            raise UnsupportedQueryError(f"Query {query_id} has a single word, no pairs can be formed")
        pairs = sequential_base_pairs(segmented, self.stoplist)
        if not pairs:
            raise UnexpandableQueryError(f"Query {query_id} has fewer than two content words")
        return [RoleType.CoI] * len(segmented.tokens), pairs


class LinguisticQueryExpansion(QueryExpansion):
    """
    Expansion from the grammatically linked pairs of a typed dependency parse, original tokens
    weighted by their concept role.

    :param parses: (dict) query id -> list of TypedDependency.
    :param role_table: (RoleMappingTable) The relation to role mapping.
    """

    mode = 'lsqe'
    strict_coi = CONFIG['roles']['strict_coi']
    exclude_sc_pairs = CONFIG['roles']['exclude_sc_pairs']
    relation_word_role = RoleType.parse(CONFIG['roles']['relation_word_role'])
    isolated_term_role = RoleType.parse(CONFIG['roles']['isolated_term_role'])

    def __init__(self, stoplist, parses, role_table, **kwargs):
        for key in ("strict_coi", "exclude_sc_pairs", "relation_word_role", "isolated_term_role"):
            value = kwargs.pop(key, None)
            if value is not None:
                setattr(self, key, value)
        super().__init__(stoplist, **kwargs)
        self.parses = parses
        self.role_table = role_table

    def annotate(self, query_id, segmented):
        if len(segmented.tokens) < 2:
            raise UnsupportedQueryError(f"Query {query_id} has a single word, no grammatical pairs can be formed")
        if query_id not in self.parses:
            raise MissingParseError(f"No dependency parse for query {query_id}")

        aq = annotate_query(query_id, segmented.tokens, self.parses[query_id], self.role_table, self.freqs,
                            ncp_flags=segmented.ncp_flags, strict_coi=self.strict_coi,
                            exclude_sc=self.exclude_sc_pairs, relation_word_role=self.relation_word_role)
        if not aq.base_pairs:
            raise UnexpandableQueryError(f"Query {query_id} has no base pair holding a CoI or Dc")

        roles = []
        for token in aq.tokens:
            if token.role is not None:
                roles.append(token.role)
            elif is_stopword(token.term, self.stoplist):
                roles.append(RoleType.Sc)
            else:
                roles.append(self.isolated_term_role)
        return roles, aq.base_pairs


MODES = {cls.mode: cls for cls in (LanguageModelQuery, SequentialQueryExpansion, LinguisticQueryExpansion)}


def get_expansion_class(mode):
    """ The expansion class for a mode name (lm, spqe or lsqe). """
    try:
        return MODES[mode.lower()]
    except KeyError:
        raise ValueError(f"Mode {mode} is not supported. Options are {', '.join(MODES)}.")


def expand_query(query_id, text, expander):
    """
    Expand one raw query.

    :param query_id: (str) The query identifier.
    :param text: (str) The raw query.
    :param expander: (QueryExpansion) The mode instance holding the resources.
    :returns: (ExpandedQuery) The expanded query.
    """
    return expander.expand(query_id, text)


def weights_for(expander, chromosome=None):
    """ The chromosome a mode is emitted with: uniform for LM, the given one otherwise. """
    if expander.mode == LanguageModelQuery.mode or chromosome is None:
        return Chromosome.uniform()
    return chromosome
