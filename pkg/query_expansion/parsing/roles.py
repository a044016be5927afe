"""
Concept-role mapping: every word linked by a typed dependency is given one of the role types

    CoI - concept of interest, the key concepts indicative of the search goal
    Dc  - descriptive concept, describes a CoI in more detail
    Rc  - relational concept, links concepts
    Sc  - structural concept, a stop word shaping the query
    Ec  - expansion concept, only ever given to added terms

Roles come from a relation -> (head role, dependent role) table. Words left untagged by an
undefined relation are resolved from their other relations or from their frequency, and words
holding different roles in different relations keep the most significant one.
"""

import csv
import logging
import os
from collections import defaultdict, namedtuple
from enum import Enum

import pandas as pd

from query_expansion import CONFIG
from query_expansion.exceptions import UnsupportedQueryError
from query_expansion.text.lex import is_stopword

logger = logging.getLogger(__name__)

DEFAULT_ROLE_MAPPING = os.path.join(os.path.dirname(os.path.dirname(__file__)), "etc", "role_mapping.tsv")


class RoleType(Enum):
    CoI = "CoI"
    Dc = "Dc"
    Rc = "Rc"
    Sc = "Sc"
    Ec = "Ec"
    Untagged = "U"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, value):
        """ Accepts 'CoI', 'Dc', ... and 'U' or 'Untagged'. """
        if value in ("U", "Untagged"):
            return cls.Untagged
        return cls(value)


# CoI > Dc > Rc > Sc
SIGNIFICANCE = {RoleType.CoI: 4, RoleType.Dc: 3, RoleType.Rc: 2, RoleType.Sc: 1}
QUERY_ROLES = (RoleType.CoI, RoleType.Dc, RoleType.Rc, RoleType.Sc)
GOAL_ROLES = frozenset([RoleType.CoI, RoleType.Dc])

# relations that only concatenate terms; their roles give way to any other relation
_CONCATENATING = ("prep", "conj")


def relation_family(relation):
    """
    The base relation of a collapsed relation name: prep_with, prepc_for -> prep, conj_and -> conj.

    :param relation: (str) The relation name.
    :returns: (str) The family name.
    """
    base = relation.split("_", 1)[0]
    if base == "prepc":
        return "prep"
    return base


class RoleMappingTable:
    """
    Relation name -> (head role, dependent role). Relations absent from the table, 'undef' among
    them, map to (Untagged, Untagged).

    :param rows: (dict) Mapping of relation name to (head role, dependent role) as RoleType values.
    """

    def __init__(self, rows):
        self._rows = {relation.lower(): (head, dep) for relation, (head, dep) in rows.items()}

    def lookup(self, relation):
        """
        Find the roles for a relation, falling back on its family for collapsed names.

        :param relation: (str) The relation name e.g. 'prep_with'.
        :returns: (tuple) (head role, dependent role).
        """
        relation = relation.lower()
        if relation in self._rows:
            return self._rows[relation]
        family = relation_family(relation)
        return self._rows.get(family, (RoleType.Untagged, RoleType.Untagged))

    def __contains__(self, relation):
        return relation.lower() in self._rows

    def __len__(self):
        return len(self._rows)


def load_role_mapping(path="default"):
    """
    Read the role mapping table, 'relation<TAB>head_role<TAB>dep_role' per line.

    :param path: (str) Path to the table, or 'default' for the table shipped with the package.
    :returns: (RoleMappingTable) The table.
    """
    if path == "default":
        path = DEFAULT_ROLE_MAPPING

    df = pd.read_csv(os.path.expanduser(path), sep="\t", header=None, comment="#",
                     names=["relation", "head_role", "dep_role"], dtype=str, quoting=csv.QUOTE_NONE)

    rows = {}
    for relation, head_role, dep_role in df.itertuples(index=False):
        rows[relation.strip()] = (RoleType.parse(head_role.strip()), RoleType.parse(dep_role.strip()))
    return RoleMappingTable(rows)


RoledTerm = namedtuple("RoledTerm", ["term", "role"])


class RoleAssignment(namedtuple("RoleAssignment", ["dependency", "head_role", "dependent_role"])):
    """ The roles one dependency row gives to its head and dependent. """
    __slots__ = ()

    def roles(self):
        """ (word, role) for each word present in the row. """
        pairs = [(self.dependency.head, self.head_role)]
        if self.dependency.dependent is not None:
            pairs.append((self.dependency.dependent, self.dependent_role))
        return pairs

    @property
    def family(self):
        return relation_family(self.dependency.relation)


class BasePair(namedtuple("BasePair", ["term1", "term2", "relation"])):
    """ A pair of grammatically linked terms (RoledTerm each) used to mine expansion terms. """
    __slots__ = ()

    @property
    def terms(self):
        return self.term1.term, self.term2.term


AnnotatedToken = namedtuple("AnnotatedToken", ["term", "position", "role", "ncp"])


class AnnotatedQuery:
    """
    A query whose tokens carry their final role types.

    :param query_id: (str) The query identifier.
    :param tokens: (list) AnnotatedToken per query token, role None for tokens in no dependency.
    :param dependencies: (list) The TypedDependency rows.
    :param assignments: (list) The resolved RoleAssignment rows.
    """

    def __init__(self, query_id, tokens, dependencies, assignments):
        self.query_id = query_id
        self.tokens = list(tokens)
        self.dependencies = list(dependencies)
        self.assignments = list(assignments)
        self.base_pairs = []

    @property
    def terms(self):
        return [t.term for t in self.tokens]

    @property
    def unprocessable(self):
        """ Tokens taking part in no dependency. """
        return [t for t in self.tokens if t.role is None]

    @property
    def expandable(self):
        return bool(self.base_pairs)

    def role_of(self, position):
        """
        :param position: (int) 1-based token position.
        :returns: (RoleType) The final role, None if the token is in no dependency.
        """
        for token in self.tokens:
            if token.position == position:
                return token.role
        return None

    def roles(self):
        """ Mapping of term to final role for the tokens that have one. """
        return {t.term: t.role for t in self.tokens if t.role is not None}


def _most_significant(occurrences):
    """
    Pick one role from (family, role) occurrences of a word. Roles from prep and conj relations
    give way to any other relation, prep wins over conj, and otherwise CoI > Dc > Rc > Sc.
    """
    others = [role for family, role in occurrences if family not in _CONCATENATING]
    preps = [role for family, role in occurrences if family == "prep"]
    conjs = [role for family, role in occurrences if family == "conj"]
    candidates = others or preps or conjs
    return max(candidates, key=SIGNIFICANCE.get)


def assign_roles(deps, table, relation_word_role=None):
    """
    Label the head and dependent of every dependency row from the role mapping table.

    :param deps: (list) TypedDependency rows.
    :param table: (RoleMappingTable) The role mapping.
    :param relation_word_role: (RoleType) Role of the word in rows with no dependent,
                               defaults to the configured relation_word_role.
    :returns: (list) RoleAssignment per row, Untagged for undefined relations.
    """
    if relation_word_role is None:
        relation_word_role = RoleType.parse(CONFIG['roles']['relation_word_role'])

    assignments = []
    for dep in deps:
        if dep.dependent is None:
            assignments.append(RoleAssignment(dep, relation_word_role, None))
            continue
        head_role, dep_role = table.lookup(dep.relation)
        assignments.append(RoleAssignment(dep, head_role, dep_role))
    return assignments


def resolve_untagged(assignments, freqs):
    """
    Replace Untagged roles. A word tagged in another row inherits that role (Rule 3). In rows still
    holding an untagged word the more frequent word is CoI and the other Dc (Rule 1), and equally
    frequent words are both CoI (Rule 2). Rules 1-2 only ever change words that are still untagged.

    :param assignments: (list) RoleAssignment rows from assign_roles.
    :param freqs: (UnigramFrequencyTable) Frequencies for Rules 1-2.
    :returns: (list) RoleAssignment rows with no Untagged role.
    """
    tagged = defaultdict(list)
    for assignment in assignments:
        for word, role in assignment.roles():
            if role is not RoleType.Untagged:
                tagged[word].append((assignment.family, role))

    def inherit(word, role):
        if role is RoleType.Untagged and word in tagged:
            return _most_significant(tagged[word])
        return role

    resolved = []
    for assignment in assignments:
        dep = assignment.dependency
        head_role = inherit(dep.head, assignment.head_role)
        dep_role = assignment.dependent_role
        if dep.dependent is not None:
            dep_role = inherit(dep.dependent, dep_role)

        if RoleType.Untagged in (head_role, dep_role):
            head_freq = freqs.frequency(dep.head.term)
            dep_freq = freqs.frequency(dep.dependent.term) if dep.dependent is not None else head_freq
            if head_freq > dep_freq:
                by_frequency = (RoleType.CoI, RoleType.Dc)
            elif head_freq < dep_freq:
                by_frequency = (RoleType.Dc, RoleType.CoI)
            else:
                by_frequency = (RoleType.CoI, RoleType.CoI)

            if head_role is RoleType.Untagged:
                head_role = by_frequency[0]
            if dep_role is RoleType.Untagged:
                dep_role = by_frequency[1]
            logger.debug(f"Resolved {dep.relation}({dep.head.term}, {dep.dependent.term if dep.dependent else '-'}) "
                         f"by frequency {head_freq}/{dep_freq}")

        resolved.append(assignment._replace(head_role=head_role, dependent_role=dep_role))
    return resolved


def resolve_ambiguous(assignments, tokens=None, query_id=None, ncp_flags=None):
    """
    Give every word a single final role, keeping the most significant role when rows disagree.

    :param assignments: (list) RoleAssignment rows with no Untagged role.
    :param tokens: (list) The query tokens in parser order. If None the tokens are taken from the dependencies.
    :param query_id: (str) Query identifier for the result.
    :param ncp_flags: (list) NCP flag per token.
    :returns: (AnnotatedQuery) The annotated query.
    """
    occurrences = defaultdict(list)
    terms = {}
    for assignment in assignments:
        for word, role in assignment.roles():
            if role is RoleType.Untagged:
                raise ValueError(f"'{word.term}' is still untagged, resolve untagged roles first")
            occurrences[word.position].append((assignment.family, role))
            terms.setdefault(word.position, word.term)

    if tokens is None:
        positions = sorted(terms)
        tokens = [terms[p] for p in positions]
    else:
        positions = list(range(1, len(tokens) + 1))

    if ncp_flags is None:
        ncp_flags = ["_" in t for t in tokens]

    annotated = []
    for position, term, ncp in zip(positions, tokens, ncp_flags):
        role = _most_significant(occurrences[position]) if position in occurrences else None
        annotated.append(AnnotatedToken(term, position, role, ncp))

    return AnnotatedQuery(query_id, annotated, [a.dependency for a in assignments], assignments)


def extract_base_pairs(aq, strict_coi=None, exclude_sc=None):
    """
    Pick the grammatically linked pairs used for expansion: one per dependency whose two words both
    hold a final role and at least one of them is CoI or Dc. Pairs of Rc/Sc words and relation-word
    rows are dropped.

    :param aq: (AnnotatedQuery) The finalised query.
    :param strict_coi: (bool) Require a CoI rather than a CoI or Dc.
    :param exclude_sc: (bool) Also drop pairs where either word is Sc.
    :returns: (list) BasePair per usable dependency, in dependency order.
    """
    if strict_coi is None:
        strict_coi = CONFIG['roles']['strict_coi']
    if exclude_sc is None:
        exclude_sc = CONFIG['roles']['exclude_sc_pairs']

    wanted = {RoleType.CoI} if strict_coi else GOAL_ROLES
    by_position = {t.position: t for t in aq.tokens}

    pairs, seen = [], set()
    for dep in aq.dependencies:
        if dep.dependent is None:
            continue
        head = by_position.get(dep.head.position)
        dependent = by_position.get(dep.dependent.position)
        if head is None or dependent is None or head.role is None or dependent.role is None:
            continue
        if head.position == dependent.position:
            continue

        roles = {head.role, dependent.role}
        if not roles & wanted:
            continue
        if exclude_sc and RoleType.Sc in roles:
            continue

        pair = BasePair(RoledTerm(head.term, head.role), RoledTerm(dependent.term, dependent.role), dep.relation)
        key = (pair.term1, pair.term2)
        if key not in seen:
            seen.add(key)
            pairs.append(pair)
    return pairs


def sequential_base_pairs(query, stoplist):
    """
    Base pairs from adjacent terms once stop words are skipped, emulating sequential dependence.
    Both terms of every pair are tagged CoI as no role mapping is involved.

    :param query: A SegmentedQuery or AnnotatedQuery (anything with a 'terms' list).
    :param stoplist: (StopList) Stop words to skip.
    :returns: (list) BasePair per adjacent pair, in query order.
    """
    content = [t for t in query.terms if not is_stopword(t, stoplist)]
    return [BasePair(RoledTerm(a, RoleType.CoI), RoledTerm(b, RoleType.CoI), "sequential")
            for a, b in zip(content, content[1:])]


def annotate_query(query_id, tokens, deps, table, freqs, ncp_flags=None, strict_coi=None, exclude_sc=None,
                   relation_word_role=None):
    """
    Run the whole concept-role mapping for one query and attach its base pairs.

    :param query_id: (str) The query identifier.
    :param tokens: (list) The parser input tokens.
    :param deps: (list) TypedDependency rows of the query.
    :param table: (RoleMappingTable) Role mapping.
    :param freqs: (UnigramFrequencyTable) Frequencies for untagged words.
    :returns: (AnnotatedQuery) The annotated query, base_pairs set (possibly empty).
    """
    if len(tokens) < 2:
        raise UnsupportedQueryError(f"Query {query_id} has a single word, no grammatical pairs can be formed")

    assignments = assign_roles(deps, table, relation_word_role)
    assignments = resolve_untagged(assignments, freqs)
    aq = resolve_ambiguous(assignments, tokens=tokens, query_id=query_id, ncp_flags=ncp_flags)
    aq.base_pairs = extract_base_pairs(aq, strict_coi=strict_coi, exclude_sc=exclude_sc)

    if aq.unprocessable:
        logger.info(f"Query {query_id}: no dependency for {[t.term for t in aq.unprocessable]}")
    return aq
