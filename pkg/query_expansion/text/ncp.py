"""
Detection of non-compositional phrases (NCPs) in raw queries.

Phrases found in the NCP bank are fused into one token whose components are joined with
underscores and capitalised (United_States). Every other token is case-folded. This single
form is used by the parser input, the role mapping and the emitted queries.
"""

import csv
import logging
import os
import re
from collections import defaultdict, namedtuple

import pandas as pd

from query_expansion.exceptions import EmptyQueryError, MalformedLineError

logger = logging.getLogger(__name__)

# sentence punctuation dropped from the edges of query words; brackets, hyphens and '/' are kept
_SENTENCE_PUNCTUATION = ".,;:?!'\""
_QUOTED_OR_WORD = re.compile(r'"([^"]*)"|(\S+)')
_ACRONYM = re.compile(r"^[A-Z]+$")


class NcpBank:
    """
    The set of known multiword phrases and acronyms.

    :param phrases: (iterable) Phrases, each a sequence of at least two components or a space separated string.
    :param acronyms: (dict) Mapping of uppercase acronym to its full form phrase.
    """

    def __init__(self, phrases=(), acronyms=None):
        self._phrases = frozenset(self._as_components(p) for p in phrases)
        self._acronyms = {}
        for acronym, full_form in (acronyms or {}).items():
            if not _ACRONYM.match(acronym):
                raise ValueError(f"Acronym '{acronym}' must be uppercase alphabetic")
            self._acronyms[acronym] = self._as_components(full_form)
        self._max_length = max((len(p) for p in self._phrases), default=0)

    @staticmethod
    def _as_components(phrase):
        components = phrase.split() if isinstance(phrase, str) else list(phrase)
        components = tuple(c.lower() for c in components)
        if len(components) < 2 or not all(components):
            raise ValueError(f"An NCP needs at least two non-empty components: {phrase!r}")
        return components

    @property
    def phrases(self):
        return self._phrases

    @property
    def acronyms(self):
        return dict(self._acronyms)

    @property
    def max_length(self):
        return self._max_length

    def with_phrases(self, phrases):
        """
        Return a new bank with extra phrases added, e.g. from a per-query override file.

        :param phrases: (iterable) Extra phrases.
        :returns: (NcpBank) The extended bank.
        """
        return NcpBank(list(self._phrases) + list(phrases), self._acronyms)

    def __contains__(self, components):
        return tuple(c.lower() for c in components) in self._phrases


class SegmentedQuery(namedtuple("SegmentedQuery", ["tokens", "ncp_flags"])):
    """
    A query after NCP detection: the tokens and a flag per token marking NCP units.
    """
    __slots__ = ()

    @property
    def terms(self):
        return list(self.tokens)

    @property
    def text(self):
        return " ".join(self.tokens)


def _capitalise(components):
    return "_".join(c[:1].upper() + c[1:].lower() for c in components)


def _ncp_components(token):
    """Components of a token already written as an underscore joined NCP, or None."""
    if "_" not in token:
        return None
    parts = token.split("_")
    if len(parts) >= 2 and all(p.isalpha() for p in parts):
        return parts
    return None


def _raw_units(query):
    """Split the query into (text, quoted) units, a quoted span counting as one unit."""
    units = []
    for match in _QUOTED_OR_WORD.finditer(query):
        quoted, word = match.groups()
        if quoted is not None:
            words = [w.strip(_SENTENCE_PUNCTUATION) for w in quoted.split()]
            words = [w for w in words if w]
            if len(words) >= 2:
                units.append((words, True))
            elif words:
                units.append((words[0], False))
        else:
            word = word.strip(_SENTENCE_PUNCTUATION)
            if word:
                units.append((word, False))
    return units


def detect_ncp(query, bank):
    """
    Isolate the NCPs of a query using a longest-match, leftmost-first scan against the bank.
    Acronyms are resolved into their full form before phrases are matched.

    :param query: (str) The raw query text.
    :param bank: (NcpBank) The phrases and acronyms to look for.
    :returns: (SegmentedQuery) Tokens with NCP units fused and capitalised, others lowercase.
    """
    if not query or not query.strip():
        raise EmptyQueryError("Query is empty")

    # each unit is either a list of components (an NCP) or a plain word
    units = []
    for text, quoted in _raw_units(query):
        if quoted:
            units.append(list(text))
        elif text in bank.acronyms:
            units.append(list(bank.acronyms[text]))
        elif _ncp_components(text):
            units.append(_ncp_components(text))
        else:
            units.append(text)

    if not units:
        raise EmptyQueryError(f"Query holds no words: {query!r}")

    tokens, flags = [], []
    i = 0
    while i < len(units):
        unit = units[i]
        if isinstance(unit, list):
            tokens.append(_capitalise(unit))
            flags.append(True)
            i += 1
            continue

        # longest run of plain words starting at i found in the bank
        run_end = i
        while run_end < len(units) and not isinstance(units[run_end], list):
            run_end += 1
        matched = 0
        for length in range(min(bank.max_length, run_end - i), 1, -1):
            if units[i:i + length] in bank:
                matched = length
                break

        if matched:
            tokens.append(_capitalise(units[i:i + matched]))
            flags.append(True)
            i += matched
        else:
            tokens.append(unit.lower())
            flags.append(False)
            i += 1

    return SegmentedQuery(tuple(tokens), tuple(flags))


def parser_tokens(sq):
    """
    The tokens handed to the dependency parser, each with its NCP flag. A front slash becomes the
    word 'or' and double quotes are dropped. Hyphenated and bracketed words are kept as they are.

    :param sq: (SegmentedQuery) The segmented query.
    :returns: (SegmentedQuery) The parser tokens, positions matching the parse.
    """
    tokens, flags = [], []
    for token, is_ncp in zip(sq.tokens, sq.ncp_flags):
        token = token.replace('"', "")
        if not token:
            continue
        words = [token]
        if not is_ncp and "/" in token:
            words = " or ".join(p for p in token.split("/") if p).split()
        tokens.extend(words)
        flags.extend([is_ncp] * len(words))
    return SegmentedQuery(tuple(tokens), tuple(flags))


def normalize_for_parser(sq):
    """
    Render a segmented query as the single line handed to the dependency parser.

    :param sq: (SegmentedQuery) The segmented query.
    :returns: (str) The parser input line.
    """
    return parser_tokens(sq).text


def load_ncp_bank(path):
    """
    Read an NCP bank file: one phrase per line with space separated components, and
    acronyms written as 'ACRO = full form phrase'. Blank lines and lines starting with '#' are skipped.

    :param path: (str) Path to the bank file.
    :returns: (NcpBank) The bank.
    """
    path = os.path.expanduser(path)
    phrases, acronyms = [], {}

    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue

            if "=" in line:
                acronym, _, full_form = (part.strip() for part in line.partition("="))
                if not _ACRONYM.match(acronym) or len(full_form.split()) < 2:
                    raise MalformedLineError(f"Bad acronym entry '{line}'", line_number, path)
                acronyms[acronym] = full_form
            else:
                if len(line.split()) < 2:
                    raise MalformedLineError(f"Phrase '{line}' has fewer than two components", line_number, path)
                phrases.append(line)

    logger.info(f"Loaded {len(phrases)} phrases and {len(acronyms)} acronyms from {path}")
    return NcpBank(phrases, acronyms)


def load_overrides(path):
    """
    Read per-query NCP overrides from 'query_id<TAB>phrase' lines.

    :param path: (str) Path to the override file.
    :returns: (dict) Mapping of query id to a list of phrases.
    """
    df = pd.read_csv(os.path.expanduser(path), sep="\t", header=None, names=["query_id", "phrase"],
                     dtype=str, quoting=csv.QUOTE_NONE, keep_default_na=False)

    overrides = defaultdict(list)
    for query_id, phrase in zip(df["query_id"], df["phrase"]):
        overrides[query_id.strip()].append(phrase.strip())
    return dict(overrides)
