"""
An in-memory index over an n-gram frequency corpus (`tok1 tok2 ... tokn<TAB>count` lines, n = 1..5)
and the wildcard-sequence matching used to collect the n-grams co-occurring with a base pair.

Records are kept grouped by n with positional postings (n, slot, term) -> record ids, so a sequence
with two fixed slots is matched by intersecting two posting sets. Term comparison is case-insensitive.
"""

import gzip
import itertools
import logging
import os
import pickle
from collections import defaultdict, namedtuple

from query_expansion import CONFIG
from query_expansion.exceptions import MalformedLineError
from query_expansion.text.lex import UnigramFrequencyTable

logger = logging.getLogger(__name__)

MAX_N = 5
SEQUENCE_SIZES = (3, 4, 5)

_CACHE_MAGIC = b"QXNGRAM"
_CACHE_VERSION = 1


class NGramRecord(namedtuple("NGramRecord", ["tokens", "frequency"])):
    """ An n-gram (tuple of 1-5 tokens) and its observed frequency. """
    __slots__ = ()

    def __new__(cls, tokens, frequency):
        tokens = tuple(tokens)
        if not 1 <= len(tokens) <= MAX_N:
            raise ValueError(f"An n-gram holds 1 to {MAX_N} tokens, got {len(tokens)}")
        if frequency < 1:
            raise ValueError(f"Frequency of {' '.join(tokens)} must be positive, got {frequency}")
        return super().__new__(cls, tokens, int(frequency))

    @property
    def n(self):
        return len(self.tokens)

    @property
    def text(self):
        return " ".join(self.tokens)


class WildcardSequence(namedtuple("WildcardSequence", ["n", "pattern"])):
    """
    An n-slot pattern with exactly two fixed slots holding the base pair terms. Wildcard slots are None.
    """
    __slots__ = ()

    def __new__(cls, n, pattern):
        pattern = tuple(None if slot is None else slot.lower() for slot in pattern)
        if len(pattern) != n:
            raise ValueError(f"Pattern {pattern} does not have {n} slots")
        if sum(slot is not None for slot in pattern) != 2:
            raise ValueError(f"Pattern {pattern} must have exactly two fixed slots")
        return super().__new__(cls, n, pattern)

    @property
    def fixed(self):
        """ (slot, term) for the two fixed slots. """
        return [(slot, term) for slot, term in enumerate(self.pattern) if term is not None]

    def matches(self, record):
        """ True if the record has n tokens and every fixed slot equals the record token at that slot. """
        if record.n != self.n:
            return False
        return all(record.tokens[slot].lower() == term for slot, term in self.fixed)

    def __str__(self):
        return " ".join("*" if slot is None else slot for slot in self.pattern)


class NGramIndex:
    """
    Records grouped by n with positional postings.

    :param counts: (dict) Mapping of token tuple to frequency.
    """

    def __init__(self, counts=None):
        self._records = defaultdict(list)
        self._postings = defaultdict(set)

        for tokens in sorted(counts or {}):
            record = NGramRecord(tokens, counts[tokens])
            record_id = len(self._records[record.n])
            self._records[record.n].append(record)
            for slot, token in enumerate(record.tokens):
                self._postings[(record.n, slot, token.lower())].add(record_id)

    def lookup(self, term, slot, n):
        """
        :param term: (str) Token to look for (case-insensitive).
        :param slot: (int) 0-based slot the token must occupy.
        :param n: (int) Length of the n-grams to search.
        :returns: (list) The records of length n with the term at that slot.
        """
        records = self._records.get(n, [])
        return [records[i] for i in sorted(self._postings.get((n, slot, term.lower()), ()))]

    def match(self, sequence):
        """
        :param sequence: (WildcardSequence) The pattern.
        :returns: (list) The records matching the pattern, found through the postings of its two fixed slots.
        """
        (slot_a, term_a), (slot_b, term_b) = sequence.fixed
        ids = self._postings.get((sequence.n, slot_a, term_a), set())
        ids = ids & self._postings.get((sequence.n, slot_b, term_b), set())
        records = self._records.get(sequence.n, [])
        return [records[i] for i in sorted(ids)]

    def records(self, n=None):
        """ Iterate over the records of length n, or all records when n is None. """
        sizes = sorted(self._records) if n is None else [n]
        for size in sizes:
            yield from self._records.get(size, [])

    def unigram_table(self):
        """ A UnigramFrequencyTable from the 1-gram records of the corpus. """
        return UnigramFrequencyTable({r.tokens[0]: r.frequency for r in self.records(1)})

    def __len__(self):
        return sum(len(records) for records in self._records.values())

    def save(self, path):
        """
        Write the index to a binary cache file headed by a format version.

        :param path: (str) The cache file to write.
        """
        counts = {r.tokens: r.frequency for r in self.records()}
        with open(os.path.expanduser(path), "wb") as f:
            f.write(_CACHE_MAGIC + bytes([_CACHE_VERSION]))
            pickle.dump(counts, f, protocol=pickle.HIGHEST_PROTOCOL)

    @classmethod
    def load(cls, path):
        """
        Read an index written by save.

        :param path: (str) The cache file.
        :returns: (NGramIndex) The index.
        """
        with open(os.path.expanduser(path), "rb") as f:
            header = f.read(len(_CACHE_MAGIC) + 1)
            if header[:-1] != _CACHE_MAGIC:
                raise ValueError(f"{path} is not an n-gram index cache")
            if header[-1] != _CACHE_VERSION:
                raise ValueError(f"{path} has cache version {header[-1]}, expected {_CACHE_VERSION}")
            counts = pickle.load(f)
        return cls(counts)


def _open_corpus(path):
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def _parse_corpus_line(line, line_number, path):
    tokens_text, sep, count_text = line.rstrip("\n").rpartition("\t")
    tokens = tokens_text.split()
    if not sep or not tokens:
        raise MalformedLineError("Expected 'tokens<TAB>count'", line_number, path)
    if len(tokens) > MAX_N:
        raise MalformedLineError(f"{len(tokens)} tokens, at most {MAX_N} allowed", line_number, path)
    try:
        count = int(count_text)
    except ValueError:
        raise MalformedLineError(f"Count '{count_text}' is not an integer", line_number, path)
    if count < 1:
        raise MalformedLineError(f"Count {count} is not positive", line_number, path)
    return tuple(tokens), count


def build_index(corpus_path, lenient=None):
    """
    Stream an n-gram corpus file into an index. Lines repeating an n-gram have their counts summed.
    Files ending in .gz are read compressed.

    :param corpus_path: (str) Path to the corpus.
    :param lenient: (bool) Skip malformed lines with a warning instead of failing. Defaults to the configured value.
    :returns: (NGramIndex) The index.
    """
    if lenient is None:
        lenient = CONFIG['ngrams']['lenient']

    path = os.path.expanduser(corpus_path)
    counts = defaultdict(int)
    skipped = 0

    with _open_corpus(path) as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                tokens, count = _parse_corpus_line(line, line_number, path)
            except MalformedLineError as err:
                if not lenient:
                    raise
                logger.warning(f"Skipping malformed line: {err}")
                skipped += 1
                continue
            counts[tokens] += count

    index = NGramIndex(counts)
    logger.info(f"Indexed {len(index)} n-gram records from {path} ({skipped} lines skipped)")
    return index


def _pair_terms(pair):
    if hasattr(pair, "terms"):
        return pair.terms
    return tuple(pair)


def generate_wildcard_sequences(pair, sizes=SEQUENCE_SIZES, dedupe=True):
    """
    Instantiate the wildcard patterns for a base pair: for every n, the pair terms are placed at every
    ordered pair of slots (3, 6 and 10 patterns for n = 3, 4, 5), and again with the pair inverted.

    :param pair: (BasePair or tuple) The base pair, or its two terms.
    :param sizes: (tuple) The n-gram lengths to generate patterns for.
    :param dedupe: (bool) Drop repeated patterns, which only occur when both terms are equal.
    :returns: (list) WildcardSequence objects, original order before inverted for each n.
    """
    term1, term2 = _pair_terms(pair)
    sequences = []
    for n in sizes:
        for first, second in ((term1, term2), (term2, term1)):
            for i, j in itertools.combinations(range(n), 2):
                pattern = [None] * n
                pattern[i], pattern[j] = first, second
                sequences.append(WildcardSequence(n, pattern))

    if dedupe:
        sequences = list(dict.fromkeys(sequences))
    return sequences


def match_sequences(index, seqs, limit=None):
    """
    Collect every record matching any of the sequences.

    :param index: (NGramIndex) The n-gram index.
    :param seqs: (list) WildcardSequence objects.
    :param limit: (int) Keep at most this many of the most frequent records. None keeps all.
    :returns: (list) Distinct NGramRecords sorted by frequency descending then by tokens.
    """
    found = set()
    for sequence in seqs:
        found.update(index.match(sequence))

    matches = sorted(found, key=lambda r: (-r.frequency, r.tokens))
    if limit is not None:
        matches = matches[:limit]
    return matches
