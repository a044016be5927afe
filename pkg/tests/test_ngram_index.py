import gzip
import random

import pytest

from query_expansion.exceptions import MalformedLineError
from query_expansion.ngrams.index import (NGramIndex, NGramRecord, WildcardSequence, build_index,
                                          generate_wildcard_sequences, match_sequences)


def test_wildcard_sequence_count():
    sequences = generate_wildcard_sequences(("prisons", "overcrowded"))

    assert len(sequences) == 38
    assert [len([s for s in sequences if s.n == n]) for n in (3, 4, 5)] == [6, 12, 20]
    assert str(sequences[0]) == "prisons overcrowded *"
    assert str(sequences[3]) == "overcrowded prisons *"


def test_equal_pair_terms_are_deduplicated():
    assert len(generate_wildcard_sequences(("a", "a"))) == 19
    assert len(generate_wildcard_sequences(("a", "a"), dedupe=False)) == 38


def test_sequences_need_two_fixed_slots():
    with pytest.raises(ValueError):
        WildcardSequence(3, ("a", None, None))
    with pytest.raises(ValueError):
        WildcardSequence(3, ("a", "b"))


def test_records_are_validated():
    assert NGramRecord(("a", "b"), 2).text == "a b"
    with pytest.raises(ValueError):
        NGramRecord(("a",) * 6, 1)
    with pytest.raises(ValueError):
        NGramRecord(("a",), 0)


def test_worked_matches(worked_ngrams):
    matches = match_sequences(worked_ngrams, generate_wildcard_sequences(("prisons", "overcrowded")))

    assert [m.text for m in matches] == [
        "overcrowded prisons in the state",
        "overcrowded state prisons",
        "country with overcrowded prisons",
        "years of overcrowded prisons",
        "overcrowded prisons and jails",
        "prisons are overcrowded",
        "overcrowded prisons problem",
        "overcrowded prisons , poor conditions",
        "overcrowded prisons 108",
    ]


def test_match_limit_keeps_most_frequent(worked_ngrams):
    matches = match_sequences(worked_ngrams, generate_wildcard_sequences(("prisons", "overcrowded")), limit=2)
    assert [m.frequency for m in matches] == [120, 85]


def test_matching_is_case_insensitive():
    index = NGramIndex({("Overcrowded", "Prisons", "now"): 3})
    assert len(match_sequences(index, generate_wildcard_sequences(("prisons", "OVERCROWDED")))) == 1


def test_index_agrees_with_a_scan():
    rng = random.Random(11)
    vocabulary = [f"w{i}" for i in range(40)]
    counts = {}
    while len(counts) < 10000:
        tokens = tuple(rng.choice(vocabulary) for _ in range(rng.randint(1, 5)))
        counts[tokens] = rng.randint(1, 1000)
    index = NGramIndex(counts)
    records = list(index.records())

    for _ in range(100):
        pair = (rng.choice(vocabulary), rng.choice(vocabulary))
        sequences = generate_wildcard_sequences(pair)
        candidates = [r for r in records if set(pair) <= set(r.tokens)]
        expected = {r for r in candidates if any(s.matches(r) for s in sequences)}
        assert set(match_sequences(index, sequences)) == expected


def test_lookup(worked_ngrams):
    found = worked_ngrams.lookup("PRISONS", 1, 3)
    assert [r.text for r in found] == ["overcrowded prisons 108", "overcrowded prisons problem"]
    assert worked_ngrams.lookup("prisons", 1, 2) == []
    assert len(worked_ngrams) == 12


def test_duplicate_lines_are_summed(tmp_path):
    path = tmp_path / "ngrams.tsv"
    path.write_text("overcrowded prisons\t108\nstate prisons\t4\novercrowded prisons\t3\n")

    index = build_index(str(path))
    assert len(index) == 2
    assert index.lookup("overcrowded", 0, 2)[0].frequency == 111


def test_malformed_lines(tmp_path):
    path = tmp_path / "ngrams.tsv"
    path.write_text("overcrowded prisons\t10\novercrowded prisons ten\nstate prisons\tmany\na b c d e f\t1\n")

    with pytest.raises(MalformedLineError) as err:
        build_index(str(path), lenient=False)
    assert err.value.line_number == 2

    index = build_index(str(path), lenient=True)
    assert len(index) == 1


def test_compressed_corpus(tmp_path):
    path = tmp_path / "ngrams.tsv.gz"
    with gzip.open(path, "wt", encoding="utf-8") as f:
        f.write("overcrowded state prisons\t85\nprisons are overcrowded\t30\n")

    index = build_index(str(path))
    assert len(index.lookup("prisons", 2, 3)) == 1


def test_cache_round_trip(tmp_path, worked_ngrams):
    path = tmp_path / "index.bin"
    worked_ngrams.save(str(path))
    loaded = NGramIndex.load(str(path))

    assert sorted(loaded.records()) == sorted(worked_ngrams.records())

    path.write_bytes(b"something else")
    with pytest.raises(ValueError):
        NGramIndex.load(str(path))


def test_unigram_table():
    table = NGramIndex({("jails",): 4, ("prisons",): 9, ("a", "b"): 1}).unigram_table()
    assert table.frequency("prisons") == 9
    assert table.frequency("a") == 0
