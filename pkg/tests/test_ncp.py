import pytest

from query_expansion.exceptions import EmptyQueryError, MalformedLineError
from query_expansion.text.ncp import NcpBank, detect_ncp, load_ncp_bank, load_overrides, normalize_for_parser, parser_tokens


def test_bank_phrases_are_fused(ncp_bank):
    sq = detect_ncp("United States control of insider trading", ncp_bank)

    assert sq.tokens == ("United_States", "control", "of", "insider", "trading")
    assert sq.ncp_flags == (True, False, False, False, False)


def test_phrase_at_the_end_of_the_query(ncp_bank):
    sq = detect_ncp("Iranian support for Lebanese hostage takers", ncp_bank)
    assert sq.tokens == ("iranian", "support", "for", "lebanese", "Hostage_Takers")


def test_acronyms_take_their_full_form(ncp_bank):
    sq = detect_ncp("UN peacekeeping", ncp_bank)

    assert sq.tokens == ("United_Nations", "peacekeeping")
    assert sq.ncp_flags == (True, False)


def test_quoted_spans_are_one_unit(ncp_bank):
    sq = detect_ncp('"black market" fountain pen sales', ncp_bank)

    assert sq.tokens == ("Black_Market", "Fountain_Pen", "sales")
    assert sq.ncp_flags == (True, True, False)


def test_longest_match_wins():
    bank = NcpBank(["new york", "new york times"])
    sq = detect_ncp("new york times archive", bank)
    assert sq.tokens == ("New_York_Times", "archive")


def test_underscore_joined_input_is_kept():
    sq = detect_ncp("united_states exports", NcpBank())
    assert sq.tokens == ("United_States", "exports")
    assert sq.ncp_flags == (True, False)


def test_empty_query():
    with pytest.raises(EmptyQueryError):
        detect_ncp("   ", NcpBank())
    with pytest.raises(EmptyQueryError):
        detect_ncp("?!", NcpBank())


def test_parser_tokens_split_slashes(ncp_bank):
    sq = detect_ncp("prisons/jails in new york", ncp_bank)
    tokens = parser_tokens(sq)

    assert tokens.tokens == ("prisons", "or", "jails", "in", "New_York")
    assert tokens.ncp_flags == (False, False, False, False, True)
    assert normalize_for_parser(sq) == "prisons or jails in New_York"


def test_bank_entries_need_two_components():
    with pytest.raises(ValueError):
        NcpBank(["prison"])
    with pytest.raises(ValueError):
        NcpBank(acronyms={"Un": "united nations"})


def test_load_bank(ncp_bank):
    assert ("united", "states") in ncp_bank
    assert ncp_bank.acronyms["NEP"] == ("new", "economic", "policy")
    assert ncp_bank.max_length == 2


def test_load_bank_reports_bad_lines(tmp_path):
    path = tmp_path / "bank.txt"
    path.write_text("united states\nprison\n")

    with pytest.raises(MalformedLineError) as err:
        load_ncp_bank(str(path))
    assert err.value.line_number == 2


def test_overrides_extend_the_bank(tmp_path, ncp_bank):
    path = tmp_path / "overrides.tsv"
    path.write_text("310\tradio waves\n310\tbrain cancer\n")
    overrides = load_overrides(str(path))

    assert overrides == {"310": ["radio waves", "brain cancer"]}
    sq = detect_ncp("radio waves and brain cancer", ncp_bank.with_phrases(overrides["310"]))
    assert sq.tokens == ("Radio_Waves", "and", "Brain_Cancer")
