import os

import pytest

from query_expansion.ngrams.index import build_index
from query_expansion.parsing.dependencies import read_parse_file
from query_expansion.parsing.roles import load_role_mapping
from query_expansion.text.lex import load_stoplist, load_unigram_table
from query_expansion.text.ncp import load_ncp_bank

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture(scope="session")
def stoplist():
    return load_stoplist()


@pytest.fixture(scope="session")
def role_table():
    return load_role_mapping()


@pytest.fixture(scope="session")
def parses():
    return read_parse_file(data_path("parses.txt"))


@pytest.fixture(scope="session")
def ncp_bank():
    return load_ncp_bank(data_path("ncp_bank.txt"))


@pytest.fixture(scope="session")
def unigrams():
    return load_unigram_table(data_path("unigrams.tsv"))


@pytest.fixture(scope="session")
def worked_ngrams():
    return build_index(data_path("ngrams_worked.tsv"))


# planted collection: expansion terms occur in the n-gram corpus and in relevant documents only
E2E_QUERIES = {
    "q1": "coping with overcrowded prisons",
    "q2": "tobacco company advertising",
    "q3": "insider trading regulation",
    "q4": "hostage release negotiations",
    "q5": "prisons",
    "q6": "space exploration funding",
    "q7": "ancient pottery glaze",
}

E2E_PARSES = {
    "q1": ["amod(prisons-4, overcrowded-3)", "prep_with(coping-1, prisons-4)", "prep_with(with-2, -)"],
    "q2": ["nn(advertising-3, tobacco-1)", "nn(advertising-3, company-2)"],
    "q3": ["nn(trading-2, insider-1)", "nn(regulation-3, trading-2)"],
    "q4": ["nn(negotiations-3, hostage-1)", "nn(negotiations-3, release-2)"],
    "q6": ["nn(funding-3, space-1)", "nn(funding-3, exploration-2)"],
    "q7": ["amod(glaze-3, ancient-1)", "nn(glaze-3, pottery-2)"],
}

E2E_CONTENT = {
    "q1": ["coping", "overcrowded", "prisons"],
    "q2": ["tobacco", "company", "advertising"],
    "q3": ["insider", "trading", "regulation"],
    "q4": ["hostage", "release", "negotiations"],
    "q6": ["space", "exploration", "funding"],
    "q7": ["ancient", "pottery", "glaze"],
}

E2E_EXPANSION = {
    "q1": ["jails", "inmates", "parole", "sentencing", "wardens"],
    "q2": ["nicotine", "cigarettes", "marketing", "billboards", "smokers"],
    "q3": ["securities", "brokers", "stocks", "enforcement", "fraud"],
    "q4": ["captives", "diplomats", "ransom", "kidnappers", "embassy"],
    "q6": ["rockets", "astronauts", "budgets", "orbit", "satellites"],
}

FILLER = ["weather", "garden", "music", "river", "village", "history", "travel", "kitchen", "painting", "football",
          "mountain", "library", "forest", "holiday", "recipe", "concert", "island", "bicycle", "harbour", "theatre"]

DOC_LENGTH = 40


def _pad(words, offset):
    words = list(words)
    i = offset
    while len(words) < DOC_LENGTH:
        words.append(FILLER[i % len(FILLER)])
        i += 1
    return " ".join(words)


def _documents():
    docs, qrels = [], []
    judged = ["q1", "q2", "q3", "q4", "q7"]
    for n, qid in enumerate(judged):
        content = E2E_CONTENT[qid]
        expansion = E2E_EXPANSION.get(qid, [])
        for i in range(4):
            doc_id = f"{qid}-rel-{i}"
            docs.append((doc_id, _pad(content + expansion * 2, n * 3 + i)))
            qrels.append((qid, doc_id, 1))
        for i in range(6):
            doc_id = f"{qid}-dis-{i}"
            docs.append((doc_id, _pad(content * 3, n * 5 + i)))
            if i < 3:
                qrels.append((qid, doc_id, 0))

    # the one-word query is judged on the prison documents
    qrels.extend(("q5", f"q1-rel-{i}", 1) for i in range(4))

    for i in range(200 - len(docs)):
        docs.append((f"filler-{i:03d}", _pad([], i)))
    return docs, qrels


def _ngram_lines():
    lines = []
    for qid, expansion in E2E_EXPANSION.items():
        content = E2E_CONTENT[qid]
        for k, term in enumerate(expansion):
            lines.append(f"{term}\t{1000 - 100 * k}")
            for i in range(len(content)):
                for j in range(i + 1, len(content)):
                    lines.append(f"{content[i]} {content[j]} {term}\t{50 - 5 * k}")
    return lines


@pytest.fixture(scope="session")
def e2e_inputs(tmp_path_factory):
    """ Writes the planted 200 document experiment and returns the RunConfig keyword arguments for it. """
    root = tmp_path_factory.mktemp("e2e")
    docs, qrels = _documents()

    with open(root / "queries.tsv", "w") as f:
        f.writelines(f"{qid}\t{text}\n" for qid, text in E2E_QUERIES.items())
    with open(root / "documents.tsv", "w") as f:
        f.writelines(f"{doc_id}\t{text}\n" for doc_id, text in docs)
    with open(root / "qrels.txt", "w") as f:
        f.writelines(f"{qid} 0 {doc_id} {rel}\n" for qid, doc_id, rel in qrels)
    with open(root / "parses.txt", "w") as f:
        for qid, lines in E2E_PARSES.items():
            f.write(f"#qid {qid}\n" + "\n".join(lines) + "\n\n")
    with open(root / "ngrams.tsv", "w") as f:
        f.write("\n".join(_ngram_lines()) + "\n")

    return dict(queries_path=str(root / "queries.tsv"), documents_path=str(root / "documents.tsv"),
                qrels_path=str(root / "qrels.txt"), parses_path=str(root / "parses.txt"),
                corpus_path=str(root / "ngrams.tsv"), ncp_bank_path="", ncp_override_path="", unigram_path="",
                stoplist_path="default", mapping_path="default", mu=1500, depth=1000, top_n=5, seed=7,
                ga={"population_size": 20, "max_generations": 15})
