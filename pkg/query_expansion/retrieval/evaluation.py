"""
Relevance judgments, TREC run files and the MAP / P@N measures.
"""

import csv
import logging
import os
from collections import defaultdict, namedtuple

import pandas as pd

from query_expansion import CONFIG
from query_expansion.exceptions import EvaluationError

logger = logging.getLogger(__name__)


class Qrels:
    """
    Relevance grades of (query, document) pairs. Grades above 0 count as relevant.

    :param judgments: (dict) query id -> {doc id: grade}.
    """

    def __init__(self, judgments=None):
        self._judgments = {}
        for query_id, docs in (judgments or {}).items():
            for doc_id, grade in docs.items():
                if grade < 0:
                    raise ValueError(f"Negative relevance grade {grade} for query {query_id}, document {doc_id}")
            self._judgments[query_id] = dict(docs)

    @property
    def query_ids(self):
        return sorted(self._judgments)

    def grade(self, query_id, doc_id):
        return self._judgments.get(query_id, {}).get(doc_id, 0)

    def relevant(self, query_id):
        """ The ids of the documents judged relevant for a query. """
        return {doc_id for doc_id, grade in self._judgments.get(query_id, {}).items() if grade > 0}

    def as_dict(self):
        return {query_id: dict(docs) for query_id, docs in self._judgments.items()}

    def __contains__(self, query_id):
        return bool(self.relevant(query_id))

    def __len__(self):
        return len(self._judgments)


def read_qrels(path):
    """
    Read TREC qrels, 'qid 0 docid rel' per line.

    :param path: (str) The qrels file.
    :returns: (Qrels) The judgments.
    """
    df = pd.read_csv(os.path.expanduser(path), sep=r"\s+", header=None, names=["qid", "iter", "docid", "rel"],
                     dtype={"qid": str, "iter": str, "docid": str, "rel": int}, engine="python")

    judgments = defaultdict(dict)
    for qid, docid, rel in zip(df["qid"], df["docid"], df["rel"]):
        judgments[qid][docid] = int(rel)
    return Qrels(judgments)


class RunResult(namedtuple("RunResult", ["query_id", "ranking"])):
    """ A query id and its ranked (doc_id, score) pairs, best first. """
    __slots__ = ()

    def __new__(cls, query_id, ranking):
        ranking = [(doc_id, float(score)) for doc_id, score in ranking]
        doc_ids = [doc_id for doc_id, _ in ranking]
        if len(doc_ids) != len(set(doc_ids)):
            raise ValueError(f"Run for query {query_id} ranks a document twice")
        if any(a[1] < b[1] for a, b in zip(ranking, ranking[1:])):
            raise ValueError(f"Scores of the run for query {query_id} are not in descending order")
        return super().__new__(cls, query_id, ranking)

    @property
    def doc_ids(self):
        return [doc_id for doc_id, _ in self.ranking]


def average_precision(run, qrels, query_id=None):
    """
    :param run: (RunResult) The ranking.
    :param qrels: (Qrels) The judgments.
    :param query_id: (str) Query to evaluate, defaults to the run's query id.
    :returns: (float) Average precision in [0, 1].
    """
    query_id = run.query_id if query_id is None else query_id
    relevant = qrels.relevant(query_id)
    if not relevant:
        raise EvaluationError(f"Query {query_id} has no relevant documents, average precision is undefined")

    hits, total = 0, 0.0
    for rank, doc_id in enumerate(run.doc_ids, start=1):
        if doc_id in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def p_at_n(run, qrels, n):
    """
    :returns: (float) Fraction of the first n ranks holding a relevant document.
    """
    if n < 1:
        raise ValueError(f"Cut-off must be positive, got {n}")
    relevant = qrels.relevant(run.query_id)
    return sum(doc_id in relevant for doc_id in run.doc_ids[:n]) / n


def mean_average_precision(runs, qrels):
    """
    Mean of the average precision of every run whose query has relevant documents.

    :param runs: (iterable or dict) RunResult objects, or a mapping of query id to RunResult.
    :param qrels: (Qrels) The judgments.
    :returns: (float) MAP.
    """
    if isinstance(runs, dict):
        runs = runs.values()
    values = [average_precision(run, qrels) for run in runs if run.query_id in qrels]
    if not values:
        raise EvaluationError("No evaluable queries, MAP is undefined")
    return sum(values) / len(values)


def evaluate_run(runs, qrels, cutoffs=None):
    """
    Per-query average precision and precision at each cut-off.

    :param runs: (iterable or dict) RunResult objects, or a mapping of query id to RunResult.
    :param qrels: (Qrels) The judgments.
    :param cutoffs: (list) P@N cut-offs, defaults to the configured precision_cutoffs.
    :returns: (pandas.DataFrame) One row per evaluable query, indexed by query id, columns 'map' and 'P_<n>'.
    """
    if cutoffs is None:
        cutoffs = CONFIG['retrieval']['precision_cutoffs']
    if isinstance(runs, dict):
        runs = runs.values()

    rows = {}
    for run in runs:
        if run.query_id not in qrels:
            logger.warning(f"Query {run.query_id} has no relevant documents and is not evaluated")
            continue
        row = {"map": average_precision(run, qrels)}
        row.update({f"P_{n}": p_at_n(run, qrels, n) for n in cutoffs})
        rows[run.query_id] = row

    df = pd.DataFrame.from_dict(rows, orient="index", columns=["map"] + [f"P_{n}" for n in cutoffs])
    df.index.name = "qid"
    return df.sort_index()


def write_run(runs, path, tag=None):
    """
    Write rankings in TREC format, 'qid Q0 docid rank score tag'.

    :param runs: (iterable or dict) RunResult objects, or a mapping of query id to RunResult.
    :param path: (str) The file to write.
    :param tag: (str) The run tag, defaults to the configured run_tag.
    """
    if tag is None:
        tag = CONFIG['pipeline']['run_tag']
    if isinstance(runs, dict):
        runs = runs.values()

    rows = [(run.query_id, "Q0", doc_id, rank, f"{score:.6f}", tag)
            for run in runs for rank, (doc_id, score) in enumerate(run.ranking, start=1)]
    df = pd.DataFrame(rows, columns=["qid", "q0", "docid", "rank", "score", "tag"])
    df.to_csv(os.path.expanduser(path), sep=" ", header=False, index=False, quoting=csv.QUOTE_NONE)


def read_run(path):
    """
    Read a TREC run file.

    :param path: (str) The run file.
    :returns: (dict) query id -> RunResult, each ranked by rank.
    """
    df = pd.read_csv(os.path.expanduser(path), sep=r"\s+", header=None,
                     names=["qid", "q0", "docid", "rank", "score", "tag"],
                     dtype={"qid": str, "q0": str, "docid": str, "rank": int, "score": float, "tag": str},
                     engine="python")

    runs = {}
    for qid, group in df.groupby("qid", sort=True):
        group = group.sort_values(["rank", "docid"])
        runs[qid] = RunResult(qid, zip(group["docid"], group["score"]))
    return runs
