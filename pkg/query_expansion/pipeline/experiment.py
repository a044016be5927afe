"""
End-to-end experiment: expand every query under each mode, tune the role weights of the expanding
modes with the genetic algorithm against retrieval MAP, retrieve with the best weights and report.
"""

import csv
import logging
import os
from collections import OrderedDict

import pandas as pd

from query_expansion import CONFIG
from query_expansion.exceptions import EvaluationError, QueryExpansionError
from query_expansion.ngrams.index import build_index
from query_expansion.ngrams.pool import write_pool_dump
from query_expansion.optimise.genetic import Chromosome, FitnessOracle, GaConfig, GeneticOptimiser, write_report
from query_expansion.parsing.dependencies import read_parse_file
from query_expansion.parsing.roles import load_role_mapping
from query_expansion.pipeline.expansion import (LanguageModelQuery, LinguisticQueryExpansion, emit_weighted_query,
                                                get_expansion_class)
from query_expansion.retrieval.evaluation import average_precision, evaluate_run, read_qrels, write_run
from query_expansion.retrieval.index import index_collection, read_documents
from query_expansion.retrieval.scoring import ScoreMatrix
from query_expansion.text.lex import UnigramFrequencyTable, load_stoplist, load_unigram_table
from query_expansion.text.ncp import NcpBank, load_ncp_bank, load_overrides

logger = logging.getLogger(__name__)

# order in which a query's exclusion reason is reported when several apply
EXCLUSION_REASONS = ("one-word", "zero-qrels", "no-parse", "un-expandable", "empty")
UNDER_PERFORMING_AP = 0.1


def read_queries(path):
    """
    Read a 'qid<TAB>title text' query file.

    :param path: (str) The query file.
    :returns: (collections.OrderedDict) query id -> raw text, in file order.
    """
    df = pd.read_csv(os.path.expanduser(path), sep="\t", header=None, names=["qid", "text"], dtype=str,
                     quoting=csv.QUOTE_NONE, keep_default_na=False)
    queries = OrderedDict()
    for qid, text in zip(df["qid"].str.strip(), df["text"]):
        if qid in queries:
            raise ValueError(f"Query {qid} appears more than once in {path}")
        queries[qid] = text
    return queries


def length_cohort(length):
    """ short for 1-2 words, medium for 3-4 and long for 5 or more. """
    if length <= 2:
        return "short"
    if length <= 4:
        return "medium"
    return "long"


class RunConfig:
    """
    Everything a run needs. Defaults come from the config file, keyword arguments override them.
    GA parameters not given in `ga` are also taken from the config file, with this run's seed.
    """

    mode = CONFIG['pipeline']['mode']
    compare_modes = tuple(CONFIG['pipeline']['compare_modes'])
    queries_path = CONFIG['common']['queries_path']
    documents_path = CONFIG['common']['documents_path']
    qrels_path = CONFIG['common']['qrels_path']
    output_path = CONFIG['common']['output_path']
    seed = CONFIG['common']['seed']
    stoplist_path = CONFIG['text']['stoplist_path']
    unigram_path = CONFIG['text']['unigram_path']
    ncp_bank_path = CONFIG['ncp']['bank_path']
    ncp_override_path = CONFIG['ncp']['override_path']
    mapping_path = CONFIG['roles']['mapping_path']
    parses_path = CONFIG['roles']['parses_path']
    strict_coi = CONFIG['roles']['strict_coi']
    exclude_sc_pairs = CONFIG['roles']['exclude_sc_pairs']
    corpus_path = CONFIG['ngrams']['corpus_path']
    lenient = CONFIG['ngrams']['lenient']
    max_matched_ngrams_per_pair = CONFIG['ngrams']['max_matched_ngrams_per_pair']
    top_n = CONFIG['expansion']['top_n']
    sweep_values = tuple(CONFIG['expansion']['sweep_values'])
    mu = CONFIG['retrieval']['mu']
    depth = CONFIG['retrieval']['depth']
    precision_cutoffs = tuple(CONFIG['retrieval']['precision_cutoffs'])
    dump_pools = CONFIG['pipeline']['dump_pools']
    sweep = CONFIG['pipeline']['sweep']
    run_tag = CONFIG['pipeline']['run_tag']
    report_name = CONFIG['pipeline']['report_name']
    metrics_name = CONFIG['pipeline']['metrics_name']
    ga = None

    PARAMETERS = ("mode", "compare_modes", "queries_path", "documents_path", "qrels_path", "output_path", "seed",
                  "stoplist_path", "unigram_path", "ncp_bank_path", "ncp_override_path", "mapping_path", "parses_path",
                  "strict_coi", "exclude_sc_pairs", "corpus_path", "lenient", "max_matched_ngrams_per_pair", "top_n",
                  "sweep_values", "mu", "depth", "precision_cutoffs", "dump_pools", "sweep", "run_tag", "report_name",
                  "metrics_name", "ga")

    def __init__(self, **overrides):
        for key, value in overrides.items():
            if key not in self.PARAMETERS:
                raise TypeError(f"Unknown run parameter '{key}'")
            setattr(self, key, value)

        self.mode = self.mode.lower()
        self.compare_modes = tuple(m.lower() for m in self.compare_modes if m.lower() != self.mode)
        for mode in self.modes:
            get_expansion_class(mode)

        if self.ga is None:
            self.ga = {}
        if isinstance(self.ga, dict):
            self.ga = dict(self.ga)
            self.ga.setdefault("seed", self.seed)

    @property
    def modes(self):
        return (self.mode,) + tuple(self.compare_modes)

    @property
    def expanding_modes(self):
        return [m for m in self.modes if m != LanguageModelQuery.mode]

    def ga_config(self, free_genes):
        """ A GaConfig for a mode, with the mode's free genes. """
        if isinstance(self.ga, GaConfig):
            params = self.ga.as_dict()
        else:
            params = dict(self.ga)
        params["free_genes"] = free_genes
        return GaConfig(**params)

    def validate(self):
        """ Check that every input the selected modes need exists. """
        required = [self.queries_path, self.documents_path, self.qrels_path]
        if self.expanding_modes:
            required.append(self.corpus_path)
            for optional in (self.ncp_bank_path, self.ncp_override_path, self.unigram_path):
                if optional:
                    required.append(optional)
        if LinguisticQueryExpansion.mode in self.modes:
            required.append(self.parses_path)

        for path in required:
            if not os.path.exists(os.path.expanduser(path)):
                raise FileNotFoundError(f"Input {path} does not exist")
        if self.top_n < 1:
            raise ValueError(f"Number of expansion terms must be positive, got {self.top_n}")
        if self.mu <= 0:
            raise ValueError(f"Dirichlet prior must be positive, got {self.mu}")


class ExperimentResources:
    """
    The loaded inputs of a run. The n-gram corpus and the parses are only read when a mode needs them.

    :param cfg: (RunConfig) The run configuration.
    """

    def __init__(self, cfg):
        self.queries = read_queries(cfg.queries_path)
        self.qrels = read_qrels(cfg.qrels_path)
        self.collection = index_collection(read_documents(cfg.documents_path))
        self.stoplist = load_stoplist(cfg.stoplist_path)

        self.ngram_index = None
        self.ncp_bank = NcpBank()
        self.overrides = {}
        self.freqs = UnigramFrequencyTable()
        self.parses = {}
        self.role_table = None

        if cfg.expanding_modes:
            self.ngram_index = build_index(cfg.corpus_path, lenient=cfg.lenient)
            if cfg.ncp_bank_path:
                self.ncp_bank = load_ncp_bank(cfg.ncp_bank_path)
            if cfg.ncp_override_path:
                self.overrides = load_overrides(cfg.ncp_override_path)
            if cfg.unigram_path:
                self.freqs = load_unigram_table(cfg.unigram_path)
            else:
                self.freqs = self.ngram_index.unigram_table()

        if LinguisticQueryExpansion.mode in cfg.modes:
            self.parses = read_parse_file(cfg.parses_path)
            self.role_table = load_role_mapping(cfg.mapping_path)

    def expander(self, mode, cfg, top_n=None):
        """ The expansion object for a mode. """
        cls = get_expansion_class(mode)
        kwargs = dict(ncp_bank=self.ncp_bank, ngram_index=self.ngram_index, freqs=self.freqs,
                      overrides=self.overrides, top_n=top_n or cfg.top_n,
                      max_matched_ngrams=cfg.max_matched_ngrams_per_pair)
        if cls is LinguisticQueryExpansion:
            return cls(self.stoplist, self.parses, self.role_table, strict_coi=cfg.strict_coi,
                       exclude_sc_pairs=cfg.exclude_sc_pairs, **kwargs)
        return cls(self.stoplist, **kwargs)


class RetrievalOracle(FitnessOracle):
    """
    MAP of retrieval over a set of expanded queries under a chromosome's role weights.
    The element scores of each query are computed once.

    :param expanded: (list) ExpandedQuery objects.
    :param collection: (CollectionIndex) The documents.
    :param qrels: (Qrels) The judgments.
    :param mu: (float) The Dirichlet prior.
    :param depth: (int) Documents retrieved per query.
    """

    def __init__(self, expanded, collection, qrels, mu, depth):
        self.expanded = list(expanded)
        self.qrels = qrels
        self.depth = depth
        self.matrices = {}
        for eq in self.expanded:
            elements = [e.element for e in eq.to_structured_query(Chromosome.uniform()).elements]
            self.matrices[eq.query_id] = ScoreMatrix(collection, elements, mu)

    def run(self, eq, chromosome):
        """ The ranking of one expanded query. """
        query = eq.to_structured_query(chromosome)
        return self.matrices[eq.query_id].rank(eq.query_id, query.weights, self.depth)

    def runs(self, chromosome):
        return OrderedDict((eq.query_id, self.run(eq, chromosome)) for eq in self.expanded)

    def evaluate_map(self, chromosome):
        aps = [average_precision(self.run(eq, chromosome), self.qrels) for eq in self.expanded]
        return sum(aps) / len(aps)


class ModeResult:
    """
    The outcome of one mode: expanded queries, chosen weights, runs and metrics.

    :param weights: (Chromosome or dict) The weights of every query, or query id -> Chromosome when
        each query was optimised on its own.
    """

    def __init__(self, mode, expanded, weights, runs, metrics, optimisation=None):
        self.mode = mode
        self.expanded = expanded
        self.weights = weights
        self.runs = runs
        self.metrics = metrics
        self.optimisation = optimisation

    def weights_of(self, query_id):
        """ The weights the query was retrieved with. """
        if isinstance(self.weights, dict):
            return self.weights[query_id]
        return self.weights

    @property
    def map(self):
        return float(self.metrics["map"].mean())


class ExperimentReport:
    """
    Results of a run across modes.

    :param cfg: (RunConfig) The run configuration.
    :param results: (dict) mode -> ModeResult.
    :param exclusions: (dict) query id -> reason, for queries left out of the evaluation.
    :param mode_exclusions: (dict) mode -> {query id: reason}.
    :param sweep: (pandas.DataFrame) MAP per number of expansion terms, None if no sweep was run.
    """

    def __init__(self, cfg, results, exclusions, mode_exclusions, sweep=None):
        self.cfg = cfg
        self.results = results
        self.exclusions = exclusions
        self.mode_exclusions = mode_exclusions
        self.sweep = sweep

    @property
    def maps(self):
        return {mode: result.map for mode, result in self.results.items()}

    def exclusion_counts(self):
        """ Number of excluded queries per reason, every reason listed. """
        return {reason: sum(1 for r in self.exclusions.values() if r == reason) for reason in EXCLUSION_REASONS}

    def deltas(self):
        """ Relative MAP change (%) of the main mode over each comparison mode, None when undefined. """
        main = self.maps[self.cfg.mode]
        deltas = {}
        for mode in self.cfg.compare_modes:
            other = self.maps[mode]
            deltas[mode] = None if other == 0 else 100.0 * (main - other) / other
        return deltas

    def per_query(self):
        """ Per-query AP of every mode with the query length cohort. """
        main = self.results[self.cfg.mode]
        df = pd.DataFrame({mode: result.metrics["map"] for mode, result in self.results.items()})
        lengths = {eq.query_id: eq.length for eq in main.expanded}
        df.insert(0, "cohort", [length_cohort(lengths[qid]) for qid in df.index])
        df.index.name = "qid"
        return df

    def under_performing(self):
        """ Queries below 0.1 AP both in the baseline (LM when it was run) and in the main mode. """
        baseline = LanguageModelQuery.mode if LanguageModelQuery.mode in self.results else self.cfg.mode
        df = self.per_query()
        return df[(df[baseline] < UNDER_PERFORMING_AP) & (df[self.cfg.mode] < UNDER_PERFORMING_AP)]

    def metrics_frame(self):
        """ Long 'qid metric value' table over modes, with an 'all' row per mode and metric. """
        rows = []
        for mode, result in self.results.items():
            for qid, values in result.metrics.iterrows():
                rows.extend((qid, f"{mode}_{metric}", value) for metric, value in values.items())
            rows.extend(("all", f"{mode}_{metric}", value) for metric, value in result.metrics.mean().items())
        return pd.DataFrame(rows, columns=["qid", "metric", "value"])

    def to_text(self):
        """ The human readable report. Holds nothing that varies between identical runs. """
        cfg = self.cfg
        lines = [f"Query expansion experiment: mode {cfg.mode}, compared with {', '.join(cfg.compare_modes) or '-'}",
                 f"mu = {cfg.mu:g}, top n = {cfg.top_n}, depth = {cfg.depth}, seed = {cfg.seed}", ""]

        lines.append(f"Queries: {len(self.exclusions) + len(self.per_query())}, "
                     f"evaluated: {len(self.per_query())}, excluded: {len(self.exclusions)}")
        for reason, count in self.exclusion_counts().items():
            lines.append(f"  {reason:<14} {count}")
        for mode, excluded in self.mode_exclusions.items():
            if excluded:
                listing = ", ".join(f"{qid} ({reason})" for qid, reason in excluded.items())
                lines.append(f"  excluded under {mode}: {listing}")
        lines.append("")

        lines.append("Mean scores")
        summary = pd.DataFrame({mode: result.metrics.mean() for mode, result in self.results.items()}).T
        summary.index.name = "mode"
        lines.append(summary.to_string(float_format=lambda v: f"{v:.4f}"))
        lines.append("")

        for mode, delta in self.deltas().items():
            change = "n/a" if delta is None else f"{delta:+.2f}%"
            lines.append(f"MAP change of {cfg.mode} over {mode}: {change}")
        lines.append("")

        for mode, result in self.results.items():
            if result.optimisation is not None:
                if isinstance(result.weights, dict):
                    for qid, weights in result.weights.items():
                        lines.append(f"Weights for {mode} on {qid} (CoI Dc Rc Sc Ec): {weights}")
                else:
                    lines.append(f"Weights for {mode} (CoI Dc Rc Sc Ec): {result.weights}")
        lines.append("")

        lines.append("Average precision per query")
        lines.append(self.per_query().to_string(float_format=lambda v: f"{v:.4f}"))
        lines.append("")

        under = self.under_performing()
        lines.append(f"Under-performing queries (baseline and expanded AP < {UNDER_PERFORMING_AP}): {len(under)}")
        if len(under):
            lines.append(under.to_string(float_format=lambda v: f"{v:.4f}"))
        lines.append("")

        if self.sweep is not None:
            lines.append(f"MAP of {cfg.mode} per number of expansion terms")
            lines.append(self.sweep.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
            lines.append("")

        return "\n".join(lines)


def expand_all(expander, queries, qrels):
    """
    Expand every query with one mode.

    :returns: (tuple) (OrderedDict of query id -> ExpandedQuery, dict of query id -> exclusion reason)
    """
    expanded, excluded = OrderedDict(), {}
    for qid, text in queries.items():
        try:
            eq = expander.expand(qid, text)
        except QueryExpansionError as err:
            reason = getattr(err, "reason", "un-expandable")
            if qid not in qrels and reason != "one-word":
                reason = "zero-qrels"
            excluded[qid] = reason
            logger.info(f"Excluding query {qid} under {expander.mode}: {err}")
            continue

        if qid not in qrels:
            excluded[qid] = "zero-qrels"
            logger.info(f"Excluding query {qid} under {expander.mode}: no relevant documents")
            continue
        expanded[qid] = eq
    return expanded, excluded


def _first_reason(reasons):
    return min(reasons, key=EXCLUSION_REASONS.index)


def optimise_mode(cfg, expander, expanded, resources, label=None):
    """
    Tune the role weights of a mode and return the runs retrieved with them.

    :returns: (tuple) (weights, runs, list of (label, OptimisationResult)). The weights are one Chromosome,
        or query id -> Chromosome when the GA scope is per query.
    """
    ga = cfg.ga_config(expander.free_genes)
    collection, qrels = resources.collection, resources.qrels

    if expander.mode == LanguageModelQuery.mode:
        oracle = RetrievalOracle(expanded, collection, qrels, cfg.mu, cfg.depth)
        return Chromosome.uniform(), oracle.runs(Chromosome.uniform()), []

    if ga.scope == "set":
        oracle = RetrievalOracle(expanded, collection, qrels, cfg.mu, cfg.depth)
        result = GeneticOptimiser(ga).optimise(oracle)
        return result.best, oracle.runs(result.best), [(label or expander.mode, result)]

    weights, runs, results = OrderedDict(), OrderedDict(), []
    for eq in expanded:
        oracle = RetrievalOracle([eq], collection, qrels, cfg.mu, cfg.depth)
        result = GeneticOptimiser(ga).optimise(oracle)
        weights[eq.query_id] = result.best
        runs[eq.query_id] = oracle.run(eq, result.best)
        results.append((eq.query_id, result))
    return weights, runs, results


def run_sweep(cfg, resources, evaluable):
    """
    MAP of the main mode for every number of expansion terms in cfg.sweep_values.

    :returns: (pandas.DataFrame) Columns top_n and map.
    """
    rows = []
    for top_n in cfg.sweep_values:
        expander = resources.expander(cfg.mode, cfg, top_n=top_n)
        expanded = [expander.expand(qid, resources.queries[qid]) for qid in evaluable]
        _, runs, _ = optimise_mode(cfg, expander, expanded, resources)
        metrics = evaluate_run(runs, resources.qrels, cfg.precision_cutoffs)
        rows.append({"top_n": top_n, "map": float(metrics["map"].mean())})
        logger.info(f"Sweep: top {top_n} expansion terms give MAP {rows[-1]['map']:.4f}")
    return pd.DataFrame(rows, columns=["top_n", "map"])


def run_experiment(cfg, resources=None):
    """
    Run every mode of the configuration over the query set and write the outputs.

    :param cfg: (RunConfig) The run configuration.
    :param resources: (ExperimentResources) Loaded inputs, read from cfg when None.
    :returns: (ExperimentReport) The report.
    """
    cfg.validate()
    if resources is None:
        resources = ExperimentResources(cfg)

    expanders, expanded_by_mode, mode_exclusions = {}, {}, {}
    for mode in cfg.modes:
        expanders[mode] = resources.expander(mode, cfg)
        expanded_by_mode[mode], mode_exclusions[mode] = expand_all(expanders[mode], resources.queries,
                                                                   resources.qrels)

    exclusions = {}
    for qid in resources.queries:
        reasons = [excluded[qid] for excluded in mode_exclusions.values() if qid in excluded]
        if reasons:
            exclusions[qid] = _first_reason(reasons)

    evaluable = [qid for qid in resources.queries if qid not in exclusions]
    if not evaluable:
        raise EvaluationError("Every query was excluded, nothing to evaluate")
    logger.info(f"{len(evaluable)} of {len(resources.queries)} queries are evaluated")

    results = OrderedDict()
    for mode in cfg.modes:
        expanded = [expanded_by_mode[mode][qid] for qid in evaluable]
        weights, runs, optimisation = optimise_mode(cfg, expanders[mode], expanded, resources)
        metrics = evaluate_run(runs, resources.qrels, cfg.precision_cutoffs)
        results[mode] = ModeResult(mode, expanded, weights, runs, metrics, optimisation or None)
        logger.info(f"{mode}: MAP {results[mode].map:.4f}")

    sweep = None
    if cfg.sweep and cfg.mode != LanguageModelQuery.mode:
        sweep = run_sweep(cfg, resources, evaluable)

    report = ExperimentReport(cfg, results, exclusions, mode_exclusions, sweep)
    write_outputs(report)
    return report


def write_outputs(report):
    """
    Write runs, emitted queries, GA reports, metrics, the report and (optionally) the pools to the output directory.
    """
    cfg = report.cfg
    output_path = os.path.expanduser(cfg.output_path)
    os.makedirs(output_path, exist_ok=True)

    for mode, result in report.results.items():
        tag = cfg.run_tag if mode == cfg.mode else mode
        write_run(result.runs, os.path.join(output_path, f"{mode}.run"), tag=tag)

        with open(os.path.join(output_path, f"{mode}_queries.txt"), "w", encoding="utf-8") as f:
            for eq in result.expanded:
                f.write(f"{eq.query_id}\t{emit_weighted_query(eq, result.weights_of(eq.query_id))}\n")

        if result.optimisation:
            ga_path = os.path.join(output_path, f"{mode}_ga.tsv")
            if os.path.exists(ga_path):
                os.remove(ga_path)
            for label, optimisation in result.optimisation:
                write_report(optimisation, ga_path, label=label)

        if cfg.dump_pools and mode != LanguageModelQuery.mode:
            write_pool_dump([eq.pool for eq in result.expanded], os.path.join(output_path, f"{mode}_pools.tsv"))

    report.metrics_frame().to_csv(os.path.join(output_path, cfg.metrics_name), sep="\t", index=False,
                                  header=False, float_format="%.6f")
    with open(os.path.join(output_path, cfg.report_name), "w", encoding="utf-8") as f:
        f.write(report.to_text() + "\n")
