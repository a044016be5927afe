#!/usr/bin/env python

import argparse
import logging

from query_expansion import CONFIG
from query_expansion.exceptions import QueryExpansionError
from query_expansion.optimise.genetic import Chromosome
from query_expansion.pipeline.expansion import emit_weighted_query
from query_expansion.pipeline.experiment import ExperimentResources, RunConfig

logger = logging.getLogger(__name__)


def arg_parse():
    parser = argparse.ArgumentParser(description="Print expanded queries in the #weight syntax for given role weights.")

    parser.add_argument('-m', '--mode',
                        type=str,
                        default=CONFIG['pipeline']['mode'],
                        choices=['lm', 'spqe', 'lsqe'],
                        help="The expansion mode.")

    parser.add_argument('-w', '--weights',
                        type=float,
                        nargs=5,
                        metavar=('COI', 'DC', 'RC', 'SC', 'EC'),
                        default=[1.0, 1.0, 1.0, 0.0, 1.0],
                        help="Role weights. The Sc weight must be 0.")

    parser.add_argument('-n', '--topn',
                        type=int,
                        default=CONFIG['expansion']['top_n'],
                        help="Number of expansion terms added to each query.")

    parser.add_argument('-o', '--output',
                        type=str,
                        required=False,
                        help="File to write the queries to, printed when not given.")

    return parser.parse_args()


def expand_queries(cfg, weights):
    """
    Expand every query of the configured query file.

    :param cfg: (RunConfig) The run configuration, the main mode is used.
    :param weights: (Chromosome) The role weights.
    :returns: (list) (query id, query text) pairs, skipped queries left out.
    """
    resources = ExperimentResources(cfg)
    expander = resources.expander(cfg.mode, cfg)

    lines = []
    for qid, text in resources.queries.items():
        try:
            eq = expander.expand(qid, text)
        except QueryExpansionError as err:
            logger.warning(f"Skipping query {qid}: {err}")
            continue
        lines.append((qid, emit_weighted_query(eq, weights)))
    return lines


def main():
    args = arg_parse()
    logging.basicConfig(level=logging.INFO)

    cfg = RunConfig(mode=args.mode, compare_modes=[], top_n=args.topn)
    lines = expand_queries(cfg, Chromosome(*args.weights))

    text = "\n".join(f"{qid}\t{query}" for qid, query in lines)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)

    print(f'{len(lines)} queries expanded')


if __name__ == '__main__':
    main()
