#!/usr/bin/env python

import argparse
import logging

from query_expansion import CONFIG
from query_expansion.pipeline.experiment import RunConfig, run_experiment


def arg_parse():
    parser = argparse.ArgumentParser(description="Expand queries, tune role weights and evaluate retrieval.")

    parser.add_argument('-m', '--mode',
                        type=str,
                        default=CONFIG['pipeline']['mode'],
                        choices=['lm', 'spqe', 'lsqe'],
                        help="The expansion mode to run.")

    parser.add_argument('-c', '--compare',
                        type=str,
                        nargs='*',
                        default=CONFIG['pipeline']['compare_modes'],
                        choices=['lm', 'spqe', 'lsqe'],
                        help="Modes evaluated on the same queries for comparison.")

    parser.add_argument('-n', '--topn',
                        type=int,
                        default=CONFIG['expansion']['top_n'],
                        help="Number of expansion terms added to each query.")

    parser.add_argument('--mu',
                        type=float,
                        default=CONFIG['retrieval']['mu'],
                        help="Dirichlet smoothing parameter.")

    parser.add_argument('-s', '--seed',
                        type=int,
                        default=CONFIG['common']['seed'],
                        help="Seed of the genetic algorithm.")

    parser.add_argument('--queries', type=str, default=CONFIG['common']['queries_path'],
                        help="Query file, qid<TAB>text.")
    parser.add_argument('--documents', type=str, default=CONFIG['common']['documents_path'],
                        help="Documents, doc_id<TAB>text file or directory of files.")
    parser.add_argument('--qrels', type=str, default=CONFIG['common']['qrels_path'],
                        help="Relevance judgments in TREC format.")
    parser.add_argument('--parses', type=str, default=CONFIG['roles']['parses_path'],
                        help="Typed dependency parses of the queries.")
    parser.add_argument('--ncp-bank', type=str, default=CONFIG['ncp']['bank_path'],
                        help="NCP phrase and acronym bank.")
    parser.add_argument('--ngrams', type=str, default=CONFIG['ngrams']['corpus_path'],
                        help="N-gram frequency corpus.")
    parser.add_argument('--unigrams', type=str, default=CONFIG['text']['unigram_path'],
                        help="Unigram frequency table. Empty to take frequencies from the n-gram corpus.")
    parser.add_argument('-o', '--output', type=str, default=CONFIG['common']['output_path'],
                        help="Directory for runs, reports and diagnostics.")

    parser.add_argument('--dump-pools',
                        action='store_true',
                        default=CONFIG['pipeline']['dump_pools'],
                        help="Write the candidate pool of each query.")

    parser.add_argument('--sweep',
                        action='store_true',
                        default=CONFIG['pipeline']['sweep'],
                        help="Also report MAP for every number of expansion terms in the configured sweep values.")

    parser.add_argument('-v', '--verbose',
                        action='store_true',
                        help="Log debug messages.")

    return parser.parse_args()


def main():
    args = arg_parse()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")

    cfg = RunConfig(mode=args.mode, compare_modes=args.compare, top_n=args.topn, mu=args.mu, seed=args.seed,
                    queries_path=args.queries, documents_path=args.documents, qrels_path=args.qrels,
                    parses_path=args.parses, ncp_bank_path=args.ncp_bank, corpus_path=args.ngrams,
                    unigram_path=args.unigrams, output_path=args.output, dump_pools=args.dump_pools,
                    sweep=args.sweep)

    report = run_experiment(cfg)
    print(report.to_text())
    print(f'Experiment complete, outputs written to {args.output}')


if __name__ == '__main__':
    main()
