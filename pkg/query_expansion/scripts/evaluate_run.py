#!/usr/bin/env python

import argparse

from query_expansion import CONFIG
from query_expansion.retrieval.evaluation import evaluate_run, read_qrels, read_run


def arg_parse():
    parser = argparse.ArgumentParser(description="MAP and P@N of a TREC run file.")

    parser.add_argument('run',
                        type=str,
                        help="The run file, qid Q0 docid rank score tag.")

    parser.add_argument('-q', '--qrels',
                        type=str,
                        default=CONFIG['common']['qrels_path'],
                        help="Relevance judgments, qid 0 docid rel.")

    parser.add_argument('-p', '--per-query',
                        action='store_true',
                        help="Print the scores of every query as well as the means.")

    return parser.parse_args()


def main():
    args = arg_parse()

    metrics = evaluate_run(read_run(args.run), read_qrels(args.qrels))

    if args.per_query:
        for qid, values in metrics.iterrows():
            for metric, value in values.items():
                print(f"{metric:<8}\t{qid}\t{value:.4f}")

    for metric, value in metrics.mean().items():
        print(f"{metric:<8}\tall\t{value:.4f}")

    print(f'Evaluated {len(metrics)} queries of {args.run}')


if __name__ == '__main__':
    main()
