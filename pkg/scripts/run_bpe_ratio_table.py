#!/usr/bin/env python3
"""Compression-ratio table at full scale: order-12 binary source with
Dirichlet concentration 0.4 and 2.5e7 symbols, pair-merge vocabularies
trained on the first 5e5 symbols for each size in the sweep."""

import argparse
from pathlib import Path

from recoding.cli import ExperimentConfig, run_tok_train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/ratios")
    ap.add_argument("--n", type=int, default=25_000_000)
    ap.add_argument("--seed", type=int, action="append", default=None)
    ap.add_argument("--sizes", default="2,4,6,8,10,15,20")
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="tok-train",
        seeds=args.seed or [0],
        output_dir=Path(args.out),
        source={"alphabet_size": 2, "order": 12, "dirichlet_alpha": 0.4, "n": args.n},
        tokenizer={"method": "bpe",
                   "sizes": [int(v) for v in args.sizes.split(",")],
                   "train_prefix": 500_000},
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.validate()
    run_tok_train(config)


if __name__ == "__main__":
    main()
