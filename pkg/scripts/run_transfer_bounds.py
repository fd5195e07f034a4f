#!/usr/bin/env python3
"""Predictor-transfer verification: identity vocabulary for the exact
loss equality, a dictionary vocabulary for the effective-context gain,
and the span-gated variant for the typicality bound."""

import argparse
from pathlib import Path

from recoding.cli import ExperimentConfig, run_transfer_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/transfer")
    ap.add_argument("--order", type=int, default=2)
    ap.add_argument("--n", type=int, default=400_000)
    ap.add_argument("--tokenizer", action="append", default=None,
                    help="identity | bpe:V | lzw:d (repeatable)")
    ap.add_argument("--window", type=int, action="append", default=None)
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="transfer-check",
        seeds=[0],
        output_dir=Path(args.out),
        source={"alphabet_size": 2, "order": args.order,
                "dirichlet_alpha": 0.5, "n": args.n},
        tokenizer={"specs": args.tokenizer or ["identity", "lzw:256", "bpe:16"],
                   "train_prefix": None},
        windows=args.window or [2, 4],
        params={"ws": None, "eta": 1e-6},
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.validate()
    run_transfer_check(config)


if __name__ == "__main__":
    main()
