#!/usr/bin/env python3
"""Dictionary-budget sweep on a strictly positive source: token-length
scale, miss/short-token probabilities, window-span and mean-length
bounds, and the end-to-end loss bound via the span-gated transferred
predictor."""

import argparse
from pathlib import Path

from recoding.cli import ExperimentConfig, run_heavy_hitting


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/heavy")
    ap.add_argument("--n", type=int, default=400_000)
    ap.add_argument("--beta", type=float, default=0.8)
    ap.add_argument("--budgets", default="16,64,256,1024,4096")
    ap.add_argument("--kernel", default=None, help="kernel JSON file to analyze")
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="heavy-hitting",
        seeds=[0],
        output_dir=Path(args.out),
        source={"alphabet_size": 2, "order": 2, "dirichlet_alpha": 2.0, "n": args.n},
        tokenizer={"method": "lzw",
                   "budgets": [int(v) for v in args.budgets.split(",")]},
        windows=[4],
        params={"beta": args.beta, "eta_transfer": 1e-6, "kernel": args.kernel},
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.validate()
    run_heavy_hitting(config)


if __name__ == "__main__":
    main()
