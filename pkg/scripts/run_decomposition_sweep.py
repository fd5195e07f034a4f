#!/usr/bin/env python3
"""Full fragmentation-penalty sweep: six (order, block) pairs, eight
Dirichlet(0.5) kernels each, 5e5-symbol sequences, Laplace-0.5 n-grams
at both window lengths k and k+1."""

import argparse
from pathlib import Path

from recoding.cli import ExperimentConfig, run_frag_decompose


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/decomposition")
    ap.add_argument("--n", type=int, default=500_000)
    ap.add_argument("--kernels", type=int, default=8)
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="frag-decompose",
        seeds=list(range(args.kernels)),
        output_dir=Path(args.out),
        source={"n": args.n, "dirichlet_alpha": 0.5},
        fragmentation={"pairs": [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (3, 2)]},
        params={"laplace_alpha": 0.5},
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.validate()
    run_frag_decompose(config)


if __name__ == "__main__":
    main()
