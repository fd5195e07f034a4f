#!/usr/bin/env python3
"""Span-distribution and slack-curve sweep.

Default: the order-12 binary source with vocabulary sizes 2..20 and
token windows 1..12.  With --text, analyzes a character corpus instead
(windows 1,2,4,...,256), training pair-merge vocabularies at the sizes
given by --sizes."""

import argparse
from pathlib import Path

from recoding.cli import ExperimentConfig, run_span_cdf


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/spans")
    ap.add_argument("--text", default=None)
    ap.add_argument("--n", type=int, default=2_000_000)
    ap.add_argument("--sizes", default=None)
    ap.add_argument("--windows", default=None)
    args = ap.parse_args()

    if args.text:
        sizes = args.sizes or "256,1024,4096"
        windows = args.windows or "1,2,4,8,16,32,64,128,256"
    else:
        sizes = args.sizes or "2,4,6,8,10,15,20"
        windows = args.windows or "1,2,3,4,5,6,7,8,9,10,11,12"

    config = ExperimentConfig(
        experiment="span-cdf",
        seeds=[0],
        output_dir=Path(args.out),
        source={"alphabet_size": 2, "order": 12, "dirichlet_alpha": 0.4, "n": args.n},
        tokenizer={"method": "bpe", "sizes": [int(v) for v in sizes.split(",")],
                   "train_prefix": 500_000, "vocab_files": []},
        windows=[int(v) for v in windows.split(",")],
        params={"text": args.text, "span_max_mult": 20},
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.validate()
    run_span_cdf(config)


if __name__ == "__main__":
    main()
