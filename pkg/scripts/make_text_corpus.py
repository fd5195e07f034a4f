#!/usr/bin/env python3
"""Write a deterministic text-like demo corpus for span analysis.

Real runs should point span-cdf at an actual text file; this generator
exists so the text-mode pipeline can be exercised without external data.
"""

import argparse
from pathlib import Path

from recoding.demo_text import synthesize_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/corpus.txt")
    ap.add_argument("--chars", type=int, default=1_200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(synthesize_corpus(args.chars, args.seed))
    print(f"wrote {args.chars} characters to {path}")


if __name__ == "__main__":
    main()
