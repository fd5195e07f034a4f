#!/usr/bin/env python3
"""Regenerate tests/fixtures/golden.json from the brute-force oracles.

The frozen values are produced by the reference enumerators in
tests/oracles.py, never by the package code they are used to check.
Run from the repository root:  python3 scripts/regen_golden_fixtures.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from recoding import Alphabet, make_map, sample_kernel  # noqa: E402
from oracles import (  # noqa: E402
    oracle_conditional_entropy,
    oracle_fragmentation,
    oracle_stationary,
)


def main() -> None:
    golden = {}

    # 4-symbol first-order kernel with the 2-bit index code
    k1 = sample_kernel(4, 1, 0.5, 0)
    fmap = make_map(k1.alphabet, Alphabet.of_size(2), 2)
    for w in (1, 2):
        vals = oracle_fragmentation(k1, fmap, w)
        golden[f"frag_y4_k1_seed0_w{w}"] = {
            "params": {"alphabet_size": 4, "order": 1, "dirichlet_alpha": 0.5,
                       "seed": 0, "block_length": 2, "w": w, "code": "default"},
            **vals,
        }

    # second-order source where a too-short window loses history
    k2 = sample_kernel(4, 2, 0.5, 1)
    fmap2 = make_map(k2.alphabet, Alphabet.of_size(2), 2)
    vals = oracle_fragmentation(k2, fmap2, 1)
    golden["frag_y4_k2_seed1_w1"] = {
        "params": {"alphabet_size": 4, "order": 2, "dirichlet_alpha": 0.5,
                   "seed": 1, "block_length": 2, "w": 1, "code": "default"},
        **vals,
    }

    # marginalized optimal predictor check instance
    k3 = sample_kernel(2, 2, 0.5, 7)
    golden["source_b2_k2_seed7"] = {
        "params": {"alphabet_size": 2, "order": 2, "dirichlet_alpha": 0.5, "seed": 7},
        "conditional_entropy_w1": oracle_conditional_entropy(k3, 1),
        "stationary": {"".join(map(str, c)): p for c, p in oracle_stationary(k3).items()},
    }

    out = ROOT / "tests" / "fixtures" / "golden.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(golden, indent=1, sort_keys=True))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
