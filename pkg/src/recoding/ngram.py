"""Count-based finite-context predictors with Laplace smoothing.

Fitted predictors keep a sparse context table (hash map keyed by the
base-A context code) with a uniform fallback for unseen contexts; exact
predictors derived from a kernel use a dense table.  Context codes follow
the same convention as `sources`: oldest symbol most significant.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CapacityError, DataError, FormatError, ParameterError
from .sources import Alphabet, TransitionKernel, window_law, DEFAULT_TABLE_BUDGET

_CODE_LIMIT = 1 << 62
_CHUNK = 1 << 20


def window_codes(seq: np.ndarray, w: int, alphabet_size: int) -> np.ndarray:
    """Base-A codes of every length-w window of seq (w=0 gives all zeros).

    Entry j is the code of seq[j:j+w]; the context of position t is entry
    t - w.  Raises CapacityError when A**w would overflow the code space.
    """
    n = len(seq)
    if w == 0:
        return np.zeros(n + 1, dtype=np.int64)
    if alphabet_size**w > _CODE_LIMIT:
        raise CapacityError(f"context space {alphabet_size}**{w} exceeds code limit")
    if n < w:
        return np.zeros(0, dtype=np.int64)
    powers = alphabet_size ** np.arange(w - 1, -1, -1, dtype=np.int64)
    view = sliding_window_view(np.asarray(seq), w)
    out = np.empty(n - w + 1, dtype=np.int64)
    step = max(1, _CHUNK // w)
    for lo in range(0, out.size, step):
        hi = min(lo + step, out.size)
        out[lo:hi] = view[lo:hi] @ powers
    return out


class ContextPredictor:
    """Conditional model q(y|c) for contexts of a fixed length w."""

    def __init__(
        self,
        alphabet: Alphabet,
        w: int,
        *,
        alpha: float | None = None,
        counts: dict[int, np.ndarray] | None = None,
        rows: dict[int, np.ndarray] | None = None,
        dense: np.ndarray | None = None,
    ):
        if w < 0:
            raise ParameterError("context length must be >= 0")
        self.alphabet = alphabet
        self.w = w
        self.alpha = alpha
        self._counts = counts
        self._dense = dense
        a = alphabet.size
        self._uniform = np.full(a, 1.0 / a)
        if dense is not None:
            self._rows = None
        elif rows is not None:
            self._rows = rows
        else:
            self._rows = {}
            if counts:
                aa = 0.0 if alpha is None else alpha
                for code, cnt in counts.items():
                    tot = cnt.sum()
                    if aa > 0:
                        self._rows[code] = (cnt + aa) / (tot + aa * a)
                    elif tot > 0:
                        self._rows[code] = cnt / tot
                    else:
                        self._rows[code] = self._uniform.copy()

    @property
    def context_space(self) -> int:
        return self.alphabet.size**self.w

    def row(self, code: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[code]
        return self._rows.get(int(code), self._uniform)

    def rows_for(self, codes: np.ndarray) -> np.ndarray:
        """Probability rows for an array of context codes, shape (len, A)."""
        codes = np.asarray(codes, dtype=np.int64)
        if self._dense is not None:
            return self._dense[codes]
        uniq, inverse = np.unique(codes, return_inverse=True)
        mat = np.empty((uniq.size, self.alphabet.size))
        for i, code in enumerate(uniq.tolist()):
            mat[i] = self._rows.get(code, self._uniform)
        return mat[inverse]

    def positivity_floor(self) -> float:
        """Smallest probability the predictor can ever emit."""
        a = self.alphabet.size
        if self._dense is not None:
            return float(self._dense.min())
        floor = math.inf
        for r in self._rows.values():
            floor = min(floor, float(r.min()))
        if len(self._rows) < self.context_space:
            floor = min(floor, 1.0 / a)
        return 0.0 if floor is math.inf else floor

    def smoothed(self, eta: float) -> "ContextPredictor":
        if not 0 < eta < 1:
            raise ParameterError("eta must lie in (0, 1)")
        a = self.alphabet.size
        if self._dense is not None:
            dense = (1.0 - eta) * self._dense + eta / a
            return ContextPredictor(self.alphabet, self.w, dense=dense)
        rows = {c: (1.0 - eta) * r + eta / a for c, r in self._rows.items()}
        return ContextPredictor(self.alphabet, self.w, rows=rows)

    def to_json(self) -> dict:
        if self._counts is None:
            raise FormatError("only count-based predictors can be serialized")
        symbols = self.alphabet.symbols
        a = self.alphabet.size
        entries = []
        for code in sorted(self._counts):
            digits = []
            c = code
            for _ in range(self.w):
                digits.append(symbols[c % a])
                c //= a
            digits.reverse()
            entries.append([digits, [int(x) for x in self._counts[code]]])
        return {
            "alphabet": list(symbols),
            "w": self.w,
            "alpha": self.alpha,
            "counts": entries,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ContextPredictor":
        alphabet = Alphabet(tuple(obj["alphabet"]))
        w = int(obj["w"])
        a = alphabet.size
        counts = {}
        for labels, cnt in obj["counts"]:
            code = 0
            for lab in labels:
                code = code * a + alphabet.index(lab)
            counts[code] = np.asarray(cnt, dtype=np.int64)
        return cls(alphabet, w, alpha=obj["alpha"], counts=counts)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path) -> "ContextPredictor":
        return cls.from_json(json.loads(Path(path).read_text()))


def fit(sequence, w: int, laplace_alpha: float, alphabet: Alphabet | None = None) -> ContextPredictor:
    """Fit q(y|c) = (count(c,y) + a) / (count(c) + a*|Y|) from one pass."""
    if w < 0:
        raise ParameterError("w must be >= 0")
    if laplace_alpha < 0:
        raise ParameterError("laplace_alpha must be >= 0")
    if alphabet is None:
        if isinstance(sequence, str):
            alphabet = Alphabet.from_text(sequence)
        else:
            raise ParameterError("alphabet is required for index sequences")
    seq = alphabet.encode(sequence)
    a = alphabet.size
    if a ** (w + 1) > _CODE_LIMIT:
        raise CapacityError("context table space exceeds the code limit")
    counts: dict[int, np.ndarray] = {}
    n = len(seq)
    if n > w:
        ctx = window_codes(seq, w, a)[: n - w]
        flat = ctx * a + seq[w:]
        uniq, cnt = np.unique(flat, return_counts=True)
        ctx_codes = uniq // a
        syms = uniq % a
        bounds = np.flatnonzero(np.diff(ctx_codes, prepend=-1))
        for b, e in zip(bounds, np.append(bounds[1:], uniq.size)):
            vec = np.zeros(a, dtype=np.int64)
            vec[syms[b:e]] = cnt[b:e]
            counts[int(ctx_codes[b])] = vec
    return ContextPredictor(alphabet, w, alpha=laplace_alpha, counts=counts)


def _position_probs(predictor: ContextPredictor, seq: np.ndarray) -> np.ndarray:
    w = predictor.w
    n = len(seq)
    codes = window_codes(seq, w, predictor.alphabet.size)[: n - w]
    rows = predictor.rows_for(codes)
    return rows[np.arange(n - w), seq[w:]]

def log_loss(predictor: ContextPredictor, sequence) -> float:
    """Mean per-symbol log-loss, bits.  Infinite when a zero-probability
    event occurs (possible only for unsmoothed fits)."""
    seq = predictor.alphabet.encode(sequence)
    if len(seq) <= predictor.w:
        raise DataError("sequence must be longer than the context length")
    probs = _position_probs(predictor, seq)
    if np.any(probs <= 0):
        return math.inf
    return float(-np.mean(np.log2(probs)))


def log_loss_total(predictor: ContextPredictor, sequence) -> float:
    """Cumulative (unnormalized) log-loss over positions after the first w."""
    seq = predictor.alphabet.encode(sequence)
    if len(seq) <= predictor.w:
        raise DataError("sequence must be longer than the context length")
    probs = _position_probs(predictor, seq)
    if np.any(probs <= 0):
        return math.inf
    return float(-np.sum(np.log2(probs)))


def optimal_predictor(
    kernel: TransitionKernel, w: int, table_budget: int = DEFAULT_TABLE_BUDGET
) -> ContextPredictor:
    """Exact conditional law of the next symbol given each length-w context.

    Zero-probability contexts get the uniform row (they are never visited
    by the stationary process).
    """
    joint = window_law(kernel, w + 1, table_budget)
    a = kernel.alphabet_size
    table = joint.reshape(a**w, a)
    totals = table.sum(axis=1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    dense = np.where(totals > 0, table / safe, 1.0 / a)
    return ContextPredictor(kernel.alphabet, w, dense=dense)
