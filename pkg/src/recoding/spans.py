"""Source-span statistics of token windows and heavy-hitting diagnostics.

The source span of a token window is the number of source symbols its
expansion covers.  Sliding-window statistics drop the first w tokens of a
stream so the forced start-of-parse boundary does not contaminate the
stationary picture; `worst_case_span` documents the same convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AssumptionViolationError, DataError, ParameterError
from .sources import Alphabet, TransitionKernel, min_transition_prob
from .tokenizer import PrefixVocabulary, TokenSequence


def source_span(vocab: PrefixVocabulary, window) -> int:
    """Summed source length of the tokens in a window."""
    if isinstance(window, TokenSequence):
        ids = window.ids
    else:
        ids = np.asarray(window, dtype=np.int64)
    if ids.size == 0:
        return 0
    return int(vocab.lengths[ids].sum())


def _window_spans(stream: TokenSequence, w: int, drop_first: bool = True) -> np.ndarray:
    """Spans of all length-w sliding windows, boundary windows dropped."""
    if w < 1:
        raise ParameterError("window length must be >= 1")
    ids = stream.ids
    start = w if drop_first else 0
    if len(ids) - start < w:
        raise DataError(f"stream too short for {w}-token windows")
    lens = stream.vocab.lengths[ids[start:]]
    cs = np.concatenate([[0], np.cumsum(lens)])
    return cs[w:] - cs[:-w]


@dataclass
class SpanReport:
    """Span statistics of w-token windows over one parsed stream."""

    w: int
    span_histogram: dict[int, float]
    worst_case_span: int
    alpha: float
    rate: float
    token_count: int
    slack_curve: list[tuple[int, float, float]] = field(default_factory=list)

    def epsilon(self, w_s: int) -> float:
        return sum(p for s, p in self.span_histogram.items() if s < w_s)

    def to_json(self) -> dict:
        return {
            "w": self.w,
            "span_histogram": {str(k): v for k, v in sorted(self.span_histogram.items())},
            "worst_case_span": self.worst_case_span,
            "alpha": self.alpha,
            "rate": self.rate,
            "token_count": self.token_count,
            "slack_curve": [
                {"w_s": ws, "epsilon": eps, "slack_bits": slack}
                for ws, eps, slack in self.slack_curve
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))


def compression_stats(
    vocab: PrefixVocabulary, stream: TokenSequence, source_alphabet_size: int | None = None
) -> tuple[float, float]:
    """(alpha, R): mean source symbols per token and the uniform-code rate
    log2|Z| / (alpha * log2|Y|)."""
    if len(stream.ids) == 0:
        raise DataError("empty token stream")
    a_src = source_alphabet_size or vocab.alphabet.size
    alpha = float(vocab.lengths[stream.ids].mean())
    rate = math.log2(vocab.size) / (alpha * math.log2(a_src))
    return alpha, rate


def span_distribution(
    vocab: PrefixVocabulary,
    stream: TokenSequence,
    w: int,
    source_alphabet_size: int | None = None,
) -> SpanReport:
    """Empirical span histogram over sliding windows of w tokens."""
    spans = _window_spans(stream, w)
    values, counts = np.unique(spans, return_counts=True)
    total = counts.sum()
    hist = {int(v): float(c) / total for v, c in zip(values, counts)}
    alpha, rate = compression_stats(vocab, stream, source_alphabet_size)
    return SpanReport(
        w=w,
        span_histogram=hist,
        worst_case_span=int(values[0]),
        alpha=alpha,
        rate=rate,
        token_count=len(stream.ids),
    )


def worst_case_span(
    vocab: PrefixVocabulary,
    w: int,
    mode: str = "empirical",
    stream: TokenSequence | None = None,
) -> int:
    """Minimum source span of a w-token window.

    empirical: minimum over windows observed in a greedy parse.
    exhaustive: minimum over all w-tuples of entries, which is w times the
    shortest entry length; it ignores whether a tuple can occur in a
    greedy parse, so it lower-bounds the empirical value.
    """
    if mode == "exhaustive":
        return w * int(vocab.lengths.min())
    if mode == "empirical":
        if stream is None:
            raise ParameterError("empirical mode requires a parsed stream")
        return int(_window_spans(stream, w).min())
    raise ParameterError(f"unknown mode {mode!r}")


def typical_epsilon(vocab: PrefixVocabulary, stream: TokenSequence, w: int, w_s: int) -> float:
    """Fraction of w-token windows spanning fewer than w_s source symbols."""
    spans = _window_spans(stream, w)
    return float(np.mean(spans < w_s))


def slack_curve(
    vocab: PrefixVocabulary,
    stream: TokenSequence,
    w: int,
    w_s_values,
    source_alphabet_size: int | None = None,
) -> list[tuple[int, float, float]]:
    """Rows (w_s, epsilon, epsilon * R * log2|Y|) over a span target sweep."""
    spans = np.sort(_window_spans(stream, w))
    _, rate = compression_stats(vocab, stream, source_alphabet_size)
    a_src = source_alphabet_size or vocab.alphabet.size
    scale = rate * math.log2(a_src)
    out = []
    total = spans.size
    for ws in w_s_values:
        eps = float(np.searchsorted(spans, ws, side="left")) / total
        out.append((int(ws), eps, eps * scale))
    return out


def p_max(kernel: TransitionKernel, t) -> float:
    """Largest probability of generating string t from any initial context,
    by a max-product sweep over context states."""
    seq = kernel.alphabet.encode(t)
    if len(seq) == 0:
        return 1.0
    a = kernel.alphabet_size
    k = kernel.order
    states = a**k
    best = np.ones(states)
    for sym in seq.tolist():
        contrib = best * kernel.probs[:, sym]
        if k == 0:
            best = contrib
            continue
        nxt = np.zeros(states)
        targets = (np.arange(states, dtype=np.int64) * a + sym) % states
        np.maximum.at(nxt, targets, contrib)
        best = nxt
    return float(best.max())


@dataclass
class HeavyHitReport:
    """Token-length diagnostics for a budget-d greedy vocabulary on a
    delta-positive source."""

    beta: float
    d: int
    delta: float
    ell_d: float
    miss_prob: float
    miss_se: float
    short_token_prob: float
    short_se: float
    w: int
    window_span_threshold: int
    window_fail_prob: float
    window_fail_se: float
    alpha: float
    rate: float
    token_count: int
    degenerate: bool
    length_inclusion_holds: bool

    @property
    def window_bound_ok(self) -> bool:
        return self.window_fail_prob <= 4 * self.miss_prob + 3 * self._window_sigma()

    @property
    def alpha_bound_ok(self) -> bool:
        target = (1 - self.miss_prob) * self.ell_d + self.miss_prob
        return self.alpha >= target - 3 * self.miss_se * abs(self.ell_d - 1)

    def _window_sigma(self) -> float:
        return math.sqrt(self.window_fail_se**2 + 16 * self.miss_se**2)

    def to_json(self) -> dict:
        out = {
            "beta": self.beta,
            "d": self.d,
            "delta": self.delta,
            "ell_d": self.ell_d,
            "miss_prob": self.miss_prob,
            "miss_se": self.miss_se,
            "short_token_prob": self.short_token_prob,
            "short_se": self.short_se,
            "w": self.w,
            "window_span_threshold": self.window_span_threshold,
            "window_fail_prob": self.window_fail_prob,
            "window_fail_se": self.window_fail_se,
            "alpha": self.alpha,
            "rate": self.rate,
            "token_count": self.token_count,
            "degenerate": self.degenerate,
            "length_inclusion_holds": self.length_inclusion_holds,
            "window_bound_ok": self.window_bound_ok,
            "alpha_bound_ok": self.alpha_bound_ok,
        }
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))


def _bernoulli_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / max(n, 1))


def heavy_hitting_report(
    kernel: TransitionKernel,
    vocab: PrefixVocabulary,
    stream: TokenSequence,
    beta: float,
    d: int,
    w: int = 4,
) -> HeavyHitReport:
    """Measure the token-length scale ell_d = beta*log2(d)/log2(1/delta)
    and the related tail probabilities over an emitted-token stream.

    Checked facts: a token shorter than ell_d always has
    p_max > d**(-beta) (exact per-token inclusion); the fraction of
    w-token windows spanning under floor(3/4 * w * ell_d) is at most four
    times the miss probability; and the mean token length is at least
    (1-eta)*ell_d + eta.
    """
    if not 0 < beta < 1:
        raise ParameterError("beta must lie in (0, 1)")
    delta = min_transition_prob(kernel)
    if delta <= 0:
        raise AssumptionViolationError("source has a zero transition probability")
    ell_d = beta * math.log2(d) / math.log2(1.0 / delta)
    threshold = d ** (-beta)

    ids = stream.ids
    m = len(ids)
    if m == 0:
        raise DataError("empty token stream")
    uniq, counts = np.unique(ids, return_counts=True)
    freq = counts / m
    pmax_by_entry = np.array(
        [p_max(kernel, np.asarray(vocab.entries[i], dtype=np.int32)) for i in uniq.tolist()]
    )
    lengths = vocab.lengths[uniq]

    miss_mask = pmax_by_entry > threshold
    short_mask = lengths < ell_d
    miss_prob = float(freq[miss_mask].sum())
    short_prob = float(freq[short_mask].sum())
    inclusion = bool(np.all(miss_mask[short_mask])) if short_mask.any() else True

    window_threshold = math.floor(0.75 * w * ell_d)
    spans = _window_spans(stream, w)
    window_fail = float(np.mean(spans < window_threshold))

    alpha = float(vocab.lengths[ids].mean())
    rate = math.log2(vocab.size) / (alpha * math.log2(vocab.alphabet.size))

    return HeavyHitReport(
        beta=beta,
        d=d,
        delta=delta,
        ell_d=ell_d,
        miss_prob=miss_prob,
        miss_se=_bernoulli_se(miss_prob, m),
        short_token_prob=short_prob,
        short_se=_bernoulli_se(short_prob, m),
        w=w,
        window_span_threshold=window_threshold,
        window_fail_prob=window_fail,
        window_fail_se=_bernoulli_se(window_fail, spans.size),
        alpha=alpha,
        rate=rate,
        token_count=m,
        degenerate=ell_d <= 1.0,
        length_inclusion_holds=inclusion,
    )
