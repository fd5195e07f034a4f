"""Constructive transfer of source predictors to token predictors.

Given a strictly positive source predictor q with context length w_s and
a prefix-closed vocabulary, the transferred predictor assigns to a
candidate next token the q-probability that the source continuation
spells the token and then stops (the following symbol does not extend
the token inside the vocabulary), renormalized by the probability that
the previous token really ended.  Along a greedy parse the stop factors
telescope, so the cumulative token loss tracks the cumulative source
loss up to a constant bounded via the positivity floor of q.

Evaluation needs only the last w_s source symbols of the expanded token
window.  Windows that span fewer than w_s symbols cannot be evaluated;
they fall back to the uniform distribution over tokens, and the
span-gated variant (`make_typical`) applies the same fallback at a
configurable threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError, PositivityError, PreconditionError
from .ngram import ContextPredictor, log_loss_total, window_codes
from .tokenizer import PrefixVocabulary, TokenSequence, expand, greedy_parse


def smooth(predictor: ContextPredictor, eta: float) -> ContextPredictor:
    """Mix every row with the uniform distribution:
    q_eta(y|c) = (1-eta) q(y|c) + eta/|Y|."""
    return predictor.smoothed(eta)


def seq_extend(q: ContextPredictor, history, u) -> float:
    """Probability q assigns to the string u following `history`, reading
    each symbol against the rolling last-w_s-symbol context."""
    h = q.alphabet.encode(history)
    uu = q.alphabet.encode(u)
    if len(h) < q.w:
        raise PreconditionError(f"history must contain at least {q.w} symbols")
    a = q.alphabet.size
    base = a**q.w if q.w > 0 else 1
    code = 0
    for sym in h[len(h) - q.w :].tolist():
        code = code * a + sym
    p = 1.0
    for sym in uu.tolist():
        p *= float(q.row(code)[sym])
        code = (code * a + sym) % base
    return p


@dataclass
class TokenLossBreakdown:
    """Per-token losses for tokens w .. m-2 of a stream (the initial w
    tokens and the terminal token are boundary artifacts)."""

    losses: np.ndarray
    valid: np.ndarray
    stops: np.ndarray
    alpha: float
    source_length: int
    token_count: int
    vocab_size: int

    def total(self) -> float:
        return float(self.losses.sum())

    def mean(self) -> float:
        return float(self.losses.mean())

    def per_source_symbol(self) -> float:
        return self.mean() / self.alpha

    def bad_window_fraction(self) -> float:
        return float(1.0 - self.valid.mean())

    def per_source_symbol_se(self) -> float:
        n = self.losses.size
        if n < 2:
            return math.inf
        return float(self.losses.std(ddof=1) / math.sqrt(n) / self.alpha)


class TransferredPredictor:
    """Token-level predictor induced by a source predictor on a prefix
    vocabulary, evaluated over w-token contexts."""

    def __init__(
        self,
        q: ContextPredictor,
        vocab: PrefixVocabulary,
        w: int,
        uniform_fallback: bool = True,
    ):
        if w < 1:
            raise ParameterError("token window length must be >= 1")
        if q.alphabet.size != vocab.alphabet.size:
            raise ParameterError("predictor and vocabulary alphabets differ")
        floor = q.positivity_floor()
        if floor <= 0:
            raise PositivityError(
                "the source predictor must be strictly positive; smooth it first"
            )
        self.q = q
        self.vocab = vocab
        self.w = w
        self.lambda_q = floor
        self.uniform_fallback = uniform_fallback

    def token_log_losses(self, stream: TokenSequence, gate: int | None = None) -> TokenLossBreakdown:
        if gate is None:
            gate = self.q.w
        if gate < self.q.w:
            raise ParameterError("span gate cannot be below the predictor context length")
        return _evaluate(self, stream, gate)

    def next_token_distribution(self, context_ids) -> np.ndarray:
        """Exact distribution over next tokens given a w-token context.

        Positive only on tokens whose first symbol does not extend the
        previous token; those probabilities sum to one.
        """
        ids = np.asarray(context_ids, dtype=np.int64)
        if len(ids) != self.w:
            raise ParameterError(f"context must contain exactly {self.w} tokens")
        vocab = self.vocab
        q = self.q
        n_entries = vocab.size
        history = expand(vocab, ids)
        if len(history) < q.w:
            return np.full(n_entries, 1.0 / n_entries)
        a = q.alphabet.size
        base = a**q.w if q.w > 0 else 1
        code0 = 0
        for sym in history[len(history) - q.w :].tolist():
            code0 = code0 * a + sym
        prev = int(ids[-1])
        ext = vocab.ext_mask
        denom = 1.0 - float(np.dot(q.row(code0), ext[prev]))
        out = np.zeros(n_entries)
        for eid in range(n_entries):
            if ext[prev, vocab.first_symbols[eid]]:
                continue
            p = 1.0
            code = code0
            for sym in vocab.entries[eid]:
                p *= float(q.row(code)[sym])
                code = (code * a + sym) % base
            stop = 1.0 - float(np.dot(q.row(code), ext[eid]))
            out[eid] = p * max(stop, 0.0) / denom
        return out


def transfer(q: ContextPredictor, vocab: PrefixVocabulary, w: int) -> TransferredPredictor:
    """Build the token predictor induced by q (strictly positive, context
    length w_s) for w-token windows."""
    return TransferredPredictor(q, vocab, w)


class TypicalPredictor:
    """Span-gated wrapper: transferred prediction on windows spanning at
    least w_s source symbols, uniform over the vocabulary otherwise."""

    def __init__(self, transferred: TransferredPredictor, span_threshold: int):
        if span_threshold < transferred.q.w:
            raise ParameterError(
                "span threshold must cover the source context length"
            )
        self.transferred = transferred
        self.span_threshold = span_threshold
        self.vocab = transferred.vocab
        self.w = transferred.w

    def token_log_losses(self, stream: TokenSequence) -> TokenLossBreakdown:
        return _evaluate(self.transferred, stream, self.span_threshold)


def make_typical(transferred: TransferredPredictor, w_s: int | None = None) -> TypicalPredictor:
    if w_s is None:
        w_s = transferred.q.w
    return TypicalPredictor(transferred, w_s)


class UniformTokenPredictor:
    """Assigns 1/|Z| to every next token; the per-source-symbol loss is
    exactly the uniform-code rate in bits."""

    def __init__(self, vocab: PrefixVocabulary, w: int):
        self.vocab = vocab
        self.w = w

    def token_log_losses(self, stream: TokenSequence) -> TokenLossBreakdown:
        ids = stream.ids
        m = len(ids)
        if m - 1 <= self.w:
            raise DataError("token stream too short to evaluate")
        count = m - 1 - self.w
        loss = math.log2(self.vocab.size)
        lens = self.vocab.lengths[ids]
        return TokenLossBreakdown(
            losses=np.full(count, loss),
            valid=np.ones(count, dtype=bool),
            stops=np.full(count, np.nan),
            alpha=float(lens.mean()),
            source_length=int(lens.sum()),
            token_count=m,
            vocab_size=self.vocab.size,
        )


def _evaluate(tp: TransferredPredictor, stream: TokenSequence, gate: int) -> TokenLossBreakdown:
    """Vectorized per-token losses of the transferred rule along a parse.

    For each evaluated token, the loss decomposes as the summed source
    log-loss over the token's symbols plus the log of a stop-probability
    ratio; both pieces read the source context from the global sequence,
    which is legitimate exactly when the window span reaches the
    predictor's context length (guaranteed by the gate).
    """
    vocab = tp.vocab
    if stream.vocab is not vocab and stream.vocab.entries != vocab.entries:
        raise ParameterError("stream was parsed with a different vocabulary")
    q = tp.q
    w = tp.w
    ws = q.w
    ids = stream.ids.astype(np.int64)
    m = len(ids)
    if m - 1 <= w:
        raise DataError("token stream too short to evaluate")

    y = expand(vocab, ids)
    n = len(y)
    lens = vocab.lengths[ids]
    ends = np.cumsum(lens)
    starts = ends - lens

    ii = np.arange(w, m - 1)
    spans = starts[ii] - starts[ii - w]
    valid = spans >= gate

    # greedy maximality: the first symbol of a token never extends its
    # predecessor, otherwise the parse would have kept growing
    ext = vocab.ext_mask
    if np.any(ext[ids[ii - 1], vocab.first_symbols[ids[ii]]]):
        raise ParameterError("stream is not a greedy parse under this vocabulary")

    losses = np.full(ii.size, math.log2(vocab.size))
    stops = np.full(ii.size, np.nan)
    if np.any(valid) and n >= ws:
        codes = window_codes(y, ws, q.alphabet.size)
        rows = q.rows_for(codes)
        pos_probs = rows[np.arange(n - ws), y[ws:]]
        cum = np.concatenate([[0.0], np.cumsum(np.log2(pos_probs))])

        vi = ii[valid]
        s_idx = starts[vi] - ws
        e_idx = ends[vi] - ws
        seqlog = cum[e_idx] - cum[s_idx]
        stop = 1.0 - np.einsum("ij,ij->i", rows[e_idx], ext[ids[vi]].astype(np.float64))
        den = 1.0 - np.einsum("ij,ij->i", rows[s_idx], ext[ids[vi - 1]].astype(np.float64))
        if np.any(stop <= 0) or np.any(den <= 0):
            raise PositivityError("stop probability vanished on an interior token")
        losses[valid] = -(seqlog + np.log2(stop) - np.log2(den))
        stops[valid] = stop
    elif not tp.uniform_fallback:
        raise PreconditionError("no window reaches the required source span")
    if not tp.uniform_fallback and not np.all(valid):
        raise PreconditionError("a window spans fewer source symbols than required")

    return TokenLossBreakdown(
        losses=losses,
        valid=valid,
        stops=stops,
        alpha=float(lens.mean()),
        source_length=int(n),
        token_count=m,
        vocab_size=vocab.size,
    )


def token_loss_per_source_symbol(predictor, vocab: PrefixVocabulary, stream: TokenSequence) -> float:
    """Mean token log-loss divided by the measured mean token source
    length, in bits per source symbol."""
    if vocab.entries != stream.vocab.entries:
        raise ParameterError("stream was parsed with a different vocabulary")
    return predictor.token_log_losses(stream).per_source_symbol()


def loss_comparison(
    q: ContextPredictor, vocab: PrefixVocabulary, y_sequence, w: int
) -> dict:
    """Cumulative source loss vs cumulative transferred token loss on one
    sequence, with the telescoping constant 2*log2(1/lambda_q)."""
    seq = vocab.alphabet.encode(y_sequence)
    stream = greedy_parse(vocab, seq)
    tp = transfer(q, vocab, w)
    breakdown = tp.token_log_losses(stream)
    source_total = log_loss_total(q, seq)
    token_total = breakdown.total()
    return {
        "n": int(len(seq)),
        "source_loss_bits": source_total,
        "token_loss_bits": token_total,
        "difference": token_total - source_total,
        "bound_2log_1_over_lambda": 2.0 * math.log2(1.0 / tp.lambda_q),
        "per_symbol_losses": {
            "source": source_total / max(len(seq) - q.w, 1),
            "token": breakdown.per_source_symbol(),
        },
    }
