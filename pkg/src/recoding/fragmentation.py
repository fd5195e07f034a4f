"""Fixed-length fragmentation maps and the exact loss decomposition.

A fragmentation map replaces every source symbol by a block of M fragment
symbols.  For a source-context length w (in source symbols, i.e. Mw
fragments), the optimal fragmented loss exceeds the optimal source loss
by two non-negative terms:

  * context deficit: source history cut off by block misalignment, which
    vanishes once w exceeds the Markov order;
  * phase ambiguity: the position of the target fragment inside its block
    is hidden from a sliding fragment window.

Everything here is computed by enumerating source tuples and projecting
to fragment strings; fragment tuples are never enumerated directly, so
the tables stay exactly consistent with the source law.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AlphabetError,
    CapacityError,
    FormatError,
    InjectivityError,
    ParameterError,
)
from .ngram import fit, log_loss
from .sources import Alphabet, TransitionKernel, window_law, conditional_entropy, DEFAULT_TABLE_BUDGET


@dataclass(frozen=True)
class FragmentationMap:
    """Injective map from source symbols to length-M fragment blocks."""

    source_alphabet: Alphabet
    fragment_alphabet: Alphabet
    block_length: int
    codebook: np.ndarray  # (|Y|, M) fragment indices

    def codeword(self, symbol: int | str) -> tuple[int, ...]:
        if isinstance(symbol, str):
            symbol = self.source_alphabet.index(symbol)
        return tuple(int(x) for x in self.codebook[symbol])

    def to_json(self) -> dict:
        xa = self.fragment_alphabet
        code = {}
        for i, label in enumerate(self.source_alphabet.symbols):
            code[label] = "".join(xa.symbols[j] for j in self.codebook[i])
        return {
            "source_alphabet": list(self.source_alphabet.symbols),
            "fragment_alphabet": list(xa.symbols),
            "M": self.block_length,
            "code": code,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FragmentationMap":
        ya = Alphabet(tuple(obj["source_alphabet"]))
        xa = Alphabet(tuple(obj["fragment_alphabet"]))
        m = int(obj["M"])
        words = [obj["code"][label] for label in ya.symbols]
        return make_map(ya, xa, m, words)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path) -> "FragmentationMap":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class DecompositionReport:
    """Exact loss accounting at source-context length w (Mw fragments)."""

    w: int
    source_loss: float
    fragmented_loss: float
    context_deficit: float
    phase_ambiguity: float

    @property
    def gap(self) -> float:
        return self.fragmented_loss - self.source_loss

    def to_json(self) -> dict:
        return {
            "w": self.w,
            "source_loss_bits": self.source_loss,
            "fragmented_loss_bits": self.fragmented_loss,
            "context_deficit_bits": self.context_deficit,
            "phase_ambiguity_bits": self.phase_ambiguity,
            "gap_bits": self.gap,
        }

    def csv_row(self) -> list:
        return [
            self.w,
            self.source_loss,
            self.fragmented_loss,
            self.context_deficit,
            self.phase_ambiguity,
            self.gap,
        ]


def default_code(source_size: int, fragment_size: int, block_length: int) -> list[tuple[int, ...]]:
    """Symbol index written in block_length base-|X| digits, MSB first."""
    if source_size > fragment_size**block_length:
        raise ParameterError(
            f"{source_size} symbols do not fit in {block_length} digits base {fragment_size}"
        )
    words = []
    for i in range(source_size):
        digits = []
        v = i
        for _ in range(block_length):
            digits.append(v % fragment_size)
            v //= fragment_size
        words.append(tuple(reversed(digits)))
    return words


def make_map(
    source_alphabet: Alphabet,
    fragment_alphabet: Alphabet,
    block_length: int,
    codewords=None,
) -> FragmentationMap:
    """Validate codewords (distinct, exact length) and build the map.

    When codewords is None the default base-|X| index code is used.
    block_length = 1 is allowed and is a plain relabeling.
    """
    if block_length < 1:
        raise ParameterError("block length must be >= 1")
    y, x = source_alphabet, fragment_alphabet
    if y.size > x.size**block_length:
        raise ParameterError("source alphabet does not fit in the fragment code space")
    if codewords is None:
        words = default_code(y.size, x.size, block_length)
    else:
        if len(codewords) != y.size:
            raise FormatError("one codeword per source symbol is required")
        words = []
        for word in codewords:
            idx = x.encode(word)
            if len(idx) != block_length:
                raise FormatError(
                    f"codeword {word!r} has length {len(idx)}, expected {block_length}"
                )
            words.append(tuple(int(v) for v in idx))
    if len(set(words)) != len(words):
        raise InjectivityError("codewords must be distinct")
    codebook = np.asarray(words, dtype=np.int32).reshape(y.size, block_length)
    codebook.flags.writeable = False
    return FragmentationMap(y, x, block_length, codebook)


def fragment(fmap: FragmentationMap, y_sequence) -> np.ndarray:
    """Concatenate the codewords of a source sequence."""
    seq = fmap.source_alphabet.encode(y_sequence)
    return fmap.codebook[seq].reshape(-1).astype(np.int32)


def defragment(fmap: FragmentationMap, x_sequence) -> np.ndarray:
    """Invert `fragment`; blocks not in the code raise AlphabetError."""
    seq = fmap.fragment_alphabet.encode(x_sequence)
    m = fmap.block_length
    if len(seq) % m:
        raise FormatError("fragment sequence length is not a multiple of the block length")
    blocks = seq.reshape(-1, m)
    lut = {tuple(int(v) for v in fmap.codebook[i]): i for i in range(fmap.source_alphabet.size)}
    out = np.empty(blocks.shape[0], dtype=np.int32)
    for i, row in enumerate(blocks):
        key = tuple(int(v) for v in row)
        if key not in lut:
            raise AlphabetError(f"block {key} is not a codeword")
        out[i] = lut[key]
    return out


def _cond_entropy_bits(table: dict[bytes, np.ndarray]) -> float:
    """H(target | context) from a joint table context -> mass vector."""
    terms = []
    for vec in table.values():
        tot = vec.sum()
        if tot <= 0:
            continue
        nz = vec[vec > 0]
        terms.append(float(np.dot(nz, np.log2(tot / nz))))
    return math.fsum(terms)


def _phase_tables(kernel: TransitionKernel, fmap: FragmentationMap, w: int, table_budget: int):
    """Joint tables of (fragment context, target fragment) per phase.

    Enumerates the stationary joint over w+1 source symbols, maps each
    tuple to its fragment string, and reads off for each phase the
    length-Mw context, the full context back to the window start, and the
    target fragment.  Returns (own, full, pooled) where own/full are
    per-phase lists of dicts and pooled mixes phases with weight 1/M.
    """
    a = kernel.alphabet_size
    m = fmap.block_length
    xa = fmap.fragment_alphabet.size
    length = w + 1
    if a**length > table_budget:
        raise CapacityError(
            f"decomposition at w={w} needs {a**length} source tuples (budget {table_budget})"
        )
    joint = window_law(kernel, length, table_budget)
    n_tuples = joint.size

    # decode flat codes into per-symbol digits, oldest first
    codes = np.arange(n_tuples, dtype=np.int64)
    digits = np.empty((n_tuples, length), dtype=np.int64)
    for pos in range(length - 1, -1, -1):
        digits[:, pos] = codes % a
        codes //= a
    frag = fmap.codebook[digits].reshape(n_tuples, length * m)

    own: list[dict[bytes, np.ndarray]] = [dict() for _ in range(m)]
    full: list[dict[bytes, np.ndarray]] = [dict() for _ in range(m)]
    pooled: dict[bytes, np.ndarray] = {}
    inv_m = 1.0 / m
    mw = m * w
    probs = joint
    for theta in range(1, m + 1):
        tcol = mw + theta - 1
        own_t = own[theta - 1]
        full_t = full[theta - 1]
        for i in range(n_tuples):
            p = probs[i]
            if p == 0.0:
                continue
            row = frag[i]
            target = int(row[tcol])
            own_key = row[theta - 1 : tcol].tobytes()
            full_key = row[:tcol].tobytes()
            vec = own_t.get(own_key)
            if vec is None:
                vec = np.zeros(xa)
                own_t[own_key] = vec
            vec[target] += p
            vec = full_t.get(full_key)
            if vec is None:
                vec = np.zeros(xa)
                full_t[full_key] = vec
            vec[target] += p
            vec = pooled.get(own_key)
            if vec is None:
                vec = np.zeros(xa)
                pooled[own_key] = vec
            vec[target] += p * inv_m
    return own, full, pooled


def exact_fragmented_loss(
    kernel: TransitionKernel,
    fmap: FragmentationMap,
    w: int,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> float:
    """Optimal fragmented loss with an Mw-fragment window, bits per source
    symbol: M times the phase-pooled conditional entropy of the target
    fragment."""
    _, _, pooled = _phase_tables(kernel, fmap, w, table_budget)
    return fmap.block_length * _cond_entropy_bits(pooled)


def phase_ambiguity(
    kernel: TransitionKernel,
    fmap: FragmentationMap,
    w: int,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> float:
    """Bits lost because the window hides the target's block position:
    M * [H(target | pooled context) - mean over phases of H(target | context)]."""
    own, _, pooled = _phase_tables(kernel, fmap, w, table_budget)
    per_phase = math.fsum(_cond_entropy_bits(t) for t in own)
    return fmap.block_length * _cond_entropy_bits(pooled) - per_phase


def context_deficit(
    kernel: TransitionKernel,
    fmap: FragmentationMap,
    w: int,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> float:
    """Bits of source history the misaligned window cuts off: the summed
    conditional information the missing prefix carries about each target
    fragment.  Zero whenever w exceeds the Markov order."""
    own, full, _ = _phase_tables(kernel, fmap, w, table_budget)
    terms = []
    for theta in range(2, fmap.block_length + 1):
        terms.append(_cond_entropy_bits(own[theta - 1]) - _cond_entropy_bits(full[theta - 1]))
    return math.fsum(terms)


def decompose(
    kernel: TransitionKernel,
    fmap: FragmentationMap,
    w: int,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> DecompositionReport:
    """Exact source loss, fragmented loss, and the two penalty terms."""
    own, full, pooled = _phase_tables(kernel, fmap, w, table_budget)
    m = fmap.block_length
    frag_loss = m * _cond_entropy_bits(pooled)
    per_phase = math.fsum(_cond_entropy_bits(t) for t in own)
    ambiguity = frag_loss - per_phase
    deficit = math.fsum(
        _cond_entropy_bits(own[t - 1]) - _cond_entropy_bits(full[t - 1])
        for t in range(2, m + 1)
    )
    source_loss = conditional_entropy(kernel, w, table_budget)
    return DecompositionReport(
        w=w,
        source_loss=source_loss,
        fragmented_loss=frag_loss,
        context_deficit=deficit,
        phase_ambiguity=ambiguity,
    )


def empirical_fragmented_loss(
    fmap: FragmentationMap, y_sequence, w: int, laplace_alpha: float
) -> float:
    """Laplace n-gram loss on the fragmented stream, bits per source symbol.

    Fits an (Mw)-context model on the fragmented sequence and scales the
    per-fragment loss by M, so the value is comparable to
    `exact_fragmented_loss`.
    """
    x = fragment(fmap, y_sequence)
    mw = fmap.block_length * w
    predictor = fit(x, mw, laplace_alpha, alphabet=fmap.fragment_alphabet)
    return fmap.block_length * log_loss(predictor, x)
