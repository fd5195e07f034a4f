import math

import numpy as np
import pytest

import recoding as r
from recoding.ngram import window_codes
from oracles import oracle_window_law


class TestFit:
    def test_hand_counts(self, binary):
        # "0101", w=1: two 0->1 transitions out of two visits to context 0
        pred = r.fit("0101", 1, 0.5, binary)
        assert pred.row(0)[1] == pytest.approx(2.5 / 3)
        assert pred.row(0)[0] == pytest.approx(0.5 / 3)

    def test_unsmoothed_frequencies(self, binary):
        pred = r.fit("00100100", 1, 0.0, binary)
        row0 = pred.row(0)
        # context 0 seen 5 times: 0->0 three times, 0->1 twice
        assert row0[0] == pytest.approx(3 / 5)
        assert row0[1] == pytest.approx(2 / 5)

    def test_empty_sequence_uniform(self, binary):
        pred = r.fit("", 2, 0.5, binary)
        assert np.allclose(pred.row(0), [0.5, 0.5])
        assert np.allclose(pred.row(3), [0.5, 0.5])

    def test_rows_sum_to_one(self, binary):
        seq = r.sample_sequence(r.sample_kernel(2, 2, 0.5, 0), 5000, 1)
        pred = r.fit(seq, 3, 0.5, binary)
        for code in range(8):
            assert pred.row(code).sum() == pytest.approx(1.0, abs=1e-12)

    def test_positivity_floor(self, binary):
        seq = r.sample_sequence(r.sample_kernel(2, 1, 0.5, 2), 1000, 3)
        pred = r.fit(seq, 1, 0.5, binary)
        n = len(seq)
        assert pred.positivity_floor() >= 0.5 / (n + 0.5 * 2)
        assert pred.positivity_floor() > 0


class TestLogLoss:
    def test_uniform_predictor_exact(self, binary):
        pred = r.ContextPredictor(binary, 1)
        seq = r.sample_sequence(r.sample_kernel(2, 1, 0.5, 4), 1000, 5)
        assert r.log_loss(pred, seq) == pytest.approx(1.0, abs=1e-12)

    def test_true_kernel_reaches_entropy_rate(self, hand_kernel):
        seq = r.sample_sequence(hand_kernel, 10**6, 6)
        pred = r.optimal_predictor(hand_kernel, 1)
        assert abs(r.log_loss(pred, seq) - r.entropy_rate(hand_kernel)) < 0.01

    def test_fitted_self_loss_near_rate(self):
        k = r.sample_kernel(2, 2, 0.5, 8)
        seq = r.sample_sequence(k, 200_000, 9)
        pred = r.fit(seq, 2, 0.5, k.alphabet)
        assert r.log_loss(pred, seq) <= r.entropy_rate(k) + 0.02

    def test_zero_probability_reports_infinity(self, binary):
        pred = r.fit("0000", 1, 0.0, binary)
        assert r.log_loss(pred, "0001") == math.inf

    def test_sequence_too_short(self, binary):
        pred = r.fit("0101", 2, 0.5, binary)
        with pytest.raises(r.DataError):
            r.log_loss(pred, "01")


class TestOptimalPredictor:
    def test_rows_equal_kernel_rows_at_order(self, hand_kernel):
        pred = r.optimal_predictor(hand_kernel, 1)
        assert np.allclose(pred.row(0), hand_kernel.probs[0], atol=1e-12)
        assert np.allclose(pred.row(1), hand_kernel.probs[1], atol=1e-12)

    def test_lifted_rows_beyond_order(self, hand_kernel):
        pred = r.optimal_predictor(hand_kernel, 3)
        # context code ends in symbol 1 -> kernel row 1
        assert np.allclose(pred.row(0b101), hand_kernel.probs[1], atol=1e-12)
        assert np.allclose(pred.row(0b110), hand_kernel.probs[0], atol=1e-12)

    def test_w0_is_stationary_marginal(self, hand_kernel):
        pred = r.optimal_predictor(hand_kernel, 0)
        assert np.allclose(pred.row(0), [4 / 7, 3 / 7], atol=1e-12)

    def test_marginalized_against_oracle(self):
        k = r.sample_kernel(2, 2, 0.5, 11)
        pred = r.optimal_predictor(k, 1)
        joint = oracle_window_law(k, 2)
        for ctx in (0, 1):
            tot = joint[(ctx, 0)] + joint[(ctx, 1)]
            for y in (0, 1):
                assert pred.row(ctx)[y] == pytest.approx(joint[(ctx, y)] / tot, abs=1e-10)

    def test_monotone_loss_in_w(self):
        k = r.sample_kernel(2, 2, 0.5, 21)
        seq = r.sample_sequence(k, 200_000, 22)
        losses = [r.log_loss(r.optimal_predictor(k, w), seq) for w in range(4)]
        for lo, hi in zip(losses[1:], losses[:-1]):
            assert lo <= hi + 0.005

    def test_loss_converges_to_conditional_entropy(self):
        k = r.sample_kernel(2, 2, 0.5, 30)
        seq = r.sample_sequence(k, 10**6, 31)
        for w in (0, 1, 2):
            emp = r.log_loss(r.optimal_predictor(k, w), seq)
            assert abs(emp - r.conditional_entropy(k, w)) < 0.01


class TestSerialization:
    def test_counts_roundtrip(self, binary):
        seq = r.sample_sequence(r.sample_kernel(2, 2, 0.5, 1), 3000, 2)
        pred = r.fit(seq, 2, 0.5, binary)
        back = r.ContextPredictor.from_json(pred.to_json())
        codes = np.arange(4)
        assert np.allclose(back.rows_for(codes), pred.rows_for(codes), atol=1e-15)
        assert back.alpha == pred.alpha

    def test_file_roundtrip(self, tmp_path, binary):
        pred = r.fit("010011010", 1, 0.5, binary)
        path = tmp_path / "pred.json"
        pred.save(path)
        back = r.ContextPredictor.load(path)
        assert np.allclose(back.row(0), pred.row(0))

    def test_exact_predictor_not_serializable(self, hand_kernel):
        pred = r.optimal_predictor(hand_kernel, 1)
        with pytest.raises(r.FormatError):
            pred.to_json()


class TestWindowCodes:
    def test_matches_manual_encoding(self):
        seq = np.array([1, 0, 1, 1, 0], dtype=np.int32)
        codes = window_codes(seq, 2, 2)
        assert codes.tolist() == [0b10, 0b01, 0b11, 0b110 & 0b11]

    def test_w0(self):
        seq = np.zeros(5, dtype=np.int32)
        assert window_codes(seq, 0, 2).tolist() == [0] * 6

    def test_capacity(self):
        seq = np.zeros(10, dtype=np.int32)
        with pytest.raises(r.CapacityError):
            window_codes(seq, 80, 3)
