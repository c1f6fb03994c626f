import math

import mpmath
import numpy as np
import pytest

from trustcal.agent import AgentParams, simulate_cohort, cohort_to_records
from trustcal.conditions import condition_spec
from trustcal.datastore import TrialRecord
from trustcal.metrics import (
    block_accuracy,
    classify_learner,
    cohort_learning_slope,
    dprime,
    ece,
    hr_far,
    learning_slope,
    model_fit_stats,
)
from trustcal.streams import substream


def rec(pid="p", t=1, conf=0.5, g=True, y=True, cond="standard"):
    return TrialRecord(
        participant_id=pid,
        condition=cond,
        trial_index=t,
        ai_confidence=conf,
        ai_correct=g,
        human_judged_correct=y,
        human_correct=y == g,
    )


def random_dataset(rng, n=60):
    return [
        rec("p", t, conf=rng.integers(0, 11) / 10.0, g=bool(rng.random() < 0.5),
            y=bool(rng.random() < 0.5))
        for t in range(1, n + 1)
    ]


class TestHrFar:
    def test_perfect_discrimination(self):
        records = [rec(t=t, g=t % 2 == 0, y=t % 2 == 0) for t in range(1, 21)]
        assert hr_far(records, (1, 20)) == (1.0, 0.0)

    def test_always_correct_responder(self):
        records = [rec(t=t, g=t % 2 == 0, y=True) for t in range(1, 21)]
        assert hr_far(records, (1, 20)) == (1.0, 1.0)

    def test_independent_judgments(self):
        rng = substream(3, "ind")
        records = [
            rec(t=t, g=bool(rng.random() < 0.5), y=bool(rng.random() < 0.5))
            for t in range(1, 10_001)
        ]
        hr, far = hr_far(records, (1, 10_000))
        assert abs(hr - far) < 0.05

    def test_empty_class_is_none(self):
        records = [rec(t=t, g=True, y=True) for t in range(1, 6)]
        hr, far = hr_far(records, (1, 5))
        assert hr == 1.0 and far is None


class TestDprime:
    def test_no_sensitivity(self):
        assert dprime(5, 10, 5, 10) == pytest.approx(0.0, abs=1e-12)

    def test_oracle_value_without_correction(self):
        # high-precision inverse normal CDF oracle
        mpmath.mp.dps = 30
        z = lambda p: float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))
        expected = z(0.9) - z(0.18)
        got = dprime(90, 100, 18, 100, correction=False)
        assert expected == pytest.approx(2.197, abs=0.001)
        assert got == pytest.approx(expected, abs=1e-9)

    def test_antisymmetric_under_label_swap(self):
        a = dprime(80, 100, 30, 100)
        b = dprime(30, 100, 80, 100)
        assert a == pytest.approx(-b, abs=1e-12)

    def test_strictly_increasing_in_hits(self):
        values = [dprime(h, 100, 20, 100) for h in range(0, 101)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_correction_keeps_extremes_finite(self):
        assert math.isfinite(dprime(100, 100, 0, 100))

    def test_count_validation(self):
        with pytest.raises(ValueError):
            dprime(1, 0, 0, 10)
        with pytest.raises(ValueError):
            dprime(11, 10, 0, 10)


class TestBlockAccuracy:
    def test_all_correct(self):
        records = [rec(t=t, g=True, y=True) for t in range(1, 51)]
        blocks = block_accuracy(records)
        assert len(blocks) == 5
        assert all(b.accuracy == 1.0 for b in blocks)

    def test_partition_arithmetic(self):
        records = [rec(t=t) for t in range(1, 51)]
        blocks = block_accuracy(records, block_size=10)
        assert [(b.block_start, b.block_end, b.n_trials) for b in blocks] == [
            (1, 10, 10), (11, 20, 10), (21, 30, 10), (31, 40, 10), (41, 50, 10)
        ]

    def test_partial_last_block(self):
        records = [rec(t=t) for t in range(1, 26)]
        blocks = block_accuracy(records, block_size=10)
        assert blocks[-1].n_trials == 5
        assert (blocks[-1].block_start, blocks[-1].block_end) == (21, 25)

    def test_learning_cohort_improves(self):
        params = AgentParams(0.60, 0.69, 0.29, 0.46, 0.55, 0.05)
        res = simulate_cohort(params, condition_spec("standard"), 200, 50,
                              rng=substream(10, "blk"))
        blocks = block_accuracy(cohort_to_records(res))
        assert blocks[-1].accuracy - blocks[0].accuracy > 0.10

    def test_errors(self):
        with pytest.raises(ValueError):
            block_accuracy([], 10)
        with pytest.raises(ValueError):
            block_accuracy([rec()], 0)


def test_accuracy_decomposition_identity():
    # accuracy == HR * P(g=1) + (1 - FAR) * P(g=0) on any dataset with both classes
    rng = substream(31, "dec")
    for _ in range(1000):
        records = random_dataset(rng, n=int(rng.integers(10, 80)))
        g = np.array([r.ai_correct for r in records])
        if g.all() or not g.any():
            continue
        hr, far = hr_far(records, (1, len(records)))
        acc = np.mean([r.human_correct for r in records])
        p1 = g.mean()
        assert acc == pytest.approx(hr * p1 + (1 - far) * (1 - p1), abs=1e-12)


class TestEce:
    def test_zero_when_perceived_matches(self):
        records = []
        t = 0
        for conf, p in [(0.2, 0.2), (0.8, 0.8)]:
            for i in range(10):
                t += 1
                g = i < int(p * 10)
                records.append(rec(t=t, conf=conf, g=g, y=g))
        assert ece(records).ece == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_two_bin_example(self):
        records = []
        t = 0
        # bin 0.8: AI accuracy 0.8, perceived 0.6 ; bin 0.2: 0.2 vs 0.3
        for i in range(10):
            t += 1
            records.append(rec(t=t, conf=0.8, g=i < 8, y=i < 6))
        for i in range(10):
            t += 1
            records.append(rec(t=t, conf=0.2, g=i < 2, y=i < 3))
        report = ece(records)
        assert report.ece == pytest.approx(0.15, abs=1e-12)
        assert sum(b.n for b in report.bins) == 20
        assert len(report.bins) == 11

    def test_invariant_under_permutation(self):
        rng = substream(4, "perm")
        records = random_dataset(rng, 200)
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert ece(records).ece == pytest.approx(ece(shuffled).ece, abs=1e-12)

    def test_learning_reduces_ece(self):
        params = AgentParams(0.60, 0.69, 0.29, 0.46, 0.55, 0.05)
        wins = 0
        for i in range(50):
            res = simulate_cohort(params, condition_spec("overconfidence"), 100, 50,
                                  rng=substream(i, "eceimp"))
            records = cohort_to_records(res)
            early = ece([r for r in records if r.trial_index <= 10]).ece
            late = ece([r for r in records if r.trial_index > 40]).ece
            wins += late < early
        assert wins >= 45


class TestLearningSlope:
    def test_flat_when_independent(self):
        rng = substream(5, "flat")
        records = [rec(t=t, g=True, y=bool(rng.random() < 0.7)) for t in range(1, 5001)]
        fit = learning_slope(records)
        assert abs(fit.beta) < 0.01
        assert not fit.separated

    def test_deterministic(self):
        rng = substream(6, "det")
        records = random_dataset(rng, 100)
        a = learning_slope(records)
        b = learning_slope(records)
        assert a.beta == pytest.approx(b.beta, abs=1e-10)

    def test_recovers_known_slope(self):
        rng = substream(7, "known")
        beta_true, icpt = 0.08, -1.5
        records = [
            rec(t=t, g=True, y=bool(rng.random() < 1 / (1 + math.exp(-(icpt + beta_true * t)))))
            for t in range(1, 2001)
        ]
        fit = learning_slope(records)
        assert fit.beta == pytest.approx(beta_true, rel=0.15)

    def test_separation_capped_and_flagged(self):
        records = [rec(t=t, g=True, y=t > 25) for t in range(1, 51)]
        fit = learning_slope(records)
        assert fit.separated
        assert abs(fit.beta) == 5.0

    def test_cohort_slope_in_expected_band(self):
        params = AgentParams(0.60, 0.69, 0.29, 0.46, 0.55, 0.05)
        res = simulate_cohort(params, condition_spec("overconfidence"), 200, 50,
                              rng=substream(12, "slope"))
        beta = cohort_learning_slope(cohort_to_records(res))
        assert 0.02 <= beta <= 0.10

    def test_needs_enough_trials(self):
        with pytest.raises(ValueError):
            learning_slope([rec(t=t) for t in range(1, 10)])


class TestClassifyLearner:
    def _with_late_accuracy(self, k_correct):
        records = [rec(t=t, g=True, y=True) for t in range(1, 31)]
        for i, t in enumerate(range(31, 51)):
            records.append(rec(t=t, g=True, y=i < k_correct))
        return records

    def test_threshold_cases(self):
        assert classify_learner(self._with_late_accuracy(13)) == "learner"   # 0.65
        assert classify_learner(self._with_late_accuracy(12)) == "non_learner"  # 0.60
        assert classify_learner(self._with_late_accuracy(11)) == "non_learner"

    def test_requires_late_trials(self):
        with pytest.raises(ValueError):
            classify_learner([rec(t=t) for t in range(1, 31)])

    def test_matches_direct_recomputation(self):
        rng = substream(9, "cls")
        for _ in range(1000):
            records = [
                rec(t=t, g=bool(rng.random() < 0.5), y=bool(rng.random() < 0.6))
                for t in range(1, 51)
            ]
            late = [r.human_correct for r in records if 31 <= r.trial_index <= 50]
            oracle = "learner" if np.mean(late) > 0.60 else "non_learner"
            assert classify_learner(records) == oracle


class TestModelFitStats:
    def test_perfect_predictions(self):
        records = [rec(t=t, y=t % 2 == 0) for t in range(1, 41)]
        v = np.array([1.0 if r.human_judged_correct else 0.0 for r in records])
        stats = model_fit_stats(v, records)
        assert stats["agreement"] == 1.0
        assert stats["mcfadden_r2"] == pytest.approx(1.0, abs=1e-6)

    def test_base_rate_model_has_zero_r2(self):
        records = [rec(t=t, y=t % 4 == 0) for t in range(1, 41)]
        base = np.mean([r.human_judged_correct for r in records])
        stats = model_fit_stats(np.full(len(records), base), records)
        assert stats["mcfadden_r2"] == pytest.approx(0.0, abs=1e-12)

    def test_constant_half_loglik(self):
        records = [rec(t=t) for t in range(1, 51)]
        stats = model_fit_stats(np.full(50, 0.5), records)
        assert stats["mean_loglik_per_trial"] == pytest.approx(math.log(0.5), abs=1e-12)

    def test_tie_counts_as_correct_prediction(self):
        records = [rec(t=1, y=True)]
        assert model_fit_stats(np.array([0.5]), records)["agreement"] == 1.0
