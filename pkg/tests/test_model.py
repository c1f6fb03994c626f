import math

import numpy as np
import pytest
from scipy.special import expit
from scipy.stats import norm

from trustcal.agent import AgentParams, sample_agent_params, simulate_participant
from trustcal.conditions import condition_spec
from trustcal.datastore import TrialRecord
from trustcal.inference import (
    HyperParams,
    RATE_FAMILIES,
    log_likelihood,
    log_posterior,
    log_prior_hyper,
    log_prior_participant,
)
from trustcal.inference._kernels import neg_log_posterior_unconstrained, records_to_arrays
from trustcal.inference._kernels import loglik_core
from trustcal.streams import substream


def rec(t, conf, g, y):
    return TrialRecord(
        participant_id="p",
        condition="standard",
        trial_index=t,
        ai_confidence=conf,
        ai_correct=g,
        human_judged_correct=y,
        human_correct=y == g,
    )


def reference_loglik(params, records):
    # straight-line re-derivation of the recursion, independent of the package path
    b, w = params.b0, params.w0
    ll = 0.0
    for r in sorted(records, key=lambda x: x.trial_index):
        c = min(max(r.ai_confidence, 0.05), 0.95)
        L = math.log(c / (1 - c))
        v = 1.0 / (1.0 + math.exp(-(b + w * L)))
        vc = min(max(v, 1e-9), 1 - 1e-9)
        ll += math.log(vc) if r.human_judged_correct else math.log(1 - vc)
        d = (1.0 if r.ai_correct else 0.0) - v
        if r.ai_correct:
            b += params.alpha_b_correct * d
            w += params.alpha_w_correct * d * L
        else:
            b += params.alpha_b_wrong * d
            w += params.alpha_w_wrong * d * L
    return ll


class TestLogLikelihood:
    def test_inert_agent_constant_probability(self):
        params = AgentParams(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        records = [rec(t, 0.7, t % 2 == 0, t % 3 == 0) for t in range(1, 51)]
        assert log_likelihood(params, records) == pytest.approx(50 * math.log(0.5), abs=1e-9)
        assert log_likelihood(params, records) == pytest.approx(-34.657, abs=1e-3)

    def test_single_trial_matches_perceive(self):
        params = AgentParams(0.60, 0.0, 0.1, 0.1, 0.1, 0.1)
        records = [rec(1, 0.5, True, True)]
        assert log_likelihood(params, records) == pytest.approx(math.log(0.6457), abs=1e-4)

    def test_empty_records_zero(self):
        assert log_likelihood(sample_agent_params(substream(0, "p")), []) == 0.0

    def test_matches_independent_reimplementation(self):
        rng = substream(13, "oracle")
        for i in range(20):
            params = sample_agent_params(substream(13, "p", i))
            records = simulate_participant(
                params, condition_spec("overconfidence"), 50, rng=substream(13, "s", i)
            )
            assert log_likelihood(params, records) == pytest.approx(
                reference_loglik(params, records), abs=1e-9
            )

    def test_compiled_kernel_matches_reference(self):
        for i in range(20):
            params = sample_agent_params(substream(14, "p", i))
            records = simulate_participant(
                params, condition_spec("reverse"), 50, rng=substream(14, "s", i)
            )
            c, g, y = records_to_arrays(records)
            got = loglik_core(
                params.b0, params.w0,
                params.alpha_b_correct, params.alpha_b_wrong,
                params.alpha_w_correct, params.alpha_w_wrong,
                c, g, y,
            )
            assert got == pytest.approx(reference_loglik(params, records), abs=1e-9)


class TestLogPriorParticipant:
    def _hyper(self):
        return HyperParams.prior_means()

    def test_value_at_hyper_means(self):
        hyper = self._hyper()
        params = AgentParams(0.0, 0.0, *(expit(-1.5),) * 4)
        expected = -2 * math.log(math.sqrt(2 * math.pi))  # b0, w0 at N(0,1) mode
        expected += -4 * math.log(math.sqrt(2 * math.pi))  # four rates at their mode
        assert log_prior_participant(params, hyper, "standard") == pytest.approx(expected, abs=1e-9)

    def test_one_sigma_shift_costs_half(self):
        hyper = self._hyper()
        base = AgentParams(0.0, 0.0, *(expit(-1.5),) * 4)
        shifted = AgentParams(hyper.sigma_b0, 0.0, *(expit(-1.5),) * 4)
        drop = log_prior_participant(base, hyper, "standard") - log_prior_participant(
            shifted, hyper, "standard"
        )
        assert drop == pytest.approx(0.5, abs=1e-12)

    def test_matches_scipy_density_oracle(self):
        hyper = self._hyper()
        rng = substream(21, "prior")
        for _ in range(20):
            params = sample_agent_params(rng)
            expected = norm.logpdf(params.b0, hyper.mu_b0, hyper.sigma_b0)
            expected += norm.logpdf(params.w0, hyper.mu_w0, hyper.sigma_w0)
            for fam, a in zip(RATE_FAMILIES, params.alphas()):
                mu, sd = hyper.alpha_prior("reverse", fam)
                expected += norm.logpdf(math.log(a / (1 - a)), mu, sd)
            got = log_prior_participant(params, hyper, "reverse")
            assert got == pytest.approx(expected, abs=1e-9)

    def test_alpha_outside_unit_interval_rejected(self):
        params = AgentParams(0.0, 0.0, 0.0, 0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            log_prior_participant(params, self._hyper(), "standard")


class TestLogPriorHyper:
    def test_rate_mean_prior_peaks_at_its_center(self):
        base = HyperParams.prior_means(conditions=("standard",))
        assert expit(-1.5) == pytest.approx(0.1824, abs=1e-4)
        lp_centered = log_prior_hyper(base)
        nudged = HyperParams.prior_means(conditions=("standard",))
        nudged.mu_alpha[("standard", "b_correct")] = -0.5
        assert log_prior_hyper(nudged) < lp_centered

    def test_scale_terms_are_negative_sigma(self):
        a = HyperParams.prior_means(conditions=("standard",))
        b = HyperParams.prior_means(conditions=("standard",))
        b.sigma_b0 = 2.5
        assert log_prior_hyper(a) - log_prior_hyper(b) == pytest.approx(
            -1.0 + 2.5, abs=1e-12
        )

    def test_matches_scipy_density_oracle(self):
        rng = substream(22, "hyper")
        for _ in range(20):
            hyper = HyperParams(
                mu_b0=float(rng.normal()),
                sigma_b0=float(rng.exponential() + 0.01),
                mu_w0=float(rng.normal()),
                sigma_w0=float(rng.exponential() + 0.01),
                mu_alpha={("reverse", f): float(rng.normal(-1.5, 1.5)) for f in RATE_FAMILIES},
                sigma_alpha={("reverse", f): float(rng.exponential() + 0.01) for f in RATE_FAMILIES},
            )
            expected = norm.logpdf(hyper.mu_b0, 0, 1) + norm.logpdf(hyper.mu_w0, 0, 1)
            expected += -hyper.sigma_b0 - hyper.sigma_w0
            for f in RATE_FAMILIES:
                expected += norm.logpdf(hyper.mu_alpha[("reverse", f)], -1.5, 1.5)
                expected += -hyper.sigma_alpha[("reverse", f)]
            assert log_prior_hyper(hyper) == pytest.approx(expected, abs=1e-9)

    def test_nonpositive_sigma_rejected(self):
        with pytest.raises(ValueError):
            HyperParams(sigma_b0=0.0)


class TestLogPosterior:
    def _setup(self, n_participants=1):
        hyper = HyperParams.prior_means()
        participants, data = {}, {}
        for i in range(n_participants):
            pid = f"p{i}"
            params = sample_agent_params(substream(30, "p", i))
            participants[pid] = params
            data[pid] = simulate_participant(
                params, condition_spec("standard"), 30, rng=substream(30, "d", i),
                participant_id=pid,
            )
        return participants, hyper, data

    def test_single_participant_additivity(self):
        participants, hyper, data = self._setup(1)
        (pid, params), = participants.items()
        expected = (
            log_likelihood(params, data[pid])
            + log_prior_participant(params, hyper, "standard")
            + log_prior_hyper(hyper)
        )
        assert log_posterior(participants, hyper, data) == pytest.approx(expected, abs=1e-9)

    def test_duplicated_participant_adds_exactly_its_terms(self):
        participants, hyper, data = self._setup(1)
        params = participants["p0"]
        both = {"p0": params, "p0copy": params}
        data2 = {"p0": data["p0"], "p0copy": data["p0"]}
        diff = log_posterior(both, hyper, data2) - log_posterior(participants, hyper, data)
        assert diff == pytest.approx(
            log_likelihood(params, data["p0"])
            + log_prior_participant(params, hyper, "standard"),
            abs=1e-9,
        )

    def test_finite_on_random_configurations(self):
        rng = substream(33, "tot")
        for i in range(100):
            participants, hyper, data = self._setup(1 + i % 3)
            val = log_posterior(participants, hyper, data)
            assert np.isfinite(val)

    def test_missing_data_rejected(self):
        participants, hyper, data = self._setup(1)
        participants["ghost"] = participants["p0"]
        with pytest.raises(ValueError):
            log_posterior(participants, hyper, data)


def test_finite_difference_gradient_is_clean():
    # central differences across random valid points: no NaN/Inf anywhere
    hyper = HyperParams.prior_means()
    h = 1e-5
    rng = substream(44, "fd")
    for i in range(10):
        params = sample_agent_params(substream(44, "p", i))
        data = {
            "p": simulate_participant(
                params, condition_spec("standard"), 30, rng=substream(44, "d", i),
                participant_id="p",
            )
        }

        def lp(b0, w0):
            moved = AgentParams(b0, w0, *params.alphas())
            return log_posterior({"p": moved}, hyper, data)

        for _ in range(5):
            b0 = params.b0 + float(rng.normal(0, 0.5))
            w0 = params.w0 + float(rng.normal(0, 0.5))
            gb = (lp(b0 + h, w0) - lp(b0 - h, w0)) / (2 * h)
            gw = (lp(b0, w0 + h) - lp(b0, w0 - h)) / (2 * h)
            assert np.isfinite(gb) and np.isfinite(gw)


def test_unconstrained_kernel_matches_python_densities():
    hyper = HyperParams.prior_means()
    rng = substream(40, "ker")
    for i in range(10):
        params = sample_agent_params(substream(40, "p", i))
        records = simulate_participant(
            params, condition_spec("standard"), 40, rng=substream(40, "s", i)
        )
        c, g, y = records_to_arrays(records)
        x = np.array(
            [params.b0, params.w0]
            + [math.log(a / (1 - a)) for a in params.alphas()]
        )
        mu = np.array([0.0, 0.0, -1.5, -1.5, -1.5, -1.5])
        sd = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        got = -neg_log_posterior_unconstrained(x, c, g, y, mu, sd)
        expected = log_likelihood(params, records) + log_prior_participant(
            params, hyper, "standard"
        )
        assert got == pytest.approx(expected, abs=1e-9)
