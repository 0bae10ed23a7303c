"""Tests for the WD, ISWD, score-function and finite-difference estimators."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from weakgrad.config import get_settings
from weakgrad.core.distributions import Exponential, Gamma, Gaussian, Weibull
from weakgrad.core.models import mm1_spec
from weakgrad.core.rng_streams import StreamSpec
from weakgrad.core.stats import summarize
from weakgrad.errors import ParameterError, ShapeError, SupportViolationError, UnsupportedCombinationError
from weakgrad.estimators import (
    ESTIMATORS,
    EstimatorKind,
    check_combination,
    default_fd_step,
    finite_difference,
    importance_sampling_mean,
    iswd,
    run_estimator,
    score_function,
    wd_classical,
)
from weakgrad.estimators.weak_derivative import iswd_weights
from weakgrad.tests.conftest import SumModel, within_se

BIG_BLOCK = 100_000


def _se(batch) -> float:
    return float(np.std(batch.samples) / math.sqrt(batch.n))


def _overlap(a, b, k: float = 4.0) -> bool:
    return abs(a.samples.mean() - b.samples.mean()) <= k * math.hypot(_se(a), _se(b))


# ═══════════════════════════════════════════════════════════════════
# 1. EXACT CASE: dE[T₁]/dθ = 1
# ═══════════════════════════════════════════════════════════════════

class TestSingleCustomerUnbiased:
    @pytest.mark.parametrize("kind", list(EstimatorKind))
    def test_ci_contains_one(self, mm1_single, kind):
        batch = run_estimator(
            kind, mm1_single, StreamSpec(master_seed=42, substream_index=list(EstimatorKind).index(kind)),
            n=1_000_000, block_size=BIG_BLOCK,
        )
        report = summarize(batch, confidence=0.99)
        assert report.ci_low <= 1.0 <= report.ci_high

    def test_score_function_at_theta_two(self):
        spec = mm1_spec(1, service_mean=2.0)
        batch = score_function(spec, None, 1_000_000, StreamSpec(master_seed=3), block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 1.0, _se(batch))

    def test_finite_difference_is_exact_under_coupling(self, mm1_single, stream):
        batch = finite_difference(mm1_single, None, 100_000, 1e-3, stream, block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 1.0, _se(batch), k=3.0)


# ═══════════════════════════════════════════════════════════════════
# 2. CROSS-ESTIMATOR AGREEMENT
# ═══════════════════════════════════════════════════════════════════

class TestCrossAgreement:
    @pytest.fixture(scope="class")
    def fd_oracle(self, mm1_five):
        return finite_difference(mm1_five, None, 1_000_000, 1e-3, StreamSpec(master_seed=77, substream_index=9),
                                 block_size=BIG_BLOCK)

    @pytest.mark.parametrize("kind", [EstimatorKind.WD, EstimatorKind.ISWD, EstimatorKind.SF])
    def test_mm1_five_customers_agree_with_oracle(self, mm1_five, fd_oracle, kind):
        batch = run_estimator(kind, mm1_five, StreamSpec(master_seed=77, substream_index=1), n=100_000,
                              block_size=BIG_BLOCK)
        assert _overlap(batch, fd_oracle)

    def test_bridge_network_agrees_with_oracle(self, bridge):
        oracle = finite_difference(bridge, None, 200_000, None, StreamSpec(master_seed=8, substream_index=5),
                                   block_size=BIG_BLOCK)
        for ordinal, kind in enumerate((EstimatorKind.WD, EstimatorKind.ISWD, EstimatorKind.SF)):
            batch = run_estimator(kind, bridge, StreamSpec(master_seed=8, substream_index=ordinal), n=100_000,
                                  block_size=BIG_BLOCK)
            assert _overlap(batch, oracle), kind


# ═══════════════════════════════════════════════════════════════════
# 3. ISWD ≡ SCORE FUNCTION
# ═══════════════════════════════════════════════════════════════════

class TestIswdMatchesScoreFunction:
    def test_per_replication_equality(self):
        spec = mm1_spec(10)
        stream = StreamSpec(master_seed=123)
        a = iswd(spec, None, 1000, stream)
        b = score_function(spec, None, 1000, stream)
        np.testing.assert_allclose(a.samples, b.samples, rtol=1e-10, atol=1e-10)

    def test_weights_reject_zero_density_coordinate(self):
        spec = mm1_spec(2)
        x = np.array([[1.0, -1.0, 1.0, 1.0]])
        with pytest.raises(SupportViolationError, match="coordinate 1"):
            iswd_weights(spec, spec.input_distributions, x)


# ═══════════════════════════════════════════════════════════════════
# 4. COST ACCOUNTING
# ═══════════════════════════════════════════════════════════════════

class TestModelEvaluations:
    @pytest.mark.parametrize(
        "kind, expected",
        [(EstimatorKind.WD, 1000), (EstimatorKind.ISWD, 100), (EstimatorKind.SF, 100), (EstimatorKind.FD, 200)],
    )
    def test_counts_for_five_customers(self, mm1_five, stream, kind, expected):
        batch = run_estimator(kind, mm1_five, stream, n=100)
        assert batch.model_evaluations == expected
        assert batch.n == 100

    def test_wd_wall_time_exceeds_iswd_tenfold(self):
        spec = mm1_spec(100)
        stream = StreamSpec(master_seed=31)
        wd = wd_classical(spec, None, 10_000, stream)
        fast = iswd(spec, None, 10_000, stream)
        assert wd.model_evaluations == 200 * 10_000
        assert fast.model_evaluations == 10_000
        assert wd.wall_time / fast.wall_time > 10.0

    def test_batch_metadata(self, mm1_five, stream):
        batch = iswd(mm1_five, None, 10, stream)
        assert batch.estimator_name == "iswd"
        assert batch.model_name == "mm1"
        assert batch.n_customers == 5
        assert batch.theta == 1.0
        assert batch.config_fingerprint == mm1_five.fingerprint()


# ═══════════════════════════════════════════════════════════════════
# 5. TOY MODELS
# ═══════════════════════════════════════════════════════════════════

class TestToyModels:
    def test_constant_model_score_has_zero_mean(self, constant_model, stream):
        batch = score_function(constant_model, None, 200_000, stream, block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 0.0, _se(batch))

    def test_constant_model_iswd_has_zero_mean(self, constant_model, stream):
        batch = iswd(constant_model, None, 200_000, stream, block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 0.0, _se(batch), k=3.0)

    def test_constant_model_wd_is_exactly_zero(self, constant_model, stream):
        batch = wd_classical(constant_model, None, 1000, stream)
        assert np.all(batch.samples == 0.0)

    def test_sum_model_fd(self, sum_model, stream):
        batch = finite_difference(sum_model, None, 100_000, 1e-3, stream, block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 3.0, _se(batch), k=3.0)

    @pytest.mark.parametrize("estimator", [wd_classical, iswd])
    def test_sum_model_weak_derivative(self, sum_model, stream, estimator):
        batch = estimator(sum_model, None, 100_000, stream, block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 3.0, _se(batch))

    def test_gaussian_inputs_weak_derivative(self, stream):
        # d/dθ E[Σ Xᵢ] = 2 for two Gaussian(θ, 1) inputs; signs are allowed here.
        model = SumModel([Gaussian(mean=0.5, stddev=1.0)] * 2)
        for estimator in (wd_classical, iswd):
            batch = estimator(model, None, 100_000, stream, block_size=BIG_BLOCK)
            assert within_se(batch.samples.mean(), 2.0, _se(batch))


# ═══════════════════════════════════════════════════════════════════
# 6. REPLICATION ENGINE
# ═══════════════════════════════════════════════════════════════════

class TestReplicationEngine:
    def test_serial_and_threaded_identical(self, mm1_five, stream):
        serial = iswd(mm1_five, None, 5000, stream, block_size=500, workers=1)
        threaded = iswd(mm1_five, None, 5000, stream, block_size=500, workers=4)
        np.testing.assert_array_equal(serial.samples, threaded.samples)

    def test_fixed_n_is_deterministic(self, mm1_five, stream):
        a = wd_classical(mm1_five, None, 2500, stream, block_size=1000)
        b = wd_classical(mm1_five, None, 2500, stream, block_size=1000)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.n == 2500

    def test_time_budget_run_is_prefix_of_fixed_n(self, mm1_five, stream):
        budgeted = iswd(mm1_five, None, None, stream, time_budget_s=0.05, block_size=1000)
        assert budgeted.n >= 1
        fixed = iswd(mm1_five, None, budgeted.n, stream, block_size=1000)
        np.testing.assert_array_equal(budgeted.samples, fixed.samples)

    @pytest.mark.parametrize("block_size", [1, 7, 500, 5000])
    def test_samples_do_not_depend_on_block_size(self, mm1_five, stream, block_size):
        reference = wd_classical(mm1_five, None, 5000, stream, block_size=1000)
        other = wd_classical(mm1_five, None, 5000, stream, block_size=block_size)
        np.testing.assert_array_equal(reference.samples, other.samples)

    def test_block_size_setting_does_not_change_samples(self, mm1_five, monkeypatch):
        seeded = StreamSpec(master_seed=42)
        default = iswd(mm1_five, None, 2000, seeded)
        monkeypatch.setenv("WEAKGRAD_BLOCK_SIZE", "500")
        get_settings.cache_clear()
        np.testing.assert_array_equal(iswd(mm1_five, None, 2000, seeded).samples, default.samples)

    def test_expensive_budget_overshoots_by_at_most_one_replication(self):
        spec = mm1_spec(200)
        seeded = StreamSpec(master_seed=5)
        one_replication = wd_classical(spec, None, 1, seeded).wall_time
        budget = 0.5
        budgeted = wd_classical(spec, None, None, seeded, time_budget_s=budget, block_size=1000)
        assert budgeted.wall_time <= budget + one_replication + 0.25
        prefix = wd_classical(spec, None, budgeted.n, seeded, block_size=1000)
        np.testing.assert_array_equal(budgeted.samples, prefix.samples)

    def test_budgeted_run_warns_that_workers_are_ignored(self, mm1_five, stream, caplog):
        with caplog.at_level(logging.WARNING, logger="weakgrad.estimators.base"):
            iswd(mm1_five, None, None, stream, time_budget_s=0.01, workers=4)
        assert "ignoring workers=4" in caplog.text

    def test_budget_and_n_are_exclusive(self, mm1_five, stream):
        with pytest.raises(ParameterError):
            iswd(mm1_five, None, 100, stream, time_budget_s=1.0)
        with pytest.raises(ParameterError):
            iswd(mm1_five, None, None, stream)

    def test_env_length_checked(self, mm1_five, stream):
        with pytest.raises(ShapeError):
            iswd(mm1_five, [Exponential(mean=1.0)], 10, stream)


# ═══════════════════════════════════════════════════════════════════
# 7. FINITE-DIFFERENCE STEP
# ═══════════════════════════════════════════════════════════════════

class TestFiniteDifferenceStep:
    @pytest.mark.parametrize("h", [0.0, -1e-3])
    def test_non_positive_step(self, mm1_single, stream, h):
        with pytest.raises(ParameterError):
            finite_difference(mm1_single, None, 10, h, stream)

    def test_step_leaving_parameter_range(self, stream):
        with pytest.raises(ParameterError):
            finite_difference(mm1_spec(1, service_mean=0.01), None, 10, 0.5, stream)

    def test_default_step_stays_inside_positive_range(self):
        assert default_fd_step(0.0005, positive=True) == pytest.approx(0.00025)
        assert default_fd_step(5.0, positive=True) == pytest.approx(0.005)
        assert default_fd_step(-5.0) == pytest.approx(0.005)

    def test_tiny_mean_runs_with_default_step(self, stream):
        spec = mm1_spec(1, service_mean=0.0005)
        batch = finite_difference(spec, None, 100_000, None, stream, block_size=BIG_BLOCK)
        assert within_se(batch.samples.mean(), 1.0, _se(batch))


# ═══════════════════════════════════════════════════════════════════
# 8. DISPATCH & COMBINATIONS
# ═══════════════════════════════════════════════════════════════════

class TestDispatch:
    def test_registry_covers_every_kind(self):
        assert set(ESTIMATORS) == set(EstimatorKind)

    def test_dispatch_by_name(self, mm1_five, stream):
        assert run_estimator("sf", mm1_five, stream, n=10).estimator_name == "sf"

    def test_weibull_service_unsupported(self, stream):
        spec = mm1_spec(2, service_dist=Weibull(rate=1.0))
        with pytest.raises(UnsupportedCombinationError):
            check_combination(EstimatorKind.WD, spec)
        with pytest.raises(UnsupportedCombinationError):
            run_estimator("fd", spec, stream, n=10)

    def test_direct_wd_call_propagates_missing_decomposition(self, stream):
        spec = mm1_spec(2, service_dist=Weibull(rate=1.0))
        with pytest.raises(NotImplementedError):
            wd_classical(spec, None, 10, stream)

    def test_negative_support_unsupported(self):
        spec = mm1_spec(2, service_dist=Gaussian(mean=1.0, stddev=1.0))
        with pytest.raises(UnsupportedCombinationError):
            check_combination(EstimatorKind.SF, spec)


# ═══════════════════════════════════════════════════════════════════
# 9. PLAIN IMPORTANCE SAMPLING
# ═══════════════════════════════════════════════════════════════════

class TestImportanceSamplingMean:
    def test_estimates_nominal_mean(self):
        batch = importance_sampling_mean(
            lambda x: x, Exponential(mean=1.0), Exponential(mean=2.0), 200_000, StreamSpec(master_seed=17)
        )
        assert batch.estimator_name == "importance_sampling"
        assert within_se(batch.samples.mean(), 1.0, _se(batch))

    def test_proposal_must_cover_nominal(self):
        with pytest.raises(SupportViolationError):
            importance_sampling_mean(
                lambda x: x, Exponential(mean=1.0), Weibull(rate=1.0, loc=1.0), 100, StreamSpec(master_seed=1)
            )

    def test_heavier_tailed_proposal(self):
        batch = importance_sampling_mean(
            lambda x: np.ones_like(x), Exponential(mean=1.0), Gamma(shape=1.0, scale=3.0), 200_000,
            StreamSpec(master_seed=18),
        )
        assert within_se(batch.samples.mean(), 1.0, _se(batch))
