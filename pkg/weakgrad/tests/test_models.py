"""Tests for the M/M/1 and bridge-SAN performance maps."""

from __future__ import annotations

import networkx as nx
import numpy as np
import pytest

from weakgrad.core.distributions import Exponential, Gamma
from weakgrad.core.models import (
    InputVector,
    SANSpec,
    evaluate,
    mm1_spec,
    san_bridge_spec,
    substitute,
)
from weakgrad.core.rng_streams import StreamSpec, make_stream
from weakgrad.errors import DomainError, InputIndexError, ParameterError, ShapeError


# ═══════════════════════════════════════════════════════════════════
# 1. M/M/1 LINDLEY RECURSION
# ═══════════════════════════════════════════════════════════════════

class TestQueueEvaluate:
    def test_first_customer_is_its_service_time(self):
        assert evaluate(mm1_spec(1), InputVector.from_queue([1.0], [0.5])) == pytest.approx(1.0)

    def test_second_customer_waits(self):
        assert evaluate(mm1_spec(2), InputVector.from_queue([1.0, 2.0], [0.5, 0.5])) == pytest.approx(2.5)

    def test_no_wait_when_arrival_is_late(self):
        assert evaluate(mm1_spec(2), InputVector.from_queue([1.0, 2.0], [0.5, 3.0])) == pytest.approx(2.0)

    def test_first_interarrival_is_ignored(self):
        spec = mm1_spec(3)
        a = evaluate(spec, InputVector.from_queue([1.0, 1.0, 1.0], [0.1, 0.5, 0.5]))
        b = evaluate(spec, InputVector.from_queue([1.0, 1.0, 1.0], [9.0, 0.5, 0.5]))
        assert a == b == pytest.approx(2.0)

    def test_batch_matches_single(self):
        spec = mm1_spec(4)
        batch = make_stream(StreamSpec(master_seed=5)).uniforms((20, 8)) * 3.0
        out = evaluate(spec, batch)
        assert out.shape == (20,)
        for row, value in zip(batch, out):
            assert evaluate(spec, row) == pytest.approx(value)

    @pytest.fixture(scope="class")
    def perturbations(self):
        rows = make_stream(StreamSpec(master_seed=6)).uniforms((1000, 10)) * 2.0
        deltas = make_stream(StreamSpec(master_seed=6, substream_index=1)).uniforms(1000) * 0.5
        return rows, deltas

    @pytest.mark.parametrize("coordinate", range(5))
    def test_longer_service_never_shortens_sojourn(self, perturbations, coordinate):
        spec = mm1_spec(5)
        rows, deltas = perturbations
        bumped = rows.copy()
        bumped[:, coordinate] += deltas
        assert np.all(evaluate(spec, bumped) >= evaluate(spec, rows))

    @pytest.mark.parametrize("coordinate", range(5, 10))
    def test_longer_interarrival_never_lengthens_sojourn(self, perturbations, coordinate):
        spec = mm1_spec(5)
        rows, deltas = perturbations
        bumped = rows.copy()
        bumped[:, coordinate] += deltas
        assert np.all(evaluate(spec, bumped) <= evaluate(spec, rows))

    def test_evaluate_does_not_mutate_input(self):
        spec = mm1_spec(3)
        x = np.array([1.0, 2.0, 3.0, 0.5, 0.5, 0.5])
        before = x.copy()
        evaluate(spec, x)
        np.testing.assert_array_equal(x, before)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            evaluate(mm1_spec(2), InputVector.from_durations([1.0, 2.0, 3.0]))

    def test_layout_and_sensitivity(self):
        spec = mm1_spec(3, service_mean=1.5)
        assert spec.dimension == 6
        assert spec.sensitive_inputs == (0, 1, 2)
        assert spec.theta == 1.5
        assert spec.n_customers == 3

    def test_rejects_zero_customers(self):
        with pytest.raises(ParameterError):
            mm1_spec(0)


# ═══════════════════════════════════════════════════════════════════
# 2. STOCHASTIC ACTIVITY NETWORK
# ═══════════════════════════════════════════════════════════════════

class TestBridgeNetwork:
    def test_unit_durations(self):
        assert evaluate(san_bridge_spec(), InputVector.from_durations([1, 1, 1, 1, 1])) == pytest.approx(3.0)

    @pytest.mark.parametrize(
        "durations, expected",
        [
            ([2.0, 1.0, 1.0, 5.0, 1.0], 7.0),   # a1 a4
            ([1.0, 6.0, 1.0, 1.0, 1.0], 7.0),   # a2 a5
            ([1.0, 1.0, 4.0, 1.0, 2.0], 7.0),   # a1 a3 a5
        ],
    )
    def test_longest_path(self, durations, expected):
        assert evaluate(san_bridge_spec(), durations) == pytest.approx(expected)

    @pytest.mark.parametrize("arc", range(5))
    def test_longer_arc_never_shortens_longest_path(self, arc):
        spec = san_bridge_spec()
        rows = make_stream(StreamSpec(master_seed=9)).uniforms((1000, 5)) * 3.0
        bumped = rows.copy()
        bumped[:, arc] += make_stream(StreamSpec(master_seed=9, substream_index=1)).uniforms(1000)
        assert np.all(evaluate(spec, bumped) >= evaluate(spec, rows))

    def test_every_arc_sensitive(self):
        spec = san_bridge_spec(arc_dist=Gamma(shape=2.0, scale=0.5))
        assert spec.sensitive_inputs == (0, 1, 2, 3, 4)
        assert spec.n_customers is None
        assert spec.theta == 0.5

    def test_rejects_cycle(self):
        graph = nx.DiGraph()
        graph.add_edge("s", "a", index=0)
        graph.add_edge("a", "s", index=1)
        with pytest.raises(ParameterError):
            SANSpec(graph, [Exponential(mean=1.0)] * 2)

    def test_rejects_bad_indices(self):
        graph = nx.DiGraph()
        graph.add_edge("s", "a", index=0)
        graph.add_edge("a", "t", index=2)
        with pytest.raises(ParameterError):
            SANSpec(graph, [Exponential(mean=1.0)] * 2)

    def test_rejects_wrong_distribution_count(self):
        graph = nx.DiGraph()
        graph.add_edge("s", "t", index=0)
        with pytest.raises(ShapeError):
            SANSpec(graph, [Exponential(mean=1.0)] * 2)


# ═══════════════════════════════════════════════════════════════════
# 3. INPUT VECTORS & SUBSTITUTION
# ═══════════════════════════════════════════════════════════════════

class TestInputVector:
    def test_read_only(self):
        x = InputVector.from_durations([1.0, 2.0])
        with pytest.raises(ValueError):
            x.values[0] = 5.0

    def test_rejects_non_positive(self):
        with pytest.raises(DomainError):
            InputVector.from_durations([1.0, 0.0])

    def test_rejects_unequal_queue_lists(self):
        with pytest.raises(ShapeError):
            InputVector.from_queue([1.0, 2.0], [1.0])

    def test_equality_by_value(self):
        assert InputVector.from_durations([1, 2]) == InputVector.from_durations([1.0, 2.0])
        assert len({InputVector.from_durations([1, 2]), InputVector.from_durations([1, 2])}) == 1


class TestSubstitute:
    def test_replaces_one_coordinate(self):
        x = InputVector.from_durations([1, 2, 3])
        assert substitute(x, 1, 9.0) == InputVector.from_durations([1, 9, 3])
        assert x == InputVector.from_durations([1, 2, 3])

    def test_substitute_back_restores(self):
        x = InputVector.from_durations([1, 2, 3])
        assert substitute(substitute(x, 1, 9.0), 1, 2.0) == x

    def test_batch_column(self):
        batch = np.ones((4, 3))
        out = substitute(batch, 2, np.array([2.0, 3.0, 4.0, 5.0]))
        np.testing.assert_array_equal(out[:, 2], [2.0, 3.0, 4.0, 5.0])
        np.testing.assert_array_equal(batch, np.ones((4, 3)))

    @pytest.mark.parametrize("index", [-1, 3])
    def test_index_out_of_range(self, index):
        with pytest.raises(InputIndexError):
            substitute(InputVector.from_durations([1, 2, 3]), index, 1.0)

    def test_non_sensitive_index_with_spec(self):
        spec = mm1_spec(2)
        with pytest.raises(InputIndexError):
            substitute(InputVector.from_queue([1, 1], [1, 1]), 2, 1.0, spec=spec)

    def test_non_positive_value(self):
        with pytest.raises(DomainError):
            substitute(InputVector.from_durations([1, 2, 3]), 0, -1.0)


# ═══════════════════════════════════════════════════════════════════
# 4. PROVENANCE
# ═══════════════════════════════════════════════════════════════════

class TestFingerprint:
    def test_stable(self):
        assert mm1_spec(5).fingerprint() == mm1_spec(5).fingerprint()

    def test_depends_on_distributions(self):
        assert mm1_spec(5, service_mean=1.0).fingerprint() != mm1_spec(5, service_mean=2.0).fingerprint()
        assert mm1_spec(5).fingerprint() != mm1_spec(6).fingerprint()

    def test_describe_lists_distributions(self):
        described = san_bridge_spec().describe()
        assert described["model"] == "san_bridge"
        assert described["distributions"][0] == {"family": "exponential", "mean": 1.0}
