import math

import numpy as np
import pytest

from qcycle.errors import PreconditionError
from qcycle.quantum import build
from qcycle.scenario import canonical_scenario, inequality_lhs
from qcycle.search import (
    SearchSpace,
    bloch_angles_evaluator,
    contextual_cone_evaluator,
    contextual_cone_vectors,
    default_space_and_evaluator,
    minimize_lhs,
    nelder_mead,
    scan_chained,
    scan_seeds,
    temporal_times_evaluator,
    temporal_times_space,
)

FIVE_CYCLE_OPTIMUM = -5.0 * math.cos(math.pi / 5.0)
CONTEXTUAL_OPTIMUM = 5.0 - 4.0 * math.sqrt(5.0)
PENTAGRAM_HALF_ANGLE = math.acos(math.sqrt(1.0 / math.sqrt(5.0)))


class TestSearchSpace:
    def test_dimension_must_match_bounds(self):
        with pytest.raises(PreconditionError):
            SearchSpace("temporal-times", 3, ((0.0, 1.0),) * 2)

    def test_unknown_kind_rejected(self):
        with pytest.raises(PreconditionError):
            SearchSpace("annealing", 2, ((0.0, 1.0),) * 2)

    def test_contextual_cone_is_two_dimensional(self):
        with pytest.raises(PreconditionError):
            SearchSpace("contextual-cone", 3, ((0.0, 1.0),) * 3)


class TestEvaluators:
    def test_temporal_matches_builder_at_protocol_times(self):
        c = temporal_times_evaluator(np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
        builder = build("kcbs-temporal").correlations
        assert np.allclose(c.values, builder.values, atol=1e-12)

    def test_bloch_matches_spatial_builder(self):
        # The builder settings sit at Bloch angles -4*pi*i/5.
        angles = np.array([-4 * math.pi * i / 5 for i in range(5)])
        c = bloch_angles_evaluator(angles)
        builder = build("kcbs-spatial").correlations
        assert np.allclose(c.values, builder.values, atol=1e-12)

    def test_contextual_matches_builder_at_pentagram(self):
        c = contextual_cone_evaluator(np.array([PENTAGRAM_HALF_ANGLE, 0.0]))
        builder = build("kcbs-contextual").correlations
        assert np.allclose(c.values, builder.values, atol=1e-12)

    @pytest.mark.parametrize("theta", np.linspace(math.pi / 4, 3 * math.pi / 4, 9))
    def test_cone_cycle_always_compatible(self, theta):
        # Adjacent vectors stay exactly orthogonal across the whole box, so
        # every evaluated point is a valid compatible cycle.
        vs = contextual_cone_vectors(theta)
        assert np.allclose(np.linalg.norm(vs, axis=1), 1.0, atol=1e-12)
        for i in range(5):
            assert abs(np.dot(vs[i], vs[(i + 1) % 5])) < 1e-10

    def test_cone_degenerate_closure(self):
        # cos^2 = 1/3 makes the fourth vector coincide with the first; the
        # completion must still return a valid orthogonal closure.
        theta = math.acos(1.0 / math.sqrt(3.0))
        vs = contextual_cone_vectors(theta)
        for i in range(5):
            assert abs(np.dot(vs[i], vs[(i + 1) % 5])) < 1e-10

    def test_cone_values_in_range(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            params = rng.uniform((math.pi / 4, 0.0), (3 * math.pi / 4, math.pi))
            c = contextual_cone_evaluator(params)
            assert all(-1 - 1e-12 <= v <= 1 + 1e-12 for v in c.values)


class TestNelderMead:
    def test_quadratic_bowl(self):
        x, value = nelder_mead(
            lambda p: float(np.sum((p - 1.5) ** 2)), np.zeros(3), np.full(3, 0.5)
        )
        assert value < 1e-12
        assert np.allclose(x, 1.5, atol=1e-5)


class TestMinimizeLhs:
    def test_monotone_improvement(self):
        # The result never exceeds any seeded start evaluation.
        space, evaluator = default_space_and_evaluator("contextual-cone")
        scenario = canonical_scenario(5)
        _, value = minimize_lhs(space, scenario, evaluator, seed=4, starts=16)
        rng = np.random.default_rng(4)
        lows = np.array([lo for lo, _ in space.bounds])
        highs = np.array([hi for _, hi in space.bounds])
        for _ in range(16):
            start = rng.uniform(lows, highs)
            assert value <= inequality_lhs(evaluator(start)) + 1e-12

    def test_deterministic_given_seed(self):
        space, evaluator = default_space_and_evaluator("contextual-cone")
        scenario = canonical_scenario(5)
        a = minimize_lhs(space, scenario, evaluator, seed=2, starts=16)
        b = minimize_lhs(space, scenario, evaluator, seed=2, starts=16)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_seed_stability_contextual(self):
        space, evaluator = default_space_and_evaluator("contextual-cone")
        scenario = canonical_scenario(5)
        values = [
            minimize_lhs(space, scenario, evaluator, seed=s, starts=32)[1]
            for s in range(3)
        ]
        assert max(values) - min(values) < 1e-6
        assert values[0] == pytest.approx(CONTEXTUAL_OPTIMUM, abs=1e-6)

    def test_temporal_recovery(self):
        space, evaluator = default_space_and_evaluator("temporal-times")
        _, value = minimize_lhs(space, canonical_scenario(5), evaluator, seed=0, starts=32)
        assert value == pytest.approx(FIVE_CYCLE_OPTIMUM, abs=1e-6)

    def test_bloch_recovery(self):
        space, evaluator = default_space_and_evaluator("bloch-angles")
        _, value = minimize_lhs(space, canonical_scenario(5), evaluator, seed=0, starts=32)
        assert value == pytest.approx(FIVE_CYCLE_OPTIMUM, abs=1e-6)

    def test_setting_ordering_of_the_three_tests(self):
        # temporal (-4.045) < contextual (-3.944) < classical (-3).
        space_t, ev_t = default_space_and_evaluator("temporal-times")
        space_c, ev_c = default_space_and_evaluator("contextual-cone")
        scenario = canonical_scenario(5)
        _, temporal = minimize_lhs(space_t, scenario, ev_t, seed=1, starts=32)
        _, contextual = minimize_lhs(space_c, scenario, ev_c, seed=1, starts=32)
        assert abs(temporal - FIVE_CYCLE_OPTIMUM) < 1e-4
        assert abs(contextual - CONTEXTUAL_OPTIMUM) < 1e-4
        assert temporal < contextual < -3.0

    def test_mismatched_scenario_rejected(self):
        space = temporal_times_space(5)
        with pytest.raises(PreconditionError):
            minimize_lhs(space, canonical_scenario(4), temporal_times_evaluator, starts=2)


class TestScans:
    def test_chained_rows_match_closed_form(self):
        rows = scan_chained(3, 8)
        assert len(rows) == 6
        for n, lhs, bound in rows:
            assert lhs == pytest.approx(n * math.cos(math.pi * (n - 1) / n), abs=1e-9)
            assert bound == -n + 2

    def test_seed_rows(self):
        rows = scan_seeds("contextual-cone", range(2), starts=16)
        assert [seed for seed, _, _ in rows] == [0, 1]
        for _, value, bound in rows:
            assert value == pytest.approx(CONTEXTUAL_OPTIMUM, abs=1e-6)
            assert bound == -3
