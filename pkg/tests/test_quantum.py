import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_qubit_observable, random_state, random_unit3
from qcycle.errors import PreconditionError
from qcycle.linalg import (
    SIGMA_X,
    SIGMA_Z,
    bloch_observable,
    commutator_norm,
    identity,
    kron,
    max_abs,
    maximally_mixed,
    observable_from_matrix,
    pure_state,
)
from qcycle.quantum import (
    anticommutator_correlation,
    build,
    chained_configuration,
    contextual_correlations,
    contextual_kcbs_configuration,
    correlation_joint,
    correlation_sequential,
    correlation_spatial,
    heisenberg_observable,
    perfect_pair_values,
    repeat_agreement_probability,
    spatial_correlations,
    spatial_kcbs_configuration,
    temporal_correlations,
    temporal_correlations_schrodinger,
    temporal_kcbs_protocol,
    temporal_singles,
)
from qcycle.scenario import (
    BipartiteConfig,
    TemporalProtocol,
    classical_bound,
    inequality_lhs,
)

FIVE_CYCLE_OPTIMUM = -5.0 * math.cos(math.pi / 5.0)  # -4.045084971874737
CONTEXTUAL_OPTIMUM = 5.0 - 4.0 * math.sqrt(5.0)  # -3.944271909999159


def xz_observable(angle):
    return bloch_observable((math.sin(angle), 0.0, math.cos(angle)))


class TestCorrelationJoint:
    def test_self_correlation(self):
        z = observable_from_matrix(SIGMA_Z)
        assert correlation_joint(maximally_mixed(2), z, z) == pytest.approx(1.0, abs=1e-12)

    def test_product_observables_on_00(self):
        rho = pure_state([1, 0, 0, 0])
        za = observable_from_matrix(kron(SIGMA_Z, identity(2)))
        zb = observable_from_matrix(kron(identity(2), SIGMA_Z))
        assert correlation_joint(rho, za, zb) == pytest.approx(1.0, abs=1e-12)

    def test_pentagram_term(self):
        # By symmetry each adjacent term is one fifth of the total 5-4*sqrt(5).
        state, obs = contextual_kcbs_configuration()
        term = correlation_joint(state, obs[0], obs[1])
        assert term == pytest.approx(CONTEXTUAL_OPTIMUM / 5.0, abs=1e-12)

    def test_non_commuting_rejected(self):
        x = observable_from_matrix(SIGMA_X)
        z = observable_from_matrix(SIGMA_Z)
        with pytest.raises(PreconditionError):
            correlation_joint(maximally_mixed(2), x, z)


class TestCorrelationSequential:
    def test_repeated_measurement(self):
        z = observable_from_matrix(SIGMA_Z)
        value, table = correlation_sequential(maximally_mixed(2), z, z)
        assert value == pytest.approx(1.0, abs=1e-12)
        assert table.p_first[1] == pytest.approx(0.5, abs=1e-12)
        assert table.p_second_given_first[(1, 1)] == pytest.approx(1.0, abs=1e-12)

    def test_adjacent_time_pair(self):
        # The Heisenberg partner of sigma_z one time step into the five-time
        # protocol sits at Bloch angle 4*pi/5.
        z = observable_from_matrix(SIGMA_Z)
        partner = observable_from_matrix(
            math.cos(4 * math.pi / 5) * SIGMA_Z - math.sin(4 * math.pi / 5) * SIGMA_X
        )
        value, _ = correlation_sequential(maximally_mixed(2), z, partner)
        assert value == pytest.approx(math.cos(4 * math.pi / 5), abs=1e-12)

    def test_orthogonal_axes_give_zero(self):
        x = observable_from_matrix(SIGMA_X)
        z = observable_from_matrix(SIGMA_Z)
        value, table = correlation_sequential(pure_state([1, 0]), x, z)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert table.p_first[1] == pytest.approx(0.5, abs=1e-12)

    def test_dead_branch_contributes_zero(self):
        z = observable_from_matrix(SIGMA_Z)
        value, table = correlation_sequential(pure_state([1, 0]), z, z)
        assert value == pytest.approx(1.0, abs=1e-12)
        assert table.p_first[-1] == 0.0
        assert table.p_second_given_first[(1, -1)] == 0.0

    @given(seed=st.integers(0, 100_000))
    @settings(max_examples=100, deadline=None)
    def test_matches_anticommutator_formula(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_state(rng)
        x, y = random_qubit_observable(rng), random_qubit_observable(rng)
        seq, _ = correlation_sequential(rho, x, y)
        assert seq == pytest.approx(anticommutator_correlation(rho, x, y), abs=1e-10)

    @given(seed=st.integers(0, 100_000))
    @settings(max_examples=60, deadline=None)
    def test_order_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_state(rng)
        x, y = random_qubit_observable(rng), random_qubit_observable(rng)
        forward, _ = correlation_sequential(rho, x, y)
        backward, _ = correlation_sequential(rho, y, x)
        assert forward == pytest.approx(backward, abs=1e-10)

    def test_commuting_reduction(self):
        # Commuting pair: joint, sequential and symmetrized values coincide.
        state, obs = contextual_kcbs_configuration()
        joint = correlation_joint(state, obs[2], obs[3])
        seq, _ = correlation_sequential(state, obs[2], obs[3])
        anti = anticommutator_correlation(state, obs[2], obs[3])
        assert joint == pytest.approx(seq, abs=1e-10)
        assert joint == pytest.approx(anti, abs=1e-10)


class TestAnticommutatorCorrelation:
    @given(seed=st.integers(0, 100_000))
    @settings(max_examples=40, deadline=None)
    def test_equal_observables_give_one(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_state(rng)
        x = random_qubit_observable(rng)
        assert anticommutator_correlation(rho, x, x) == pytest.approx(1.0, abs=1e-12)

    @given(phi=st.floats(0, 2 * math.pi))
    @settings(max_examples=60, deadline=None)
    def test_rotated_pair_gives_cosine(self, phi):
        z = observable_from_matrix(SIGMA_Z)
        rotated = xz_observable(phi)
        value = anticommutator_correlation(maximally_mixed(2), z, rotated)
        assert value == pytest.approx(math.cos(phi), abs=1e-12)


class TestNonInvasiveness:
    def test_commuting_pairs_repeat_perfectly(self):
        state, obs = contextual_kcbs_configuration()
        for i in range(5):
            p = repeat_agreement_probability(state, obs[i], obs[(i + 1) % 5])
            assert p == pytest.approx(1.0, abs=1e-10)
        za = observable_from_matrix(kron(SIGMA_Z, identity(2)))
        zb = observable_from_matrix(kron(identity(2), SIGMA_Z))
        assert repeat_agreement_probability(
            pure_state([1, 0, 0, 0]), za, zb
        ) == pytest.approx(1.0, abs=1e-12)

    def test_non_commuting_pair_disturbs(self):
        x = observable_from_matrix(SIGMA_X)
        z = observable_from_matrix(SIGMA_Z)
        assert repeat_agreement_probability(maximally_mixed(2), z, x) < 1.0 - 1e-3


class TestTemporalProtocol:
    def test_protocol_fields(self):
        p = temporal_kcbs_protocol()
        assert max_abs(p.initial_state.matrix - identity(2) / 2) == 0.0
        assert p.axis == (0.0, 1.0, 0.0)
        assert p.angular_rate == pytest.approx(8 * math.pi / 5)
        assert p.times == (0.0, 0.25, 0.5, 0.75, 1.0)
        assert max_abs(p.measured.matrix - SIGMA_Z) == 0.0

    def test_adjacent_correlators(self):
        corr = temporal_correlations(temporal_kcbs_protocol())
        for value in corr.values:
            assert value == pytest.approx(-math.cos(math.pi / 5), abs=1e-12)
        assert inequality_lhs(corr) == pytest.approx(FIVE_CYCLE_OPTIMUM, abs=1e-12)

    def test_classical_bound_of_scenario(self):
        corr = temporal_correlations(temporal_kcbs_protocol())
        assert classical_bound(corr.scenario) == -3

    def test_schrodinger_oracle_agrees(self):
        p = temporal_kcbs_protocol()
        heisenberg = temporal_correlations(p)
        schrodinger = temporal_correlations_schrodinger(p)
        assert np.allclose(heisenberg.values, schrodinger.values, atol=1e-12)

    @given(seed=st.integers(0, 100_000))
    @settings(max_examples=40, deadline=None)
    def test_schrodinger_oracle_agrees_on_random_protocols(self, seed):
        rng = np.random.default_rng(seed)
        times = tuple(sorted(rng.uniform(0, 1, size=4)))
        if len(set(times)) < 4:
            return
        p = TemporalProtocol(
            initial_state=random_state(rng),
            axis=random_unit3(rng),
            angular_rate=rng.uniform(-10, 10),
            times=times,
            measured=random_qubit_observable(rng),
        )
        assert np.allclose(
            temporal_correlations(p).values,
            temporal_correlations_schrodinger(p).values,
            atol=1e-10,
        )

    def test_singles_unbiased(self):
        assert np.allclose(temporal_singles(temporal_kcbs_protocol()), 0.0, atol=1e-12)

    def test_times_must_increase(self):
        with pytest.raises(PreconditionError):
            TemporalProtocol(
                maximally_mixed(2),
                (0, 1, 0),
                1.0,
                (0.0, 0.5, 0.5),
                observable_from_matrix(SIGMA_Z),
            )


class TestContextualConfiguration:
    def test_matches_frozen_fixture(self):
        # Regression pins against convention drift: the first pentagram
        # observable and the axis state, stored in the debug dump format.
        from pathlib import Path

        from qcycle.linalg import format_matrix, parse_matrix

        data = Path(__file__).parent / "data"
        state, obs = contextual_kcbs_configuration()
        frozen = (data / "pentagram_x0.txt").read_text()
        assert format_matrix(obs[0].matrix) == frozen
        assert max_abs(parse_matrix(frozen) - obs[0].matrix) == 0.0
        assert format_matrix(state.matrix) == (data / "pentagram_state.txt").read_text()

    def test_adjacent_commutators_vanish(self):
        _, obs = contextual_kcbs_configuration()
        for i in range(5):
            assert commutator_norm(obs[i].matrix, obs[(i + 1) % 5].matrix) <= 1e-10

    def test_optimum(self):
        state, obs = contextual_kcbs_configuration()
        corr = contextual_correlations(state, obs)
        assert inequality_lhs(corr) == pytest.approx(CONTEXTUAL_OPTIMUM, abs=1e-12)

    def test_observables_square_to_identity(self):
        _, obs = contextual_kcbs_configuration()
        for x in obs:
            assert max_abs(x.matrix @ x.matrix - identity(3)) < 1e-12


class TestSpatialConfiguration:
    def test_perfect_correlations(self):
        cfg = spatial_kcbs_configuration()
        for value in perfect_pair_values(cfg):
            assert value == pytest.approx(1.0, abs=1e-12)

    def test_optimum_matches_temporal(self):
        corr = spatial_correlations(spatial_kcbs_configuration())
        assert inequality_lhs(corr) == pytest.approx(FIVE_CYCLE_OPTIMUM, abs=1e-12)
        assert classical_bound(corr.scenario) == -3

    def test_xz_settings_give_cosine(self):
        # <phi+| M(a) x M(b) |phi+> = cos(a - b); checked over a small grid.
        state = spatial_kcbs_configuration().state
        for a, b in ((0.3, 1.1), (2.0, 0.5), (4.0, 4.0)):
            cfg = BipartiteConfig(
                state, (xz_observable(a),), (xz_observable(b),), ((0, 0, 1),)
            )
            assert correlation_spatial(cfg, 0, 0) == pytest.approx(
                math.cos(a - b), abs=1e-12
            )

    def test_orthogonal_settings_uncorrelated(self):
        state = spatial_kcbs_configuration().state
        cfg = BipartiteConfig(
            state,
            (observable_from_matrix(SIGMA_Z),),
            (observable_from_matrix(SIGMA_X),),
            ((0, 0, 1),),
        )
        assert correlation_spatial(cfg, 0, 0) == pytest.approx(0.0, abs=1e-12)

    def test_index_out_of_range(self):
        cfg = spatial_kcbs_configuration()
        with pytest.raises(PreconditionError):
            correlation_spatial(cfg, 0, 5)

    def test_tsirelson_equivalence_entrywise(self):
        # The full 5x5 temporal correlator matrix equals the spatial one.
        protocol = temporal_kcbs_protocol()
        obs = [heisenberg_observable(protocol, t) for t in protocol.times]
        cfg = spatial_kcbs_configuration()
        for i in range(5):
            for j in range(5):
                temporal = anticommutator_correlation(
                    protocol.initial_state, obs[i], obs[j]
                )
                spatial = correlation_spatial(cfg, i, j)
                assert abs(temporal - spatial) <= 1e-10


class TestChainedConfiguration:
    @pytest.mark.parametrize(
        "n,bound", [(3, -1), (4, -2), (5, -3)]
    )
    def test_small_cycles(self, n, bound):
        cfg = chained_configuration(n)
        corr = spatial_correlations(cfg)
        assert inequality_lhs(corr) == pytest.approx(
            n * math.cos(math.pi * (n - 1) / n), abs=1e-12
        )
        assert classical_bound(corr.scenario) == bound

    @pytest.mark.parametrize("n", range(3, 16))
    def test_closed_form_both_parities(self, n):
        # The printed odd-n settings do reach n*cos(pi*(n-1)/n) exactly,
        # m = 0 forcing the first setting to the z-axis notwithstanding.
        corr = spatial_correlations(chained_configuration(n))
        assert inequality_lhs(corr) == pytest.approx(
            n * math.cos(math.pi * (n - 1) / n), abs=1e-9
        )

    @pytest.mark.parametrize("n", (3, 5, 7, 9))
    def test_odd_perfect_correlations(self, n):
        for value in perfect_pair_values(chained_configuration(n)):
            assert value == pytest.approx(1.0, abs=1e-10)

    def test_too_small_rejected(self):
        with pytest.raises(PreconditionError):
            chained_configuration(2)


class TestBuilders:
    def test_unknown_builder_rejected(self):
        with pytest.raises(PreconditionError):
            build("kcbs-imaginary")

    def test_temporal_result(self):
        result = build("kcbs-temporal")
        assert inequality_lhs(result.correlations) == pytest.approx(
            FIVE_CYCLE_OPTIMUM, abs=1e-12
        )
        assert np.allclose(result.singles, 0.0, atol=1e-12)

    def test_contextual_singles(self):
        # <X_j> = 2 cos^2(theta) - 1 = 2/sqrt(5) - 1 on the axis state.
        result = build("kcbs-contextual")
        expected = 2.0 / math.sqrt(5.0) - 1.0
        assert np.allclose(result.singles, expected, atol=1e-12)
        assert result.adjacent_commutator_norms is not None
        assert max(result.adjacent_commutator_norms) <= 1e-10

    def test_spatial_result(self):
        result = build("kcbs-spatial")
        assert result.perfect_pairs is not None
        assert np.allclose(result.perfect_pairs, 1.0, atol=1e-12)
        assert np.allclose(result.singles, 0.0, atol=1e-12)

    @pytest.mark.parametrize("n", (4, 7))
    def test_chained_singles_unbiased(self, n):
        result = build(f"chained-{n}")
        assert np.allclose(result.singles, 0.0, atol=1e-12)
