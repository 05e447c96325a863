import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from randent.errors import DomainError, ShapeError
from randent.haar import RngStream, haar_state, haar_vector, random_subspace
from randent.protocols import (
    bipartite_cuts_scan,
    distill_random_measurement,
    encoding_unitary,
    nontrivial_cuts,
    outcome_distribution,
    reduced_ef_probe,
    sdc_fidelity_formula,
    sdc_rate_check,
    sdc_send,
)
from randent.optimize import OptimizerOptions
from randent.states import (
    BipartiteShape,
    PureState,
    batch_entanglement_entropy,
    bell_state,
    ghz_state,
    maximally_entangled,
    schmidt,
)

from conftest import product

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class TestSdc:
    def test_maximally_entangled_input(self):
        for dims in [(2, 2), (3, 5), (4, 4)]:
            shape = BipartiteShape(*dims)
            assert sdc_send(maximally_entangled(shape), shape).fidelity == pytest.approx(1.0, abs=1e-12)

    def test_product_input(self, qubits):
        out = sdc_send(product([1, 0], [0, 1]), qubits)
        assert out.fidelity == pytest.approx(0.5, abs=1e-12)
        assert out.qubits_sent == 1.0 and out.ebits_consumed == 1.0
        assert out.input_entanglement_bits == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(da=st.integers(2, 4), extra=st.integers(0, 3), seed=st.integers(0, 2**32 - 1))
    def test_simulation_matches_formula(self, da, extra, seed):
        shape = BipartiteShape(da, da + extra)
        state = haar_state(shape.dims, RngStream(seed))
        expected = sdc_fidelity_formula(schmidt(state, shape).spectrum, da)
        assert sdc_send(state, shape).fidelity == pytest.approx(expected, abs=1e-10)

    def test_encoding_is_unitary(self):
        shape = BipartiteShape(3, 5)
        u = encoding_unitary(haar_state(shape.dims, RngStream(1)), shape)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)

    def test_fidelity_floor_from_entanglement(self):
        # (sum sqrt(l))^2 = 2^{H_1/2} >= 2^{H}, so F >= 2^{S - log2 d_a}
        shape = BipartiteShape(8, 8)
        sub = random_subspace(shape, 2, RngStream(2))
        for i in range(200):
            out = sdc_send(sub.embed(haar_vector(2, RngStream(3, i))), shape)
            assert out.fidelity >= 2 ** (out.input_entanglement_bits - 3) - 1e-12

    def test_dims_mismatch(self):
        with pytest.raises(ShapeError):
            sdc_send(bell_state(), BipartiteShape(2, 3))


class TestRateCheck:
    def test_product_sample(self):
        states = [PureState.basis((i % 4, 0), (4, 3)) for i in range(5)]
        rc = sdc_rate_check(4, states)
        assert rc.rates.qubits == pytest.approx(1.0) and rc.rates.ebits == pytest.approx(1.0)
        assert rc.pure_corner == rc.rates

    def test_maximally_entangled_sample(self):
        rc = sdc_rate_check(4, [maximally_entangled(BipartiteShape(4, 4))])
        assert rc.rates.qubits == pytest.approx(0.0, abs=1e-12)
        assert rc.rates.ebits == pytest.approx(2.0, abs=1e-12)

    def test_mixed_sample(self):
        states = [haar_state((4, 6), RngStream(4, i)) for i in range(20)]
        rc = sdc_rate_check(4, states)
        assert 0 < rc.rates.qubits < 1.0
        assert rc.sum_rule_error <= 1e-12

    def test_factor_mismatch(self):
        with pytest.raises(ShapeError):
            sdc_rate_check(3, [bell_state()])
        with pytest.raises(DomainError):
            sdc_rate_check(3, [])


class TestDistill:
    def test_ghz_x_basis(self):
        ghz = ghz_state(3)
        probs, cond = outcome_distribution(ghz, (0, 1), [HADAMARD])
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-14)
        for k in range(2):
            out = distill_random_measurement(ghz, (0, 1), RngStream(5, k), bases=[HADAMARD])
            assert out.entanglement_bits == pytest.approx(1.0, abs=1e-12)

    def test_product_state(self):
        st0 = PureState.basis((0, 0, 0), (2, 2, 2))
        for i in range(5):
            assert distill_random_measurement(st0, rng=RngStream(6, i)).entanglement_bits == pytest.approx(0.0, abs=1e-12)

    def test_outcome_probabilities_sum_to_one(self):
        for i in range(10):
            state = haar_state((2, 2, 2), RngStream(7, i))
            bases = [np.linalg.qr(np.random.default_rng(i).standard_normal((2, 2)))[0]]
            probs, _ = outcome_distribution(state, (0, 2), bases)
            assert probs.sum() == pytest.approx(1.0, abs=1e-10)

    def test_four_parties(self):
        out = distill_random_measurement(haar_state((2, 2, 2, 2), RngStream(8)), (1, 3), RngStream(9))
        assert len(out.outcome_indices) == 2
        assert out.conditional_state.dims == (2, 2)
        assert 0 <= out.entanglement_bits <= 1 + 1e-12

    def test_zero_probability_outcomes_redrawn(self):
        # measuring party 2 of |000> in the computational basis: outcome 1 has probability 0
        st0 = PureState.basis((0, 0, 0), (2, 2, 2))
        for i in range(20):
            out = distill_random_measurement(st0, rng=RngStream(10, i), bases=[np.eye(2)])
            assert out.outcome_indices == (0,)
            assert out.outcome_probability == pytest.approx(1.0)

    def test_conditional_state_is_haar(self):
        n = 2000
        got = [
            distill_random_measurement(haar_state((3, 3, 3), RngStream(11, i)), rng=RngStream(12, i)).entanglement_bits
            for i in range(n)
        ]
        direct = batch_entanglement_entropy(np.array([haar_vector(9, RngStream(13, i)) for i in range(n)]), BipartiteShape(3, 3))
        assert stats.ks_2samp(got, direct).pvalue > 0.01

    @pytest.mark.parametrize("keep", [(0, 0), (0, 3)])
    def test_bad_keep(self, keep):
        with pytest.raises(DomainError):
            distill_random_measurement(ghz_state(3), keep, RngStream(0))

    def test_needs_three_parties(self):
        with pytest.raises(DomainError):
            distill_random_measurement(bell_state(), (0, 1), RngStream(0))


class TestCuts:
    def test_count(self):
        for n in range(2, 7):
            assert len(nontrivial_cuts(n)) == 2 ** (n - 1) - 1

    def test_ghz(self):
        assert all(c.entropy_bits == pytest.approx(1.0, abs=1e-12) for c in bipartite_cuts_scan(ghz_state(4)))

    def test_product(self):
        st0 = PureState.basis((0, 1, 0, 1), (2, 2, 2, 2))
        assert all(abs(c.entropy_bits) < 1e-12 for c in bipartite_cuts_scan(st0))

    def test_complement_symmetry(self):
        from randent.states import subset_entropy

        state = haar_state((2, 3, 2, 2), RngStream(14))
        for c in bipartite_cuts_scan(state):
            assert c.entropy_bits == pytest.approx(subset_entropy(state, c.complement), abs=1e-8)

    def test_haar_means_above_bound(self):
        scans = [bipartite_cuts_scan(haar_state((2,) * 4, RngStream(15, i))) for i in range(1000)]
        for j, cut in enumerate(scans[0]):
            mean = np.mean([s[j].entropy_bits for s in scans])
            assert mean >= cut.page_bound


class TestReducedProbe:
    OPTS = OptimizerOptions(restarts=6)

    def test_single_party_rejected(self):
        with pytest.raises(DomainError):
            reduced_ef_probe(3, 2, 1, trials=1)

    def test_qutrits_majority_positive(self):
        probe = reduced_ef_probe(3, 3, 2, trials=6, rng=RngStream(16), options=self.OPTS, decomposition_samples=4)
        assert probe.split == (3, 3)
        assert all(r.rank == 3 for r in probe.rows)
        assert probe.summary()["fraction_lower_positive"] > 0.5

    def test_qubits_range_holds_product_states(self):
        # a 2-dimensional subspace of C^2 x C^2 always meets the product states
        probe = reduced_ef_probe(3, 2, 2, trials=4, rng=RngStream(17), options=self.OPTS, decomposition_samples=4)
        assert all(r.bracket.lower_bits < 1e-3 for r in probe.rows)

    def test_boundary_case_reported(self):
        probe = reduced_ef_probe(4, 2, 2, trials=2, rng=RngStream(18), options=self.OPTS, decomposition_samples=2)
        assert len(probe.rows) == 2
        assert math.isfinite(probe.summary()["ef_upper_mean"])
