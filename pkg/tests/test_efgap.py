import numpy as np
import pytest

from randent.efgap import (
    decomposition_vectors,
    ef_bracket,
    ef_bracket_for,
    gap_report,
    maximally_mixed_on,
    range_subspace,
)
from randent.haar import RngStream, haar_unitary_matrix, random_subspace
from randent.optimize import OptimizerOptions
from randent.states import BipartiteShape, DensityOperator, Subspace, bell_state, von_neumann_entropy

FAST = OptimizerOptions(restarts=4)


class TestMaximallyMixed:
    def test_singlet(self, singlet_subspace):
        psi = bell_state("psi-").amplitudes
        np.testing.assert_allclose(maximally_mixed_on(singlet_subspace).matrix, np.outer(psi, psi.conj()), atol=1e-14)

    def test_full_space(self, qubits):
        np.testing.assert_allclose(maximally_mixed_on(Subspace(np.eye(4), qubits)).matrix, np.eye(4) / 4, atol=1e-14)

    @pytest.mark.parametrize("s", [1, 2, 5, 9])
    def test_entropy(self, s):
        sub = random_subspace(BipartiteShape(3, 3), s, RngStream(1, s))
        assert von_neumann_entropy(maximally_mixed_on(sub)) == pytest.approx(np.log2(s), abs=1e-10)


class TestDecomposition:
    def test_any_mixer_reproduces_rho(self):
        shape = BipartiteShape(3, 4)
        sub = random_subspace(shape, 4, RngStream(2))
        rho = maximally_mixed_on(sub)
        for j in range(5):
            vecs, w = decomposition_vectors(rho, haar_unitary_matrix(4, RngStream(3, j)))
            rebuilt = (vecs.T * w) @ vecs.conj()
            np.testing.assert_allclose(rebuilt, rho.matrix, atol=1e-12)
            assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_range(self):
        shape = BipartiteShape(3, 3)
        sub = random_subspace(shape, 3, RngStream(4))
        rng_sub = range_subspace(maximally_mixed_on(sub), shape)
        assert rng_sub.dim == 3
        np.testing.assert_allclose(rng_sub.projector(), sub.projector(), atol=1e-10)


class TestBracket:
    def test_singlet(self, singlet_subspace):
        br = ef_bracket(singlet_subspace, FAST, rng=RngStream(5))
        assert br.lower_bits == pytest.approx(1.0, abs=1e-8)
        assert br.upper_bits == pytest.approx(1.0, abs=1e-8)
        assert br.mutual_info_bits == pytest.approx(2.0, abs=1e-8)
        assert br.gap_bits == pytest.approx(-1.0, abs=1e-8)

    def test_full_space(self, qubits):
        br = ef_bracket(Subspace(np.eye(4), qubits), FAST, rng=RngStream(6))
        assert br.lower_bits <= 1e-4
        assert br.mutual_info_bits == pytest.approx(0.0, abs=1e-10)

    def test_bell_span(self, bell_span):
        br = ef_bracket(bell_span, OptimizerOptions(restarts=10), rng=RngStream(7))
        assert br.lower_bits <= 1e-4
        # I(A:B) of (|00><00| + |11><11|)/2 is one bit
        assert br.mutual_info_bits == pytest.approx(1.0, abs=1e-10)

    def test_lower_never_above_upper(self):
        shape = BipartiteShape(3, 3)
        for i in range(6):
            sub = random_subspace(shape, 1 + i % 4, RngStream(8, i))
            br = ef_bracket(sub, FAST, decomposition_samples=4, rng=RngStream(9, i))
            assert br.lower_bits <= br.upper_bits + 1e-12

    def test_pure_state_input(self):
        shape = BipartiteShape(2, 3)
        v = np.zeros(6, dtype=complex)
        v[0] = v[4] = 1 / np.sqrt(2)
        br = ef_bracket_for(DensityOperator(np.outer(v, v.conj())), shape, FAST, rng=RngStream(10))
        assert br.lower_bits == pytest.approx(1.0, abs=1e-10)
        assert br.upper_bits == pytest.approx(1.0, abs=1e-10)

    def test_rejects_zero_samples(self, singlet_subspace):
        with pytest.raises(ValueError):
            ef_bracket(singlet_subspace, FAST, decomposition_samples=0)


class TestGapReport:
    def test_regression_table(self):
        # fixed-seed baseline for a (4,4) shape, s=3
        rep = gap_report(BipartiteShape(4, 4), 3, trials=4, rng=RngStream(11), options=FAST, decomposition_samples=4)
        sm = rep.summary()
        assert sm["trials"] == 4
        assert sm["entropy_rho"] == pytest.approx(np.log2(3))
        for b in rep.brackets:
            assert 0 <= b.lower_bits <= b.upper_bits + 1e-12
            assert b.mutual_info_bits <= 2 * 2 - np.log2(3) + 1e-9
        assert sm["ef_lower_mean"] > 0.5

    def test_workers_do_not_change_result(self):
        kw = dict(trials=3, rng=RngStream(12), options=FAST, decomposition_samples=2)
        a = gap_report(BipartiteShape(3, 3), 2, workers=1, **kw)
        b = gap_report(BipartiteShape(3, 3), 2, workers=2, **kw)
        assert a.brackets == b.brackets
