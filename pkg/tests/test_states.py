import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randent.errors import DomainError, ShapeError
from randent.haar import RngStream, haar_state
from randent.states import (
    BipartiteShape,
    DensityOperator,
    PureState,
    bell_state,
    entanglement_entropy,
    ghz_state,
    partial_trace,
    reduced_state,
    schmidt,
    state_fidelity,
    subset_entropy,
    von_neumann_entropy,
)

from conftest import product


class TestTypes:
    def test_pure_state_rejects_unnormalized(self):
        with pytest.raises(DomainError):
            PureState(np.array([1.0, 1.0]), (2,))

    def test_pure_state_rejects_bad_dims(self):
        with pytest.raises(ShapeError):
            PureState(np.array([1.0, 0, 0, 0]), (2, 3))

    def test_amplitudes_are_read_only(self):
        s = bell_state()
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_density_operator_checks(self):
        with pytest.raises(DomainError):
            DensityOperator(np.diag([1.5, -0.5]))
        with pytest.raises(DomainError):
            DensityOperator(np.array([[0.5, 1.0], [0.0, 0.5]]))
        with pytest.raises(DomainError):
            DensityOperator(np.eye(2))

    def test_shape_orientation(self):
        with pytest.raises(ShapeError):
            BipartiteShape(4, 2)
        assert BipartiteShape.normalized(4, 2) == BipartiteShape(2, 4)
        with pytest.raises(ShapeError):
            BipartiteShape(1, 3)


class TestPartialTrace:
    def test_bell_state(self, qubits):
        rho = partial_trace(bell_state(), qubits, "A")
        np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-14)

    def test_product_state(self, qubits):
        rho = partial_trace(PureState.basis((0, 1), (2, 2)), qubits, "A")
        np.testing.assert_allclose(rho.matrix, np.diag([1, 0]), atol=1e-14)

    def test_rectangular(self):
        shape = BipartiteShape(2, 3)
        v = np.zeros(6, dtype=complex)
        v[0] = v[5] = 1 / np.sqrt(2)  # |0,0> + |1,2>
        rho = partial_trace(PureState(v, (2, 3)), shape, "A")
        np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-14)
        rho_b = partial_trace(PureState(v, (2, 3)), shape, "B")
        np.testing.assert_allclose(rho_b.matrix, np.diag([0.5, 0, 0.5]), atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            partial_trace(bell_state(), BipartiteShape(2, 3))

    def test_bad_side(self, qubits):
        with pytest.raises(DomainError):
            partial_trace(bell_state(), qubits, "C")


class TestSchmidt:
    def test_bell(self, qubits):
        np.testing.assert_allclose(schmidt(bell_state(), qubits).spectrum, [0.5, 0.5], atol=1e-14)

    def test_product(self, qubits):
        dec = schmidt(PureState.basis((0, 0), (2, 2)), qubits)
        np.testing.assert_allclose(dec.spectrum, [1, 0], atol=1e-14)
        assert dec.lambda_max == pytest.approx(1.0)

    @pytest.mark.parametrize("dims", [(2, 2), (3, 3), (2, 5), (4, 8)])
    def test_random_states(self, dims):
        shape = BipartiteShape(*dims)
        for i in range(20):
            st = haar_state(dims, RngStream(3, i))
            dec = schmidt(st, shape)
            assert dec.spectrum.sum() == pytest.approx(1.0, abs=1e-10)
            assert np.all(np.diff(dec.spectrum) <= 1e-15)
            for basis in (dec.left_basis, dec.right_basis):
                gram = basis.conj().T @ basis
                np.testing.assert_allclose(gram, np.eye(gram.shape[0]), atol=1e-10)
            evals = np.sort(partial_trace(st, shape).eigenvalues())[::-1]
            np.testing.assert_allclose(dec.spectrum, evals, atol=1e-12)
            rebuilt = PureState.from_vector(dec.reconstruct(), dims)
            assert state_fidelity(rebuilt, st) >= 1 - 1e-10


class TestEntropy:
    def test_maximally_mixed(self):
        assert von_neumann_entropy(DensityOperator(np.eye(4) / 4)) == pytest.approx(2.0, abs=1e-12)

    def test_pure_projector(self):
        assert von_neumann_entropy(DensityOperator.from_pure(bell_state())) == pytest.approx(0.0, abs=1e-12)

    def test_three_quarters(self):
        # -(3/4) log2(3/4) - (1/4) log2(1/4)
        assert von_neumann_entropy(DensityOperator(np.diag([0.75, 0.25]))) == pytest.approx(
            0.8112781244591328, abs=1e-12
        )

    def test_clips_round_off(self):
        assert von_neumann_entropy(np.diag([1.0 + 5e-11, -5e-11])) == pytest.approx(0.0, abs=1e-9)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            von_neumann_entropy(np.diag([1.1, -0.1]))

    def test_entanglement_entropy_examples(self, qubits):
        assert entanglement_entropy(bell_state(), qubits) == pytest.approx(1.0, abs=1e-12)
        assert entanglement_entropy(product([1, 1], [1, 2j]), qubits) == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        da=st.integers(2, 5),
        extra=st.integers(0, 4),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_entropy_properties(self, da, extra, seed):
        shape = BipartiteShape(da, da + extra)
        state = haar_state(shape.dims, RngStream(seed))
        e = entanglement_entropy(state, shape)
        assert -1e-12 <= e <= np.log2(da) + 1e-12
        assert e == pytest.approx(von_neumann_entropy(partial_trace(state, shape, "A")), abs=1e-10)
        assert e == pytest.approx(von_neumann_entropy(partial_trace(state, shape, "B")), abs=1e-8)


class TestReducedState:
    def test_ghz_single(self):
        rho = reduced_state(ghz_state(3), [0])
        np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-14)

    def test_product_pair(self):
        rho = reduced_state(PureState.basis((0, 0, 0), (2, 2, 2)), [0, 1])
        expected = np.zeros((4, 4))
        expected[0, 0] = 1
        np.testing.assert_allclose(rho.matrix, expected, atol=1e-14)

    @pytest.mark.parametrize("keep", [[], [0, 1, 2]])
    def test_rejects_trivial_subsets(self, keep):
        with pytest.raises(DomainError):
            reduced_state(ghz_state(3), keep)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), mask=st.integers(1, 14))
    def test_complement_entropy(self, seed, mask):
        dims = (2, 3, 2, 2)
        state = haar_state(dims, RngStream(seed))
        keep = [i for i in range(4) if mask >> i & 1]
        rest = [i for i in range(4) if i not in keep]
        s_keep = von_neumann_entropy(reduced_state(state, keep))
        assert s_keep == pytest.approx(von_neumann_entropy(reduced_state(state, rest)), abs=1e-8)
        assert s_keep == pytest.approx(subset_entropy(state, keep), abs=1e-8)

    def test_non_contiguous_matches_permutation(self):
        state = haar_state((2, 3, 4), RngStream(11))
        rho = reduced_state(state, [0, 2])
        t = state.tensor()
        direct = np.einsum("ajb,cjd->abcd", t, t.conj()).reshape(8, 8)
        np.testing.assert_allclose(rho.matrix, direct, atol=1e-13)


class TestFidelity:
    def test_examples(self):
        b = bell_state()
        assert state_fidelity(b, b) == pytest.approx(1.0)
        assert state_fidelity(PureState.basis((0,), (2,)), PureState.basis((1,), (2,))) == 0.0
        assert state_fidelity(b, PureState.basis((0, 0), (2, 2))) == pytest.approx(0.5)

    def test_phase_invariant(self):
        a = haar_state(6, RngStream(1))
        b = haar_state(6, RngStream(2))
        rotated = PureState(a.amplitudes * np.exp(0.7j), a.dims)
        assert state_fidelity(rotated, b) == pytest.approx(state_fidelity(a, b), abs=1e-14)
