import numpy as np
import pytest

from randent.haar import RngStream, haar_state
from randent.states import BipartiteShape, PureState, Subspace, bell_state


@pytest.fixture
def stream():
    return RngStream(20261015)


@pytest.fixture
def qubits():
    return BipartiteShape(2, 2)


@pytest.fixture
def bell_span(qubits):
    """span{|phi+>, |phi->} = span{|00>, |11>}."""
    return Subspace.spanned_by(
        [bell_state("phi+").amplitudes, bell_state("phi-").amplitudes], qubits
    )


@pytest.fixture
def singlet_subspace(qubits):
    return Subspace(bell_state("psi-").amplitudes.reshape(4, 1), qubits)


def random_bipartite(shape, seed, index=0):
    return haar_state(shape.dims, RngStream(seed, index))


def product(a, b) -> PureState:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return PureState.from_vector(np.kron(a, b), (a.size, b.size))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and return the flag."""

    def _record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
