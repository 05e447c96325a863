"""Dense linear algebra on composite quantum systems.

Pure states are amplitude vectors tagged with their tensor-factor dimensions;
factor 0 is the leftmost factor, and for bipartite states factor 0 is ``A``.
All entropies are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ShapeError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_SLACK = 1e-10
ISOMETRY_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BipartiteShape:
    """Local dimensions ``(d_a, d_b)`` of a bipartite system, with ``2 <= d_a <= d_b``."""

    d_a: int
    d_b: int

    def __post_init__(self) -> None:
        if int(self.d_a) != self.d_a or int(self.d_b) != self.d_b:
            raise ShapeError(f"dimensions must be integers, got {self.d_a}, {self.d_b}")
        if self.d_a < 2:
            raise ShapeError(f"d_a must be >= 2, got {self.d_a}")
        if self.d_a > self.d_b:
            raise ShapeError(
                f"d_a={self.d_a} exceeds d_b={self.d_b}; use BipartiteShape.normalized"
            )

    @classmethod
    def normalized(cls, x: int, y: int) -> "BipartiteShape":
        """Build a shape with the smaller factor placed on side A."""
        return cls(min(x, y), max(x, y))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_a, self.d_b)

    @property
    def total(self) -> int:
        return self.d_a * self.d_b

    @property
    def max_entropy(self) -> float:
        return float(np.log2(self.d_a))


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over ``C^{dims[0]} (x) C^{dims[1]} (x) ...``."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        amps = _frozen(np.ravel(self.amplitudes))
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapeError(f"invalid factor dimensions {dims}")
        if int(np.prod(dims)) != amps.size:
            raise ShapeError(f"dims {dims} do not match {amps.size} amplitudes")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise DomainError(f"state not normalized: |psi|^2 = {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(cls, vec: Sequence[complex] | np.ndarray, dims: Iterable[int]) -> "PureState":
        """Normalize ``vec`` and wrap it."""
        v = np.asarray(vec, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if n == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(v / n, tuple(dims))

    @classmethod
    def basis(cls, index: Sequence[int], dims: Sequence[int]) -> "PureState":
        """Computational basis state ``|i_0 i_1 ...>``."""
        v = np.zeros(int(np.prod(dims)), dtype=complex)
        v[np.ravel_multi_index(tuple(index), tuple(dims))] = 1.0
        return cls(v, tuple(dims))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    matrix: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"density operator must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise DomainError("density operator is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise DomainError(f"density operator trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m)[0] < -PSD_SLACK:
            raise DomainError("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", m.shape[0])

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityOperator":
        v = state.amplitudes
        return cls(np.outer(v, v.conj()))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt form ``sum_i sqrt(spectrum[i]) |left_i> |right_i>``.

    ``spectrum`` holds squared Schmidt coefficients in nonincreasing order, so
    ``spectrum[0]`` is the largest Schmidt coefficient (``lambda_max``).
    ``left_basis`` is ``d_a x d_a`` and ``right_basis`` is ``d_b x d_a``; both have
    orthonormal columns.
    """

    spectrum: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def lambda_max(self) -> float:
        return float(self.spectrum[0])

    @property
    def rank(self) -> int:
        return int(np.sum(self.spectrum > 1e-14))

    def reconstruct(self) -> np.ndarray:
        """Amplitude vector rebuilt from the decomposition."""
        root = np.sqrt(self.spectrum)
        mat = (self.left_basis * root) @ self.right_basis.T
        return mat.ravel()


@dataclass(frozen=True)
class Subspace:
    """An ``s``-dimensional subspace of ``C^{d_a} (x) C^{d_b}``, given by an isometry.

    ``isometry`` has shape ``(d_a * d_b, s)`` and orthonormal columns.
    """

    isometry: np.ndarray
    shape: BipartiteShape

    def __post_init__(self) -> None:
        v = _frozen(self.isometry)
        if v.ndim != 2 or v.shape[0] != self.shape.total:
            raise ShapeError(
                f"isometry shape {v.shape} does not embed into dimension {self.shape.total}"
            )
        if not 1 <= v.shape[1] <= v.shape[0]:
            raise ShapeError(f"subspace dimension {v.shape[1]} out of range")
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(v.shape[1]))) > ISOMETRY_TOL:
            raise DomainError("isometry columns are not orthonormal")
        object.__setattr__(self, "isometry", v)

    @classmethod
    def spanned_by(cls, vectors: Sequence[np.ndarray], shape: BipartiteShape) -> "Subspace":
        """Orthonormalize ``vectors`` (assumed linearly independent) into a subspace."""
        mat = np.column_stack([np.asarray(v, dtype=complex).ravel() for v in vectors])
        q, r = np.linalg.qr(mat)
        if np.min(np.abs(np.diag(r))) < 1e-12:
            raise DomainError("spanning vectors are linearly dependent")
        return cls(q, shape)

    @property
    def dim(self) -> int:
        return self.isometry.shape[1]

    def projector(self) -> np.ndarray:
        return self.isometry @ self.isometry.conj().T

    def embed(self, coords: np.ndarray) -> PureState:
        """State ``V x`` for unit coordinates ``x`` in ``C^s``."""
        vec = self.isometry @ np.asarray(coords, dtype=complex)
        return PureState(vec / np.linalg.norm(vec), self.shape.dims)

    def residual(self, state: PureState) -> float:
        """Norm of the component of ``state`` orthogonal to the subspace."""
        v = state.amplitudes
        return float(np.linalg.norm(v - self.isometry @ (self.isometry.conj().T @ v)))


def _check_bipartite(state: PureState, shape: BipartiteShape) -> np.ndarray:
    if tuple(state.dims) != shape.dims:
        raise ShapeError(f"state dims {state.dims} do not match shape {shape.dims}")
    return state.amplitudes.reshape(shape.dims)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def partial_trace(state: PureState, shape: BipartiteShape, side: str = "A") -> DensityOperator:
    """Reduced operator of a bipartite pure state on the kept ``side`` ('A' or 'B')."""
    mat = _check_bipartite(state, shape)
    if side == "A":
        red = mat @ mat.conj().T
    elif side == "B":
        red = mat.T @ mat.conj()
    else:
        raise DomainError(f"side must be 'A' or 'B', got {side!r}")
    return DensityOperator(_hermitize(red))


def schmidt(state: PureState, shape: BipartiteShape) -> SchmidtDecomposition:
    mat = _check_bipartite(state, shape)
    u, sv, vh = np.linalg.svd(mat)
    spec = sv**2
    spec = spec / spec.sum()
    return SchmidtDecomposition(spec, u, vh[: shape.d_a].T)


def entropy_from_probabilities(p: np.ndarray) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: DensityOperator | np.ndarray) -> float:
    """Von Neumann entropy ``-Tr rho log2 rho`` in bits.

    Eigenvalues within ``1e-10`` below zero are treated as round-off and clipped;
    anything more negative raises :class:`DomainError`.
    """
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    evals = np.linalg.eigvalsh(mat)
    if evals[0] < -PSD_SLACK:
        raise DomainError(f"operator has eigenvalue {evals[0]:.3e} < 0")
    return entropy_from_probabilities(np.clip(evals, 0.0, 1.0))


def entanglement_entropy(state: PureState, shape: BipartiteShape) -> float:
    mat = _check_bipartite(state, shape)
    sv = np.linalg.svd(mat, compute_uv=False)
    return entropy_from_probabilities(sv**2)


def batch_entanglement_entropy(vectors: np.ndarray, shape: BipartiteShape) -> np.ndarray:
    """Entanglement entropies (bits) for a stack of unit vectors of shape ``(N, d_a*d_b)``.

    Equivalent to calling :func:`entanglement_entropy` row by row.
    """
    vecs = np.asarray(vectors, dtype=complex).reshape(-1, shape.d_a, shape.d_b)
    p = np.linalg.svd(vecs, compute_uv=False) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def partial_trace_matrix(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor of an operator on ``dims`` except those in ``keep``."""
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    t = np.asarray(matrix).reshape(dims + dims)
    # contract each dropped ket index with its bra partner, highest index first
    for i in sorted(drop, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + m)
    dk = int(np.prod([dims[i] for i in keep]))
    return t.reshape(dk, dk)


def _check_subset(keep: Iterable[int], n: int) -> tuple[int, ...]:
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep or len(keep) >= n:
        raise DomainError(f"keep must be a nonempty proper subset of {n} factors, got {keep}")
    if keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"factor indices {keep} out of range for {n} factors")
    return keep


def reduced_state(state: PureState, keep: Iterable[int]) -> DensityOperator:
    """Reduced operator of ``state`` on the factors listed in ``keep``."""
    keep = _check_subset(keep, state.n_parties)
    rest = [i for i in range(state.n_parties) if i not in keep]
    t = np.transpose(state.tensor(), list(keep) + rest)
    dk = int(np.prod([state.dims[i] for i in keep]))
    mat = t.reshape(dk, -1)
    return DensityOperator(_hermitize(mat @ mat.conj().T))


def subset_entropy(state: PureState, keep: Iterable[int]) -> float:
    """Entropy of the reduced state on ``keep``, computed from singular values."""
    keep = _check_subset(keep, state.n_parties)
    rest = [i for i in range(state.n_parties) if i not in keep]
    t = np.transpose(state.tensor(), list(keep) + rest)
    dk = int(np.prod([state.dims[i] for i in keep]))
    sv = np.linalg.svd(t.reshape(dk, -1), compute_uv=False)
    return entropy_from_probabilities(sv**2)


def state_fidelity(a: PureState, b: PureState) -> float:
    """Overlap ``|<a|b>|^2``."""
    if a.dim != b.dim:
        raise ShapeError(f"cannot compare states of dimension {a.dim} and {b.dim}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def bell_state(kind: str = "phi+") -> PureState:
    """Two-qubit Bell states: ``phi+``, ``phi-``, ``psi+``, ``psi-``."""
    r = 1 / np.sqrt(2)
    vecs = {
        "phi+": [r, 0, 0, r],
        "phi-": [r, 0, 0, -r],
        "psi+": [0, r, r, 0],
        "psi-": [0, r, -r, 0],
    }
    if kind not in vecs:
        raise DomainError(f"unknown Bell state {kind!r}")
    return PureState(np.array(vecs[kind], dtype=complex), (2, 2))


def maximally_entangled(shape: BipartiteShape) -> PureState:
    """``(1/sqrt(d_a)) sum_i |i>|i>`` with ``|i>`` on B embedded in its first ``d_a`` levels."""
    mat = np.zeros(shape.dims, dtype=complex)
    mat[np.arange(shape.d_a), np.arange(shape.d_a)] = 1 / np.sqrt(shape.d_a)
    return PureState(mat.ravel(), shape.dims)


def ghz_state(n: int, d: int = 2) -> PureState:
    v = np.zeros(d**n, dtype=complex)
    for i in range(d):
        v[np.ravel_multi_index((i,) * n, (d,) * n)] = 1 / np.sqrt(d)
    return PureState(v, (d,) * n)
