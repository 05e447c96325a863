"""Unitarily invariant sampling with reproducible, counter-based random streams."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .states import BipartiteShape, PureState, Subspace

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """Identifies an independent random stream.

    A stream is keyed by ``(master_seed, stream_index)`` plus an optional path of
    child indices created with :meth:`spawn`.  The generator is a PCG64 seeded
    through :class:`numpy.random.SeedSequence`, so the same key yields the same
    samples on every platform, independent of how trials are scheduled.
    """

    master_seed: int
    stream_index: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for v in (self.master_seed, self.stream_index, *self.path):
            if not 0 <= int(v) < _U64:
                raise DomainError(f"stream key component {v} is not an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.stream_index), *self.path)
        )
        return np.random.Generator(np.random.PCG64(seq))

    def spawn(self, i: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index, self.path + (int(i),))

    def trial(self, i: int) -> "RngStream":
        """Stream for trial ``i`` of an experiment rooted at this stream's seed."""
        return RngStream(self.master_seed, int(i), self.path)


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


@dataclass(frozen=True)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex, copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def unitarity_error(self) -> float:
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(self.dim))))


def complex_gaussian(gen: np.random.Generator, size) -> np.ndarray:
    """i.i.d. standard complex normals (``E|z|^2 = 1``)."""
    return (gen.standard_normal(size) + 1j * gen.standard_normal(size)) / np.sqrt(2)


def haar_vector(dim: int, rng: RngLike) -> np.ndarray:
    if dim < 1:
        raise DomainError(f"dimension must be >= 1, got {dim}")
    z = complex_gaussian(as_generator(rng), dim)
    return z / np.linalg.norm(z)


def haar_state(dim: int | Sequence[int], rng: RngLike) -> PureState:
    """Uniformly random pure state.

    ``dim`` is either the total dimension or a list of factor dimensions, in
    which case the state is tagged with those factors.
    """
    dims = (int(dim),) if np.isscalar(dim) else tuple(int(d) for d in dim)
    total = int(np.prod(dims))
    return PureState(haar_vector(total, rng), dims)


def haar_unitary_matrix(dim: int, rng: RngLike) -> np.ndarray:
    """Haar unitary as a plain array: QR of a Ginibre matrix with R's diagonal phases removed."""
    if dim < 1:
        raise DomainError(f"dimension must be >= 1, got {dim}")
    z = complex_gaussian(as_generator(rng), (dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(dim: int, rng: RngLike) -> UnitaryMatrix:
    return UnitaryMatrix(haar_unitary_matrix(dim, rng))


def random_subspace(shape: BipartiteShape, s: int, rng: RngLike) -> Subspace:
    """Image of the first ``s`` basis vectors under a Haar unitary on ``C^{d_a d_b}``."""
    if not 1 <= s <= shape.total:
        raise DomainError(f"subspace dimension s={s} outside [1, {shape.total}]")
    u = haar_unitary_matrix(shape.total, rng)
    return Subspace(u[:, :s], shape)


def random_local_bases(dims: Sequence[int], rng: RngLike) -> list[UnitaryMatrix]:
    """One independent Haar unitary per factor; columns are measurement basis vectors.

    With an :class:`RngStream`, factor ``i`` draws from child stream ``i``.
    """
    if isinstance(rng, RngStream):
        return [haar_unitary(d, rng.spawn(i)) for i, d in enumerate(dims)]
    return [haar_unitary(d, rng) for d in dims]
