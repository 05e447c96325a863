"""Numerical experiments on entanglement in random states and random subspaces."""

__version__ = "0.1.0"

from .errors import DomainError, FeasibilityError, RandentError, ShapeError  # noqa: E402
from .states import (  # noqa: E402
    BipartiteShape,
    DensityOperator,
    PureState,
    SchmidtDecomposition,
    Subspace,
    entanglement_entropy,
    partial_trace,
    reduced_state,
    schmidt,
    state_fidelity,
    von_neumann_entropy,
)
from .haar import RngStream, haar_state, haar_unitary, random_local_bases, random_subspace  # noqa: E402

__all__ = [
    "BipartiteShape",
    "DensityOperator",
    "DomainError",
    "FeasibilityError",
    "PureState",
    "RandentError",
    "RngStream",
    "SchmidtDecomposition",
    "ShapeError",
    "Subspace",
    "entanglement_entropy",
    "haar_state",
    "haar_unitary",
    "partial_trace",
    "random_local_bases",
    "random_subspace",
    "reduced_state",
    "schmidt",
    "state_fidelity",
    "von_neumann_entropy",
]
