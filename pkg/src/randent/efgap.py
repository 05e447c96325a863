"""Entanglement-of-formation brackets and the mutual-information gap.

For a mixed state ``rho`` every pure-state decomposition uses vectors from the
range of ``rho``, so the minimum entanglement over that range bounds ``E_f``
from below.  Any explicit decomposition bounds it from above.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from .bounds import mutual_information
from .haar import RngStream, haar_unitary_matrix, random_subspace
from .optimize import OptimizerOptions, min_entanglement
from .parallel import ordered_map
from .states import (
    BipartiteShape,
    DensityOperator,
    Subspace,
    batch_entanglement_entropy,
)

RANGE_TOL = 1e-10


@dataclass(frozen=True)
class EfBracket:
    lower_bits: float
    upper_bits: float
    mutual_info_bits: float
    subspace_dim: int

    @property
    def gap_bits(self) -> float:
        """``E_f`` lower estimate minus the mutual information."""
        return self.lower_bits - self.mutual_info_bits


def maximally_mixed_on(subspace: Subspace) -> DensityOperator:
    v = subspace.isometry
    return DensityOperator(v @ v.conj().T / subspace.dim)


def range_subspace(rho: DensityOperator, shape: BipartiteShape, tol: float = RANGE_TOL) -> Subspace:
    """Subspace spanned by the eigenvectors of ``rho`` with eigenvalue above ``tol``."""
    p, u = np.linalg.eigh(rho.matrix)
    return Subspace(u[:, p > tol], shape)


def decomposition_vectors(rho: DensityOperator, mixer: np.ndarray, tol: float = RANGE_TOL):
    """Ensemble ``{(w_j, |v_j|^2)}`` with ``v_j = X W e_j`` and ``X X^+ = rho``.

    ``mixer`` is a unitary of size ``rank(rho)``; every such choice gives a
    valid decomposition of ``rho``.  Returns normalized vectors and weights.
    """
    p, u = np.linalg.eigh(rho.matrix)
    keep = p > tol
    x = u[:, keep] * np.sqrt(p[keep])
    cols = x @ mixer
    weights = np.sum(np.abs(cols) ** 2, axis=0)
    return (cols / np.sqrt(weights)).T, weights


def ef_bracket_for(
    rho: DensityOperator,
    shape: BipartiteShape,
    options: OptimizerOptions | None = None,
    decomposition_samples: int = 16,
    rng: RngStream | None = None,
) -> EfBracket:
    """Bracket ``E_f(rho)`` and compute its mutual information.

    The lower edge is the optimizer's minimum over the range of ``rho``, further
    lowered by any cheaper decomposition vector met along the way.  Sample 0 of
    the upper edge is the eigen-decomposition; the others mix it with Haar
    unitaries drawn from ``rng.spawn(1).spawn(j)``.
    """
    if decomposition_samples < 1:
        raise ValueError(f"decomposition_samples must be >= 1, got {decomposition_samples}")
    opts = options or OptimizerOptions()
    rng = rng if rng is not None else RngStream(0)
    sub = range_subspace(rho, shape)
    report = min_entanglement(sub, rng=rng.spawn(0), options=opts)
    lower = report.min_bits
    upper = np.inf
    r = sub.dim
    for j in range(decomposition_samples):
        mixer = np.eye(r) if j == 0 else haar_unitary_matrix(r, rng.spawn(1).spawn(j))
        vecs, weights = decomposition_vectors(rho, mixer)
        ents = batch_entanglement_entropy(vecs, shape)
        upper = min(upper, float(weights @ ents))
        lower = min(lower, float(ents.min()))
    return EfBracket(
        lower_bits=max(lower, 0.0),
        upper_bits=float(upper),
        mutual_info_bits=mutual_information(rho, shape),
        subspace_dim=r,
    )


def ef_bracket(
    subspace: Subspace,
    options: OptimizerOptions | None = None,
    decomposition_samples: int = 16,
    rng: RngStream | None = None,
) -> EfBracket:
    """``E_f`` bracket and mutual information of the maximally mixed state on ``subspace``."""
    return ef_bracket_for(
        maximally_mixed_on(subspace), subspace.shape, options, decomposition_samples, rng
    )


def _gap_trial(trial: int, shape, s, options, samples, rng: RngStream) -> EfBracket:
    stream = rng.trial(trial)
    sub = random_subspace(shape, s, stream.spawn(0))
    return ef_bracket(sub, options, samples, stream.spawn(1))


@dataclass
class GapReport:
    shape: BipartiteShape
    s: int
    brackets: list[EfBracket]

    def summary(self) -> dict[str, float]:
        lo = np.array([b.lower_bits for b in self.brackets])
        up = np.array([b.upper_bits for b in self.brackets])
        mi = np.array([b.mutual_info_bits for b in self.brackets])
        out: dict[str, float] = {"s": self.s, "trials": len(self.brackets)}
        for name, arr in (("ef_lower", lo), ("ef_upper", up), ("mutual_info", mi)):
            out[f"{name}_mean"] = float(arr.mean())
            for q in (0.05, 0.5, 0.95):
                out[f"{name}_q{int(q * 100):02d}"] = float(np.quantile(arr, q))
        out["entropy_rho"] = float(np.log2(self.s))
        return out


def gap_report(
    shape: BipartiteShape,
    s: int,
    trials: int,
    rng: RngStream | None = None,
    options: OptimizerOptions | None = None,
    decomposition_samples: int = 16,
    workers: int = 1,
) -> GapReport:
    rng = rng if rng is not None else RngStream(0)
    fn = partial(
        _gap_trial, shape=shape, s=s, options=options, samples=decomposition_samples, rng=rng
    )
    return GapReport(shape, s, ordered_map(fn, range(trials), workers))
