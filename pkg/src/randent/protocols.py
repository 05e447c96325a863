"""Superdense coding of quantum states and multipartite random-measurement distillation.

Superdense coding convention: Alice holds factor ``A`` of a pre-shared
rank-``d_a`` maximally entangled state, Bob holds ``B``.  Bob applies a local
unitary to ``B`` and sends it, so Alice ends up holding both halves.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .bounds import SdcRates, page_lower_bound, sdc_rates
from .efgap import EfBracket, ef_bracket_for
from .errors import DomainError, ShapeError
from .haar import RngLike, RngStream, as_generator, haar_state, random_local_bases
from .optimize import OptimizerOptions
from .parallel import ordered_map
from .states import (
    BipartiteShape,
    PureState,
    entropy_from_probabilities,
    maximally_entangled,
    reduced_state,
    schmidt,
    subset_entropy,
)

MIN_OUTCOME_PROB = 1e-14


# -- superdense coding ---------------------------------------------------------


@dataclass(frozen=True)
class SdcOutcome:
    fidelity: float
    qubits_sent: float
    ebits_consumed: float
    input_entanglement_bits: float


def sdc_fidelity_formula(spectrum: np.ndarray, d_a: int) -> float:
    """``|sum_i sqrt(lambda_i / d_a)|^2`` for a Schmidt spectrum."""
    return float(np.sum(np.sqrt(np.clip(spectrum, 0, None) / d_a)) ** 2)


def encoding_unitary(state: PureState, shape: BipartiteShape) -> np.ndarray:
    """Bob's ``d_b x d_b`` unitary taking the shared state to ``sum_i |a_i>|b_i>/sqrt(d_a)``.

    The shared state equals ``sum_i |a_i>|conj(a_i)>/sqrt(d_a)`` for the target's
    left Schmidt basis ``a_i``, so ``U`` maps ``conj(a_i) -> b_i`` and is completed
    arbitrarily on the complement.
    """
    dec = schmidt(state, shape)
    d_a, d_b = shape.dims
    src = np.zeros((d_b, d_b), dtype=complex)
    src[:d_a, :d_a] = dec.left_basis.conj()
    src[d_a:, d_a:] = np.eye(d_b - d_a)
    dst = dec.right_basis
    if d_b > d_a:
        dst = np.hstack([dst, null_space(dst.conj().T)])
    return dst @ src.conj().T


def sdc_send(state: PureState, shape: BipartiteShape) -> SdcOutcome:
    """Simulate one round by explicit state evolution and score it against ``state``."""
    if tuple(state.dims) != shape.dims:
        raise ShapeError(f"state dims {state.dims} do not match shape {shape.dims}")
    shared = maximally_entangled(shape)
    u = encoding_unitary(state, shape)
    received = (shared.amplitudes.reshape(shape.dims) @ u.T).ravel()
    fid = float(min(1.0, abs(np.vdot(state.amplitudes, received)) ** 2))
    spec = schmidt(state, shape).spectrum
    return SdcOutcome(
        fidelity=fid,
        qubits_sent=math.log2(shape.d_b),
        ebits_consumed=math.log2(shape.d_a),
        input_entanglement_bits=entropy_from_probabilities(spec),
    )


@dataclass(frozen=True)
class RateCheck:
    s: int
    lambda_max: float
    rates: SdcRates
    pure_corner: SdcRates
    sum_rule_error: float


def sdc_rate_check(s: int, states: Sequence[PureState]) -> RateCheck:
    """Qubit/ebit trade-off set by the largest Schmidt coefficient over ``states``.

    Each state's first factor is the ``s``-dimensional system prepared on
    Alice's side; the remaining factors are Bob's.
    """
    if not states:
        raise DomainError("need at least one state")
    lam = 0.0
    for st in states:
        if st.dims[0] != s:
            raise ShapeError(f"first factor has dimension {st.dims[0]}, expected s={s}")
        sv = np.linalg.svd(st.amplitudes.reshape(s, -1), compute_uv=False)
        lam = max(lam, float(sv[0] ** 2))
    rates = sdc_rates(s, lam)
    return RateCheck(
        s=s,
        lambda_max=lam,
        rates=rates,
        pure_corner=sdc_rates(s, 1.0),
        sum_rule_error=abs(rates.total - math.log2(s)),
    )


# -- random-measurement distillation ----------------------------------------------


@dataclass
class DistillOutcome:
    conditional_state: PureState
    outcome_indices: tuple[int, ...]
    entanglement_bits: float
    outcome_probability: float
    resamples: int = 0


def _pair_entropy(vec: np.ndarray, dims: tuple[int, int]) -> float:
    sv = np.linalg.svd(vec.reshape(dims), compute_uv=False)
    return entropy_from_probabilities(sv**2)


def _check_distill_inputs(state: PureState, keep: Sequence[int]) -> tuple[int, int]:
    n = state.n_parties
    if n < 3:
        raise DomainError(f"distillation needs at least 3 parties, got {n}")
    i, j = (int(k) for k in keep)
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"keep must be two distinct party indices, got {tuple(keep)}")
    return i, j


def measured_amplitudes(
    state: PureState, keep: Sequence[int], bases: Sequence[np.ndarray]
) -> tuple[np.ndarray, list[int]]:
    """Amplitude tensor with measured parties rotated into their bases.

    Returns an array of shape ``(outcomes of party m_1, ..., of m_{n-2}, d_i, d_j)``
    and the list of measured parties ``m_1 < m_2 < ...``.  ``bases[k]`` is the
    unitary whose columns form party ``m_k``'s measurement basis.
    """
    i, j = _check_distill_inputs(state, keep)
    measured = [p for p in range(state.n_parties) if p not in (i, j)]
    if len(bases) != len(measured):
        raise ShapeError(f"need {len(measured)} bases, got {len(bases)}")
    t = np.transpose(state.tensor(), measured + [i, j])
    for axis, u in enumerate(bases):
        # <u_m| psi> along this axis: contract with conj(U)[:, m]
        t = np.moveaxis(np.tensordot(np.asarray(u).conj(), t, axes=([0], [axis])), 0, axis)
    return t, measured


def outcome_distribution(
    state: PureState, keep: Sequence[int], bases: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities of every joint outcome and the unnormalized conditional vectors."""
    t, measured = measured_amplitudes(state, keep, bases)
    n_out = int(np.prod(t.shape[: len(measured)]))
    cond = t.reshape(n_out, -1)
    return np.sum(np.abs(cond) ** 2, axis=1), cond


def distill_random_measurement(
    state: PureState,
    keep: Sequence[int] = (0, 1),
    rng: RngLike | None = None,
    bases: Sequence[np.ndarray] | None = None,
) -> DistillOutcome:
    """All parties outside ``keep`` measure in local bases; return the kept pair's state.

    Bases default to independent Haar unitaries drawn from ``rng.spawn(0)``; the
    outcome is sampled from ``rng.spawn(1)``.  Outcomes with probability below
    ``1e-14`` are redrawn and counted in ``resamples``.
    """
    i, j = _check_distill_inputs(state, keep)
    rng = rng if rng is not None else RngStream(0)
    measured = [p for p in range(state.n_parties) if p not in (i, j)]
    if bases is None:
        src = rng.spawn(0) if isinstance(rng, RngStream) else rng
        bases = [u.matrix for u in random_local_bases([state.dims[p] for p in measured], src)]
    probs, cond = outcome_distribution(state, keep, bases)
    gen = as_generator(rng.spawn(1) if isinstance(rng, RngStream) else rng)
    cdf = np.cumsum(probs)
    resamples = 0
    while True:
        k = min(int(np.searchsorted(cdf, gen.random() * cdf[-1], side="right")), len(probs) - 1)
        if probs[k] >= MIN_OUTCOME_PROB:
            break
        resamples += 1
    pair_dims = (state.dims[i], state.dims[j])
    vec = cond[k] / math.sqrt(probs[k])
    out_idx = np.unravel_index(k, [state.dims[p] for p in measured])
    return DistillOutcome(
        conditional_state=PureState(vec / np.linalg.norm(vec), pair_dims),
        outcome_indices=tuple(int(x) for x in out_idx),
        entanglement_bits=_pair_entropy(vec, pair_dims),
        outcome_probability=float(probs[k]),
        resamples=resamples,
    )


# -- multipartite cuts ---------------------------------------------------------


@dataclass(frozen=True)
class CutEntropy:
    cut: tuple[int, ...]
    complement: tuple[int, ...]
    dims: tuple[int, int]
    entropy_bits: float

    @property
    def page_bound(self) -> float:
        return page_lower_bound(BipartiteShape.normalized(*self.dims))


def nontrivial_cuts(n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The ``2^(n-1) - 1`` bipartitions of ``n`` parties, each listed once with party 0 on the left."""
    cuts = []
    for size in range(1, n):
        for rest in itertools.combinations(range(1, n), size - 1):
            left = (0,) + rest
            right = tuple(p for p in range(n) if p not in left)
            cuts.append((left, right))
    return cuts


def bipartite_cuts_scan(state: PureState) -> list[CutEntropy]:
    if state.n_parties < 2:
        raise DomainError("need at least two parties")
    out = []
    for left, right in nontrivial_cuts(state.n_parties):
        dl = int(np.prod([state.dims[p] for p in left]))
        dr = int(np.prod([state.dims[p] for p in right]))
        out.append(CutEntropy(left, right, (dl, dr), subset_entropy(state, left)))
    return out


# -- reduced states of random multipartite states --------------------------------


@dataclass(frozen=True)
class ReducedProbeRow:
    trial: int
    bracket: EfBracket
    rank: int


@dataclass
class ReducedProbe:
    """E_f brackets for the first ``k`` of ``n`` random qudits, split as qudit 0 vs the rest."""

    n: int
    d: int
    k: int
    split: tuple[int, int]
    rows: list[ReducedProbeRow] = field(default_factory=list)

    def summary(self) -> dict[str, float]:
        lo = np.array([r.bracket.lower_bits for r in self.rows])
        up = np.array([r.bracket.upper_bits for r in self.rows])
        return {
            "n": self.n,
            "d": self.d,
            "k": self.k,
            "ef_lower_mean": float(lo.mean()),
            "ef_lower_min": float(lo.min()),
            "ef_upper_mean": float(up.mean()),
            "fraction_lower_positive": float(np.mean(lo > 1e-3)),
        }


def _probe_trial(trial, n, d, k, options, samples, rng: RngStream) -> ReducedProbeRow:
    stream = rng.trial(trial)
    st = haar_state((d,) * n, stream.spawn(0))
    rho = reduced_state(st, range(k))
    shape = BipartiteShape(d, d ** (k - 1))
    br = ef_bracket_for(rho, shape, options, samples, stream.spawn(1))
    return ReducedProbeRow(trial, br, br.subspace_dim)


def reduced_ef_probe(
    n: int,
    d: int,
    k: int,
    trials: int,
    rng: RngStream | None = None,
    options: OptimizerOptions | None = None,
    decomposition_samples: int = 8,
    workers: int = 1,
) -> ReducedProbe:
    """E_f bracket of the reduced state on qudits ``0..k-1`` of Haar ``n``-qudit states."""
    if k < 2:
        raise DomainError(f"E_f needs a bipartite split of the kept qudits; k={k} < 2")
    if k >= n:
        raise DomainError(f"k={k} must be smaller than n={n}")
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    rng = rng if rng is not None else RngStream(0)
    fn = partial(
        _probe_trial, n=n, d=d, k=k, options=options, samples=decomposition_samples, rng=rng
    )
    rows = ordered_map(fn, range(trials), workers)
    return ReducedProbe(n, d, k, (d, d ** (k - 1)), rows)
