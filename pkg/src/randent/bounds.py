"""Closed-form concentration bounds, dimension formulas and resource rates.

Every logarithm that appears in a threshold or denominator is base 2, and every
entropy is in bits.  The unspecified positive constants of the concentration
statements are exposed as ``c_const`` arguments defaulting to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .states import BipartiteShape, DensityOperator, partial_trace_matrix, von_neumann_entropy

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ConcentrationParams:
    """Inputs of the Levy-type bound ``exp(-C (k - 1) alpha^2 / eta^2)``.

    ``k`` is the dimension of the sphere ``S^k`` the function lives on.
    """

    alpha: float
    eta: float = 1.0
    c_const: float = 1.0
    k: int = 2

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.eta <= 0 or self.c_const <= 0 or self.k <= 0:
            raise DomainError(f"concentration parameters must be positive: {self}")


@dataclass(frozen=True)
class SdcRates:
    """Leading-order qubit and ebit cost per prepared state, in units of log2 of dimension."""

    qubits: float
    ebits: float

    @property
    def total(self) -> float:
        return self.qubits + self.ebits


def page_lower_bound(shape: BipartiteShape) -> float:
    """Lower bound ``log2 d_a - d_a / (2 ln2 d_b)`` on the mean entanglement (bits) of a random state."""
    return math.log2(shape.d_a) - shape.d_a / (2 * LN2 * shape.d_b)


def beta(shape: BipartiteShape) -> float:
    """Entropy offset ``(1/ln 2) d_a/d_b`` used in the tail threshold."""
    return shape.d_a / (LN2 * shape.d_b)


def tail_threshold(shape: BipartiteShape, alpha: float) -> float:
    """Entropy below which a state counts as a tail event: ``log2 d_a - alpha - beta``."""
    return math.log2(shape.d_a) - alpha - beta(shape)


def levy_rhs(p: ConcentrationParams) -> float:
    return math.exp(-p.c_const * (p.k - 1) * p.alpha**2 / p.eta**2)


def _require_tail_domain(shape: BipartiteShape) -> None:
    if shape.d_a < 3:
        raise DomainError(
            f"tail bound requires d_b >= d_a >= 3, got (d_a, d_b) = {shape.dims}"
        )


def tail_exponent(shape: BipartiteShape, alpha: float) -> float:
    """``(d_a d_b - 1) alpha^2 / (log2 d_a)^2``, the tail exponent per unit constant."""
    _require_tail_domain(shape)
    return (shape.total - 1) * alpha**2 / math.log2(shape.d_a) ** 2


def tail_rhs(shape: BipartiteShape, alpha: float, c_const: float = 1.0) -> float:
    """Upper bound on ``Pr{S(phi_A) < log2 d_a - alpha - beta}`` for a random state."""
    if alpha < 0 or c_const <= 0:
        raise DomainError(f"need alpha >= 0 and c_const > 0, got {alpha}, {c_const}")
    return math.exp(-c_const * tail_exponent(shape, alpha))


def union_bound(net_size: int, single_prob: float) -> float:
    if net_size < 1 or not 0 <= single_prob <= 1:
        raise DomainError(f"invalid union bound inputs ({net_size}, {single_prob})")
    return min(1.0, net_size * single_prob)


def subspace_dim_formula(shape: BipartiteShape, alpha: float, c_const: float = 1.0) -> int:
    """Dimension ``floor(d_a d_b C alpha^2.5 / (log2 d_a)^3)`` of an all-entangled subspace."""
    _require_tail_domain(shape)
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if c_const <= 0:
        raise DomainError(f"c_const must be positive, got {c_const}")
    return math.floor(shape.total * c_const * alpha**2.5 / math.log2(shape.d_a) ** 3)


def mutual_information(rho: DensityOperator, shape: BipartiteShape) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` in bits."""
    if rho.dim != shape.total:
        raise DomainError(f"operator dimension {rho.dim} does not match shape {shape.dims}")
    m = rho.matrix
    s_a = von_neumann_entropy(partial_trace_matrix(m, shape.dims, [0]))
    s_b = von_neumann_entropy(partial_trace_matrix(m, shape.dims, [1]))
    return s_a + s_b - von_neumann_entropy(m)


def sdc_rates(s: int, lambda_max: float, tol: float = 1e-12) -> SdcRates:
    """Qubits ``(log2 s + log2 lambda_max)/2`` and ebits ``(log2 s - log2 lambda_max)/2``.

    ``lambda_max`` is the largest squared Schmidt coefficient over the ensemble,
    so it must lie in ``[1/s, 1]``.
    """
    if s < 1:
        raise DomainError(f"s must be >= 1, got {s}")
    if not (1.0 / s - tol <= lambda_max <= 1.0 + tol):
        raise DomainError(f"lambda_max={lambda_max} outside [1/s, 1] for s={s}")
    lam = float(np.clip(lambda_max, 1.0 / s, 1.0))
    log_s = math.log2(s)
    qubits = max(0.0, 0.5 * (log_s + math.log2(lam)))
    return SdcRates(qubits=qubits, ebits=log_s - qubits)
