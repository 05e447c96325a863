"""Finite nets on the states of a small subspace, and brute-force minima over them.

Two constructions live here.

* :func:`build_net` covers the pure states of a subspace (global phase
  quotiented out) in the distance ``|| |x><x| - |y><y| ||_1``.  It is the net the
  brute-force entanglement oracle searches.
* :func:`build_ball_net` / :func:`ball_net_size` cover the whole unit ball of
  ``C^s`` viewed as ``R^{2s}``; their size is what the union bound multiplies by.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import tail_rhs, union_bound
from .errors import DomainError, FeasibilityError
from .states import BipartiteShape, PureState, Subspace, batch_entanglement_entropy

MAX_NET_DIM = 3


def projector_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Trace norm ``|| |x><x| - |y><y| ||_1 = 2 sqrt(1 - |<x|y>|^2)`` for unit vectors.

    Broadcasts over leading axes.
    """
    ov = np.abs(np.sum(np.conj(x) * y, axis=-1)) ** 2
    return 2 * np.sqrt(np.clip(1 - ov, 0.0, None))


def _sphere_grid(n: int, r: float, hemisphere: bool = False) -> np.ndarray:
    """Points of ``S^{n-1} in R^n`` within Euclidean distance ``r`` of every sphere point.

    With ``hemisphere`` only the half with nonnegative first coordinate needs
    covering.  Built recursively as ``(cos t, sin t * w)``.  For a target
    ``(cos u, sin u * v)`` the squared distance is exactly
    ``chord(u - t)^2 + sin u sin t |v - w|^2``, so ``t`` runs over a midpoint
    grid with half-spacing ``h <= r / sqrt(2)`` and ``w`` over a grid of
    ``S^{n-2}`` whose radius uses the remaining ``r^2 - h^2``.
    """
    if n == 1:
        return np.array([[1.0]]) if hemisphere else np.array([[1.0], [-1.0]])
    if r >= (math.sqrt(2) if hemisphere else 2.0):
        e0 = np.zeros((1, n))
        e0[0, 0] = 1.0
        return e0
    span = math.pi / 2 if hemisphere else math.pi
    k = math.ceil(span / (math.sqrt(2) * r))
    half = span / (2 * k)
    ts = (np.arange(k) + 0.5) * span / k
    blocks = []
    for t in ts:
        sin_t = math.sin(t)
        inner_r = math.sqrt((r * r - half * half) / (sin_t * min(1.0, sin_t + half)))
        inner = _sphere_grid(n - 1, inner_r)
        blk = np.empty((inner.shape[0], n))
        blk[:, 0] = math.cos(t)
        blk[:, 1:] = math.sin(t) * inner
        blocks.append(blk)
    return np.vstack(blocks)


def projective_grid(s: int, epsilon: float) -> np.ndarray:
    """Unit coordinate vectors in ``C^s`` covering all states to within ``epsilon``.

    Every state has a representative whose first coordinate is real and
    nonnegative, which is a hemisphere of ``S^{2s-2}``; the projector distance
    is at most twice the Euclidean one, so the hemisphere is covered at ``epsilon/2``.
    """
    if s == 1:
        return np.ones((1, 1), dtype=complex)
    real = _sphere_grid(2 * s - 1, epsilon / 2, hemisphere=True)
    coords = np.empty((real.shape[0], s), dtype=complex)
    coords[:, 0] = real[:, 0]
    coords[:, 1:] = real[:, 1::2] + 1j * real[:, 2::2]
    return coords


@dataclass(frozen=True)
class Net:
    """Finite set of subspace states with covering radius ``epsilon``.

    ``coords`` holds the points as unit vectors in ``C^s``; :attr:`points`
    embeds them into the ambient bipartite space.
    """

    coords: np.ndarray
    epsilon: float
    subspace: Subspace

    @property
    def subspace_dim(self) -> int:
        return self.subspace.dim

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    def __len__(self) -> int:
        return self.size

    def vectors(self) -> np.ndarray:
        """Ambient amplitude vectors, one row per point."""
        return self.coords @ self.subspace.isometry.T

    @property
    def points(self) -> list[PureState]:
        dims = self.subspace.shape.dims
        return [PureState(v / np.linalg.norm(v), dims) for v in self.vectors()]

    def covering_gap(self, coords: np.ndarray, chunk: int = 256) -> np.ndarray:
        """Distance from each row of ``coords`` (unit, in ``C^s``) to its nearest net point."""
        coords = np.atleast_2d(coords)
        out = np.empty(coords.shape[0])
        for i in range(0, coords.shape[0], chunk):
            ov = np.abs(coords[i : i + chunk].conj() @ self.coords.T) ** 2
            out[i : i + chunk] = 2 * np.sqrt(np.clip(1 - ov.max(axis=1), 0.0, None))
        return out


def build_net(subspace: Subspace, epsilon: float, max_dim: int = MAX_NET_DIM) -> Net:
    """Net of the subspace's pure states at projector trace-norm radius ``epsilon``.

    ``max_dim`` guards against the exponential growth in ``s``; raise it
    explicitly to go beyond three dimensions.
    """
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if subspace.dim > max_dim:
        raise FeasibilityError(
            f"net on a {subspace.dim}-dimensional subspace exceeds the guard max_dim={max_dim}"
        )
    return Net(projective_grid(subspace.dim, epsilon), float(epsilon), subspace)


def brute_min_entropy(
    subspace: Subspace,
    shape: BipartiteShape | None = None,
    epsilon: float = 0.1,
    max_dim: int = MAX_NET_DIM,
    chunk: int = 4096,
) -> float:
    """Smallest entanglement entropy (bits) over a net of the subspace.

    This upper-bounds the true minimum; the true minimum is within roughly
    ``2 * epsilon * log2 d_a`` below it.
    """
    shape = shape or subspace.shape
    if shape != subspace.shape:
        raise DomainError(f"shape {shape} differs from the subspace's {subspace.shape}")
    net = build_net(subspace, epsilon, max_dim=max_dim)
    best = math.inf
    for i in range(0, net.size, chunk):
        vecs = net.coords[i : i + chunk] @ subspace.isometry.T
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        best = min(best, float(batch_entanglement_entropy(vecs, shape).min()))
    return max(best, 0.0)


def slack(shape: BipartiteShape, epsilon: float) -> float:
    """Declared tolerance band ``2 epsilon log2 d_a`` of the brute oracle."""
    return 2 * epsilon * math.log2(shape.d_a)


def union_tail(net: Net, shape: BipartiteShape, alpha: float, c_const: float = 1.0) -> float:
    return union_bound(net.size, tail_rhs(shape, alpha, c_const))


# -- nets on the unit ball of R^{2s} ----------------------------------------


def _ball_lattice(s: int, epsilon: float) -> tuple[float, np.ndarray, np.ndarray, float]:
    """Spacing ``h``, 1-d lattice indices, scaled squared cell distances and their budget.

    A cell centred at ``h k`` lies at squared distance ``(h/2)^2 (2|k| - 1)^2``
    from the origin along one axis (zero for ``k = 0``).  Working with the odd
    squares ``(2|k| - 1)^2`` keeps every partial sum an exact integer, compared
    against ``4 / h^2 = 2s / epsilon^2``.
    """
    if s < 1:
        raise DomainError(f"s must be >= 1, got {s}")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    n = 2 * s
    h = 2 * epsilon / math.sqrt(n)
    budget = n / epsilon**2
    kmax = int(math.floor(1 / h + 0.5)) + 1
    k = np.arange(-kmax, kmax + 1)
    g = np.where(k == 0, 0, (2 * np.abs(k) - 1) ** 2).astype(np.int64)
    keep = g <= budget
    return h, k[keep], g[keep], budget


def _partial_sums(g: np.ndarray, m: int, budget: float) -> np.ndarray:
    out = np.zeros(1, dtype=np.int64)
    for _ in range(m):
        out = (out[:, None] + g[None, :]).ravel()
        out = out[out <= budget]
    return out


def ball_net_size(s: int, epsilon: float) -> int:
    """Exact number of points :func:`build_ball_net` would return, without building it.

    Splits the ``2s`` axes into two halves and counts compatible pairs of
    partial sums with a sorted search.
    """
    _, _, g, budget = _ball_lattice(s, epsilon)
    n = 2 * s
    left = _partial_sums(g, n // 2, budget)
    right = np.sort(_partial_sums(g, n - n // 2, budget))
    limit = np.floor(budget).astype(np.int64) - left
    return int(np.searchsorted(right, limit, side="right").sum())


def build_ball_net(s: int, epsilon: float, max_points: int = 2_000_000) -> np.ndarray:
    """Centres of cubic lattice cells meeting the unit ball of ``C^s = R^{2s}``.

    The spacing is ``2 epsilon / sqrt(2s)``, so every point of the ball lies in
    some kept cell and hence within ``epsilon`` of its centre.  Centres near the
    boundary may sit slightly outside the ball.  Returns complex coordinates of
    shape ``(N, s)``.
    """
    n_points = ball_net_size(s, epsilon)
    if n_points > max_points:
        raise FeasibilityError(f"ball net would hold {n_points} points (> {max_points})")
    h, k, g, budget = _ball_lattice(s, epsilon)
    idx = np.zeros((1, 0), dtype=int)
    acc = np.zeros(1, dtype=np.int64)
    for _ in range(2 * s):
        acc = (acc[:, None] + g[None, :]).ravel()
        idx = np.hstack([np.repeat(idx, k.size, axis=0), np.tile(k, idx.shape[0])[:, None]])
        ok = acc <= budget
        acc, idx = acc[ok], idx[ok]
    real = idx * h
    return real[:, 0::2] + 1j * real[:, 1::2]


def fit_scaling_exponent(epsilons, sizes) -> float:
    """Least-squares slope of ``log(size)`` against ``log(1/epsilon)``."""
    x = np.log(1 / np.asarray(epsilons, dtype=float))
    y = np.log(np.asarray(sizes, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
