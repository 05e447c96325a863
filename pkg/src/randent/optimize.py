"""Minimum entanglement over the unit sphere of a subspace.

The objective is ``x -> S(Tr_B |Vx><Vx|)`` on unit vectors ``x`` in ``C^s``.
Gradients follow the convention ``df = Re <g, dx>`` and are projected onto the
horizontal space ``{v : <x, v> = 0}``, which removes both the radial and the
global-phase directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .haar import RngLike, RngStream, complex_gaussian, as_generator, random_subspace
from .parallel import ordered_map
from .states import (
    BipartiteShape,
    PureState,
    Subspace,
    entanglement_entropy,
    entropy_from_probabilities,
)

EIG_FLOOR = 1e-12
INV_LN2 = 1 / math.log(2)


@dataclass(frozen=True)
class OptimizerOptions:
    restarts: int = 10
    max_iters: int = 2000
    tol: float = 1e-6
    armijo: float = 1e-4
    initial_step: float = 1.0

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 0 or self.tol <= 0:
            raise ValueError("max_iters must be >= 0 and tol > 0")


@dataclass
class RestartTrace:
    value: float
    coords: np.ndarray
    iterations: int
    gradient_norm: float
    objective: list[float] = field(default_factory=list)


@dataclass
class OptimizerReport:
    min_bits: float
    argmin: PureState
    restarts: int
    iterations: list[int]
    converged: bool
    gradient_norm_final: float
    best_restart: int = 0
    traces: list[RestartTrace] = field(default_factory=list, repr=False)


def _objective(coords: np.ndarray, subspace: Subspace) -> tuple[float, np.ndarray, np.ndarray]:
    """Entropy plus the eigen-decomposition of ``rho_A``, reused by the gradient."""
    shape = subspace.shape
    mat = (subspace.isometry @ coords).reshape(shape.d_a, shape.d_b)
    rho = mat @ mat.conj().T
    p, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return entropy_from_probabilities(np.clip(p, 0.0, None)), p, u


def entanglement_value(coords: np.ndarray, subspace: Subspace) -> float:
    """Entanglement entropy of ``V x / |V x|``; defined off the sphere by normalizing."""
    x = np.asarray(coords, dtype=complex)
    return _objective(x / np.linalg.norm(x), subspace)[0]


def _gradient(coords, subspace, p, u) -> np.ndarray:
    shape = subspace.shape
    mat = (subspace.isometry @ coords).reshape(shape.d_a, shape.d_b)
    # dS = -Tr[(log2 rho + 1/ln2) d rho], d rho = dM M^+ + M dM^+
    logs = np.log2(np.maximum(p, EIG_FLOOR)) + INV_LN2
    g_mat = -2 * ((u * logs) @ u.conj().T) @ mat
    g = subspace.isometry.conj().T @ g_mat.ravel()
    return g - coords * np.vdot(coords, g)


def entanglement_gradient(coords: np.ndarray, subspace: Subspace) -> np.ndarray:
    """Riemannian gradient of the entanglement entropy at unit ``coords``.

    Eigenvalues of the reduced state are floored at ``1e-12`` inside the
    logarithm.  The result is orthogonal to ``coords`` in the complex inner
    product, and vanishes identically when ``s = 1``.
    """
    x = np.asarray(coords, dtype=complex)
    _, p, u = _objective(x, subspace)
    return _gradient(x, subspace, p, u)


def _descend(x: np.ndarray, subspace: Subspace, opts: OptimizerOptions) -> RestartTrace:
    f, p, u = _objective(x, subspace)
    g = _gradient(x, subspace, p, u)
    gn = float(np.linalg.norm(g))
    step = opts.initial_step
    trace = [f]
    it = 0
    while it < opts.max_iters and gn >= opts.tol:
        # backtracking on the retraction x -> (x - a g)/|x - a g|
        while True:
            y = x - step * g
            y /= np.linalg.norm(y)
            fy, py, uy = _objective(y, subspace)
            if fy <= f - opts.armijo * step * gn * gn:
                break
            step *= 0.5
            if step < 1e-16:
                break
        if step < 1e-16:
            break
        it += 1
        x, f = y, fy
        g = _gradient(x, subspace, py, uy)
        gn = float(np.linalg.norm(g))
        trace.append(f)
        step = min(step * 2.0, 1e6)
    return RestartTrace(f, x, it, gn, trace)


def _restart(index: int, subspace: Subspace, opts: OptimizerOptions, rng: RngStream) -> RestartTrace:
    gen = as_generator(rng.spawn(index))
    x = complex_gaussian(gen, subspace.dim)
    return _descend(x / np.linalg.norm(x), subspace, opts)


def min_entanglement(
    subspace: Subspace,
    restarts: int = 10,
    max_iters: int = 2000,
    tol: float = 1e-6,
    rng: RngStream | None = None,
    workers: int = 1,
    options: OptimizerOptions | None = None,
) -> OptimizerReport:
    """Lowest entanglement entropy found by projected gradient descent with restarts.

    Restart ``i`` starts from a Haar-random point drawn from ``rng.spawn(i)``.
    The lowest value wins, ties going to the lowest restart index.  The result
    is an upper bound on the true minimum over the subspace.
    """
    opts = options or OptimizerOptions(restarts=restarts, max_iters=max_iters, tol=tol)
    rng = rng if rng is not None else RngStream(0)
    traces = ordered_map(
        partial(_restart, subspace=subspace, opts=opts, rng=rng), range(opts.restarts), workers
    )
    best = min(range(len(traces)), key=lambda i: (traces[i].value, i))
    win = traces[best]
    argmin = subspace.embed(win.coords)
    return OptimizerReport(
        min_bits=entanglement_entropy(argmin, subspace.shape),
        argmin=argmin,
        restarts=opts.restarts,
        iterations=[t.iterations for t in traces],
        converged=win.gradient_norm < opts.tol,
        gradient_norm_final=win.gradient_norm,
        best_restart=best,
        traces=traces,
    )


@dataclass
class ScanRow:
    s: int
    minima: np.ndarray

    @property
    def summary(self) -> dict[str, float]:
        m = self.minima
        return {
            "s": self.s,
            "mean": float(m.mean()),
            "min": float(m.min()),
            "median": float(np.median(m)),
            "p05": float(np.quantile(m, 0.05)),
        }


def _scan_trial(trial: int, shape, s, opts, rng: RngStream) -> float:
    stream = rng.trial(trial)
    sub = random_subspace(shape, s, stream.spawn(0))
    return min_entanglement(sub, rng=stream.spawn(1), options=opts).min_bits


def subspace_scan(
    shape: BipartiteShape,
    s_values: Sequence[int],
    trials: int,
    options: OptimizerOptions | None = None,
    rng: RngStream | None = None,
    workers: int = 1,
) -> list[ScanRow]:
    """Minimum entanglement of ``trials`` random subspaces for every ``s`` in ``s_values``.

    Each ``s`` gets its own child stream, and trial ``t`` within it uses stream
    index ``t``.
    """
    opts = options or OptimizerOptions()
    rng = rng if rng is not None else RngStream(0)
    rows = []
    for s in s_values:
        fn = partial(_scan_trial, shape=shape, s=int(s), opts=opts, rng=rng.spawn(int(s)))
        rows.append(ScanRow(int(s), np.array(ordered_map(fn, range(trials), workers))))
    return rows
