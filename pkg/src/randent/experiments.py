"""Seeded experiment runner: configuration, dispatch, summaries and file output.

Every trial draws from its own stream ``RngStream(seed, trial)``, and trials
are mapped in order, so per-trial rows do not depend on the worker count.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import stats

from . import __version__
from .bounds import (
    beta,
    page_lower_bound,
    sdc_rates,
    tail_exponent,
    tail_rhs,
    tail_threshold,
)
from .efgap import ef_bracket
from .errors import DomainError, RandentError
from .haar import RngStream, haar_state, haar_vector, random_subspace
from .net import (
    ball_net_size,
    build_ball_net,
    build_net,
    fit_scaling_exponent,
)
from .optimize import OptimizerOptions, min_entanglement
from .parallel import ordered_map
from .protocols import bipartite_cuts_scan, distill_random_measurement, sdc_send
from .states import BipartiteShape, PureState, entropy_from_probabilities

KINDS = (
    "sample-entropy",
    "tail",
    "min-ent",
    "scan-subspace",
    "ef-gap",
    "sdc",
    "sdc-rates",
    "distill",
    "cuts",
    "net-audit",
)

BLOCK = 500


class ConfigError(RandentError, ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    da: int = 2
    db: int = 2
    d: int = 2
    n_parties: int = 3
    s: int = 1
    s_values: tuple[int, ...] = ()
    alpha: float = 0.5
    c_const: float = 1.0
    epsilon: float = 0.1
    epsilons: tuple[float, ...] = ()
    trials: int = 1000
    seed: int = 0
    restarts: int = 10
    max_iters: int = 2000
    tol: float = 1e-6
    decomposition_samples: int = 16
    keep: tuple[int, int] = (0, 1)
    workers: int = 1
    out: str | None = None
    format: str = "json"

    # fields that change where or how fast results appear, never what they are
    RUNTIME_FIELDS = ("workers", "out", "format")

    @property
    def shape(self) -> BipartiteShape:
        return BipartiteShape(self.da, self.db)

    @property
    def options(self) -> OptimizerOptions:
        return OptimizerOptions(restarts=self.restarts, max_iters=self.max_iters, tol=self.tol)

    def canonical(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for k in self.RUNTIME_FIELDS:
            d.pop(k)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(d.items())}

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.trials < 0:
            raise ConfigError(f"trials must be >= 0, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        bipartite = {"sample-entropy", "tail", "min-ent", "scan-subspace", "ef-gap", "sdc", "sdc-rates"}
        if self.kind in bipartite:
            if not 2 <= self.da <= self.db:
                raise ConfigError(f"need 2 <= da <= db, got da={self.da}, db={self.db}")
        if self.kind == "tail":
            if self.da < 3:
                raise ConfigError(f"tail bound requires db >= da >= 3, got da={self.da}")
            if self.alpha <= 0 or self.c_const <= 0:
                raise ConfigError("tail needs alpha > 0 and c_const > 0")
        if self.kind in ("min-ent", "ef-gap", "sdc", "sdc-rates"):
            if not 1 <= self.s <= self.da * self.db:
                raise ConfigError(f"s={self.s} outside [1, da*db={self.da * self.db}]")
        if self.kind == "scan-subspace":
            for s in self.s_values or (self.s,):
                if not 1 <= s <= self.da * self.db:
                    raise ConfigError(f"s={s} outside [1, da*db]")
        if self.kind in ("distill", "cuts"):
            if self.d < 2:
                raise ConfigError(f"d must be >= 2, got {self.d}")
            if self.d**self.n_parties > 4096:
                raise ConfigError(f"d^n = {self.d ** self.n_parties} exceeds the dense limit 4096")
        if self.kind == "distill":
            if self.n_parties < 3:
                raise ConfigError("distill needs n-parties >= 3")
            i, j = self.keep
            if i == j or not (0 <= i < self.n_parties and 0 <= j < self.n_parties):
                raise ConfigError(f"keep must be two distinct parties, got {self.keep}")
        if self.kind == "cuts" and self.n_parties < 2:
            raise ConfigError("cuts needs n-parties >= 2")
        if self.kind == "net-audit":
            if not 1 <= self.s <= 3:
                raise ConfigError(f"net-audit supports s in 1..3, got {self.s}")
            for e in self.epsilons or (self.epsilon,):
                if not 0 < e <= 1:
                    raise ConfigError(f"epsilon must lie in (0, 1], got {e}")
        return self

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        clean = {}
        for k, v in data.items():
            if k in ("s_values", "epsilons", "keep") and v is not None:
                v = tuple(v)
            clean[k] = v
        return cls(**clean)


@dataclass
class ResultRecord:
    config: ExperimentConfig
    columns: tuple[str, ...]
    rows: list[tuple]
    summary: dict[str, Any]
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def config_digest(self) -> str:
        return self.config.digest()

    def manifest(self) -> dict[str, Any]:
        return {
            "kind": self.config.kind,
            "seed": self.config.seed,
            "config_digest": self.config_digest,
            "config": self.config.canonical(),
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        return json.dumps({"manifest": self.manifest(), "summary": self.summary}, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        return format_csv(self.config.kind, self.columns, self.rows)


UNITS = {
    "entropy_bits": "bits",
    "min_bits": "bits",
    "ef_lower_bits": "bits",
    "ef_upper_bits": "bits",
    "mutual_info_bits": "bits",
    "bound_bits": "bits",
    "entanglement_bits": "bits",
    "fidelity": "probability",
    "outcome_probability": "probability",
    "lambda_max": "probability",
    "qubits_sent": "qubits",
    "ebits_consumed": "ebits",
    "qubits": "qubits per state",
    "ebits": "ebits per state",
    "p_hat": "probability",
    "cp_low": "probability",
    "cp_high": "probability",
    "tail_rhs": "probability",
}


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (tuple, list)):
        return "|".join(str(x) for x in v)
    return str(v)


def format_csv(kind: str, columns: tuple[str, ...], rows: list[tuple]) -> str:
    """CSV text starting with a comment line that names the kind and column units."""
    units = "; ".join(f"{c}={UNITS[c]}" for c in columns if c in UNITS)
    buf = io.StringIO()
    buf.write(f"# randent {kind}; units: {units or 'none'}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval."""
    if n == 0:
        return 0.0, 1.0
    a = 1 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def describe(values) -> dict[str, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return {"n": 0}
    return {
        "n": int(x.size),
        "mean": float(x.mean()),
        "stderr": float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0,
        "min": float(x.min()),
        "q05": float(np.quantile(x, 0.05)),
        "median": float(np.median(x)),
        "q95": float(np.quantile(x, 0.95)),
        "max": float(x.max()),
    }


# -- per-trial workers (module level so process pools can pickle them) ---------------


def _entropy_of_vector(vec: np.ndarray, shape: BipartiteShape) -> float:
    sv = np.linalg.svd(vec.reshape(shape.dims), compute_uv=False)
    return entropy_from_probabilities(sv**2)


def _blocks(trials: int) -> list[range]:
    return [range(i, min(i + BLOCK, trials)) for i in range(0, trials, BLOCK)]


def _entropy_block(block: range, cfg: ExperimentConfig) -> list[tuple]:
    shape = cfg.shape
    rows = []
    thr = tail_threshold(shape, cfg.alpha) if cfg.kind == "tail" else None
    for t in block:
        e = _entropy_of_vector(haar_vector(shape.total, RngStream(cfg.seed, t)), shape)
        rows.append((t, e) if thr is None else (t, e, e < thr))
    return rows


def _min_ent_trial(t: int, cfg: ExperimentConfig, s: int) -> tuple:
    stream = RngStream(cfg.seed, t)
    sub = random_subspace(cfg.shape, s, stream.spawn(0))
    rep = min_entanglement(sub, rng=stream.spawn(1), options=cfg.options)
    return (t, s, rep.min_bits, rep.converged, rep.restarts)


def _scan_trial(t: int, cfg: ExperimentConfig, s: int) -> tuple:
    stream = RngStream(cfg.seed, t, (s,))
    sub = random_subspace(cfg.shape, s, stream.spawn(0))
    rep = min_entanglement(sub, rng=stream.spawn(1), options=cfg.options)
    return (t, s, rep.min_bits, rep.converged)


def _ef_trial(t: int, cfg: ExperimentConfig) -> tuple:
    stream = RngStream(cfg.seed, t)
    sub = random_subspace(cfg.shape, cfg.s, stream.spawn(0))
    br = ef_bracket(sub, cfg.options, cfg.decomposition_samples, stream.spawn(1))
    return (t, cfg.s, br.lower_bits, br.upper_bits, br.mutual_info_bits)


def _subspace_state(sub, stream: RngStream) -> PureState:
    return sub.embed(haar_vector(sub.dim, stream))


def _sdc_block(block: range, cfg: ExperimentConfig, sub) -> list[tuple]:
    rows = []
    for t in block:
        out = sdc_send(_subspace_state(sub, RngStream(cfg.seed, t)), cfg.shape)
        rows.append((t, out.fidelity, out.qubits_sent, out.ebits_consumed))
    return rows


def _lambda_block(block: range, cfg: ExperimentConfig, sub) -> list[float]:
    out = []
    for t in block:
        st = _subspace_state(sub, RngStream(cfg.seed, t))
        sv = np.linalg.svd(st.amplitudes.reshape(cfg.shape.dims), compute_uv=False)
        out.append(float(sv[0] ** 2))
    return out


def _distill_block(block: range, cfg: ExperimentConfig) -> list[tuple]:
    rows = []
    for t in block:
        stream = RngStream(cfg.seed, t)
        st = haar_state((cfg.d,) * cfg.n_parties, stream.spawn(0))
        res = distill_random_measurement(st, cfg.keep, stream.spawn(1))
        rows.append((t, res.outcome_indices, res.outcome_probability, res.entanglement_bits))
    return rows


def _cuts_block(block: range, cfg: ExperimentConfig) -> list[tuple]:
    rows = []
    for t in block:
        st = haar_state((cfg.d,) * cfg.n_parties, RngStream(cfg.seed, t))
        for c in bipartite_cuts_scan(st):
            rows.append((t, c.cut, c.entropy_bits, c.page_bound))
    return rows


def _flat(blocks: list[list]) -> list:
    return [r for b in blocks for r in b]


# -- dispatch ------------------------------------------------------------------------


def _run_entropy(cfg: ExperimentConfig) -> ResultRecord:
    rows = _flat(ordered_map(partial(_entropy_block, cfg=cfg), _blocks(cfg.trials), cfg.workers))
    shape = cfg.shape
    ents = [r[1] for r in rows]
    summary: dict[str, Any] = {"entropy_bits": describe(ents), "page_lower_bound": page_lower_bound(shape)}
    if cfg.kind == "sample-entropy":
        return ResultRecord(cfg, ("trial", "entropy_bits"), rows, summary)
    k = sum(int(r[2]) for r in rows)
    n = len(rows)
    lo, hi = clopper_pearson(k, n)
    summary.update(
        alpha=cfg.alpha,
        c_const=cfg.c_const,
        beta=beta(shape),
        threshold_bits=tail_threshold(shape, cfg.alpha),
        count_below=k,
        p_hat=k / n if n else float("nan"),
        cp95=[lo, hi],
        tail_rhs=tail_rhs(shape, cfg.alpha, cfg.c_const),
        tail_exponent=tail_exponent(shape, cfg.alpha),
        bound_respected=lo <= tail_rhs(shape, cfg.alpha, cfg.c_const),
    )
    return ResultRecord(cfg, ("trial", "entropy_bits", "below_threshold"), rows, summary)


def _run_min_ent(cfg: ExperimentConfig) -> ResultRecord:
    rows = ordered_map(partial(_min_ent_trial, cfg=cfg, s=cfg.s), range(cfg.trials), cfg.workers)
    mins = [r[2] for r in rows]
    summary = {
        "min_bits": describe(mins),
        "converged_fraction": float(np.mean([r[3] for r in rows])) if rows else float("nan"),
        "log2_da": math.log2(cfg.da),
    }
    return ResultRecord(cfg, ("trial", "s", "min_bits", "converged", "restarts_used"), rows, summary)


def _run_scan(cfg: ExperimentConfig) -> ResultRecord:
    rows: list[tuple] = []
    per_s = {}
    for s in cfg.s_values or (cfg.s,):
        part = ordered_map(partial(_scan_trial, cfg=cfg, s=s), range(cfg.trials), cfg.workers)
        rows.extend(part)
        per_s[str(s)] = describe([r[2] for r in part])
    return ResultRecord(cfg, ("trial", "s", "min_bits", "converged"), rows, {"per_s": per_s})


def _run_ef(cfg: ExperimentConfig) -> ResultRecord:
    rows = ordered_map(partial(_ef_trial, cfg=cfg), range(cfg.trials), cfg.workers)
    summary = {
        "ef_lower_bits": describe([r[2] for r in rows]),
        "ef_upper_bits": describe([r[3] for r in rows]),
        "mutual_info_bits": describe([r[4] for r in rows]),
        "entropy_rho_bits": math.log2(cfg.s),
        "max_mutual_info_bits": 2 * math.log2(cfg.da),
    }
    cols = ("trial", "s", "ef_lower_bits", "ef_upper_bits", "mutual_info_bits")
    return ResultRecord(cfg, cols, rows, summary)


def _fixed_subspace(cfg: ExperimentConfig):
    # one subspace per run, from a stream no trial uses
    return random_subspace(cfg.shape, cfg.s, RngStream(cfg.seed, 0, (2**32,)))


def _run_sdc(cfg: ExperimentConfig) -> ResultRecord:
    sub = _fixed_subspace(cfg)
    rows = _flat(ordered_map(partial(_sdc_block, cfg=cfg, sub=sub), _blocks(cfg.trials), cfg.workers))
    summary = {"fidelity": describe([r[1] for r in rows]), "s": cfg.s}
    return ResultRecord(cfg, ("trial", "fidelity", "qubits_sent", "ebits_consumed"), rows, summary)


def _run_sdc_rates(cfg: ExperimentConfig) -> ResultRecord:
    sub = _fixed_subspace(cfg)
    lams = _flat(ordered_map(partial(_lambda_block, cfg=cfg, sub=sub), _blocks(cfg.trials), cfg.workers))
    s_alice = cfg.da
    rows = []
    running = 0.0
    for t, lam in enumerate(lams):
        running = max(running, lam)
        r = sdc_rates(s_alice, running)
        rows.append((t, lam, running, r.qubits, r.ebits))
    final = sdc_rates(s_alice, running) if lams else None
    summary = {
        "s_alice": s_alice,
        "lambda_max": running,
        "rates": dataclasses.asdict(final) if final else None,
        "pure_corner": dataclasses.asdict(sdc_rates(s_alice, 1.0)),
        "maximally_entangled_corner": dataclasses.asdict(sdc_rates(s_alice, 1.0 / s_alice)),
    }
    return ResultRecord(cfg, ("trial", "lambda_max", "running_lambda_max", "qubits", "ebits"), rows, summary)


def _run_distill(cfg: ExperimentConfig) -> ResultRecord:
    rows = _flat(ordered_map(partial(_distill_block, cfg=cfg), _blocks(cfg.trials), cfg.workers))
    summary = {
        "entanglement_bits": describe([r[3] for r in rows]),
        "pair_max_bits": math.log2(cfg.d),
    }
    cols = ("trial", "outcome", "outcome_probability", "entanglement_bits")
    return ResultRecord(cfg, cols, rows, summary)


def _run_cuts(cfg: ExperimentConfig) -> ResultRecord:
    rows = _flat(ordered_map(partial(_cuts_block, cfg=cfg), _blocks(cfg.trials), cfg.workers))
    per_cut: dict[str, Any] = {}
    for r in rows:
        per_cut.setdefault(_cell(r[1]), []).append(r[2])
    bounds = {_cell(r[1]): r[3] for r in rows}
    summary = {
        "per_cut": {
            k: {**describe(v), "page_lower_bound": bounds[k], "mean_above_bound": float(np.mean(v)) >= bounds[k]}
            for k, v in per_cut.items()
        }
    }
    return ResultRecord(cfg, ("trial", "cut", "entropy_bits", "bound_bits"), rows, summary)


def _run_net_audit(cfg: ExperimentConfig) -> ResultRecord:
    eps_list = cfg.epsilons or (cfg.epsilon,)
    rows = []
    sub = random_subspace(BipartiteShape(2, 2), cfg.s, RngStream(cfg.seed, 0, (2**32,)))
    for e in eps_list:
        net = build_net(sub, e)
        gaps = [
            float(net.covering_gap(haar_vector(cfg.s, RngStream(cfg.seed, t)))[0])
            for t in range(cfg.trials)
        ]
        worst = max(gaps) if gaps else 0.0
        rows.append((e, cfg.s, net.size, ball_net_size(cfg.s, e), worst, worst <= e))
    summary: dict[str, Any] = {"s": cfg.s}
    if len(eps_list) >= 2:
        summary["state_net_slope"] = fit_scaling_exponent(eps_list, [r[2] for r in rows])
        summary["ball_net_slope"] = fit_scaling_exponent(eps_list, [r[3] for r in rows])
        summary["target_slope"] = 2 * cfg.s
    cols = ("epsilon", "s", "state_net_size", "ball_net_size", "max_covering_gap", "covered")
    return ResultRecord(cfg, cols, rows, summary)


DISPATCH: dict[str, Callable[[ExperimentConfig], ResultRecord]] = {
    "sample-entropy": _run_entropy,
    "tail": _run_entropy,
    "min-ent": _run_min_ent,
    "scan-subspace": _run_scan,
    "ef-gap": _run_ef,
    "sdc": _run_sdc,
    "sdc-rates": _run_sdc_rates,
    "distill": _run_distill,
    "cuts": _run_cuts,
    "net-audit": _run_net_audit,
}


def run(config: ExperimentConfig) -> ResultRecord:
    """Validate ``config``, run the experiment and write outputs if ``config.out`` is set.

    Outputs go to ``<out>/<kind>.csv`` (per-trial rows) and ``<out>/<kind>.json``
    (summary and manifest).
    """
    cfg = config.validate()
    record = DISPATCH[cfg.kind](cfg)
    if cfg.out:
        write_record(record, Path(cfg.out))
    return record


def write_record(record: ResultRecord, out_dir: Path) -> dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = record.config.kind
    paths = {"csv": out_dir / f"{kind}.csv", "json": out_dir / f"{kind}.json"}
    paths["csv"].write_text(record.to_csv())
    paths["json"].write_text(record.to_json())
    return paths


# -- plot data -------------------------------------------------------------------------

PLOT_COLUMNS = {
    "tail": ("da", "db", "alpha", "exponent_x", "p_hat", "neg_log_p_hat", "cp_low", "cp_high", "tail_rhs"),
    "sample-entropy": ("da", "db", "mean_bits", "stderr_bits", "page_lower_bound_bits"),
    "scan-subspace": ("s", "mean_bits", "min_bits", "median_bits", "p05_bits"),
    "net-audit": ("s", "epsilon", "log_inv_epsilon", "log_state_net_size", "log_ball_net_size"),
}


def plot_rows(records: list[ResultRecord], kind: str) -> list[tuple]:
    rows: list[tuple] = []
    for rec in records:
        if rec.config.kind != kind:
            raise DomainError(f"record of kind {rec.config.kind!r} passed for plot kind {kind!r}")
        sm, c = rec.summary, rec.config
        if kind == "tail":
            if not rec.rows:
                continue
            p = sm["p_hat"]
            neg = -math.log(p) if p > 0 else math.inf
            rows.append((c.da, c.db, c.alpha, sm["tail_exponent"], p, neg, *sm["cp95"], sm["tail_rhs"]))
        elif kind == "sample-entropy":
            if not rec.rows:
                continue
            e = sm["entropy_bits"]
            rows.append((c.da, c.db, e["mean"], e["stderr"], sm["page_lower_bound"]))
        elif kind == "scan-subspace":
            for s, d in sm["per_s"].items():
                if d.get("n"):
                    rows.append((int(s), d["mean"], d["min"], d["median"], d["q05"]))
        elif kind == "net-audit":
            for r in rec.rows:
                rows.append((r[1], r[0], math.log(1 / r[0]), math.log(r[2]), math.log(r[3])))
    if kind == "tail":
        rows.sort(key=lambda r: r[3])
    return rows


def emit_plotdata(records: ResultRecord | list[ResultRecord], kind: str, path: Path | str) -> Path:
    """Write a tidy CSV series for external plotting.

    For ``tail`` the series pairs ``-ln p_hat`` with ``(d_a d_b - 1) alpha^2 /
    (log2 d_a)^2``, one row per record, sorted by the latter.  An empty record
    list yields a header-only file.
    """
    if kind not in PLOT_COLUMNS:
        raise DomainError(f"no plot series defined for {kind!r}")
    if isinstance(records, ResultRecord):
        records = [records]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(f"plot:{kind}", PLOT_COLUMNS[kind], plot_rows(records, kind)))
    return path


def fit_concentration_slope(records: list[ResultRecord]) -> float:
    """Slope of ``-ln p_hat`` against the tail exponent across tail records.

    Returns ``nan`` when any record has ``p_hat = 0``, since ``-ln 0`` is infinite
    and no finite line fits.
    """
    rows = plot_rows(records, "tail")
    if len(rows) < 2 or any(not math.isfinite(r[5]) for r in rows):
        return float("nan")
    x = np.array([r[3] for r in rows])
    y = np.array([r[5] for r in rows])
    return float(np.polyfit(x, y, 1)[0])
