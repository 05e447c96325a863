"""Command-line entry point: ``randent <kind> [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .errors import DomainError, FeasibilityError
from .experiments import KINDS, ConfigError, ExperimentConfig, emit_plotdata, PLOT_COLUMNS, run

EXIT_OK, EXIT_USAGE, EXIT_FEASIBILITY, EXIT_DOMAIN = 0, 2, 3, 4


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="randent",
        description="Monte Carlo and optimization studies of entanglement in random states and subspaces.",
    )
    p.add_argument("kind", choices=KINDS, nargs="?", help="experiment to run")
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--da", type=int)
    p.add_argument("--db", type=int)
    p.add_argument("--d", type=int, help="local dimension of each party (distill, cuts)")
    p.add_argument("--n-parties", dest="n_parties", type=int)
    p.add_argument("--s", type=int, help="subspace dimension")
    p.add_argument("--s-values", dest="s_values", type=_int_list, help="comma list for scan-subspace")
    p.add_argument("--alpha", type=float)
    p.add_argument("--c-const", dest="c_const", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--epsilons", type=_float_list, help="comma list for net-audit")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--decomposition-samples", dest="decomposition_samples", type=int)
    p.add_argument("--keep", type=_int_list, help="pair of parties kept in distill, e.g. 0,1")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=str, help="output directory for <kind>.csv and <kind>.json")
    p.add_argument("--format", choices=("csv", "json"), help="what to print on stdout")
    p.add_argument("--plot", type=Path, help="also write a plot-data CSV to this path")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            data.update(json.loads(args.config.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("config", "plot") or value is None:
            continue
        data[key] = value
    if "kind" not in data:
        raise ConfigError("no experiment kind given (positional argument or 'kind' in --config)")
    return ExperimentConfig.from_mapping(data)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        record = run(cfg)
        if args.plot:
            if cfg.kind not in PLOT_COLUMNS:
                raise ConfigError(f"no plot series for {cfg.kind}")
            emit_plotdata(record, cfg.kind, args.plot)
    except (ConfigError, TypeError) as exc:
        print(f"randent: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FeasibilityError as exc:
        print(f"randent: infeasible: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except DomainError as exc:
        print(f"randent: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    sys.stdout.write(record.to_csv() if cfg.format == "csv" else record.to_json() + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
