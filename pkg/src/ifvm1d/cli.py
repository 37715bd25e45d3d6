"""Command line interface: `run`, `dump-basis`, `dump-profile`, `reproduce`.

Tables are written as CSV or markdown; every report additionally renders a
matplotlib figure next to the delimited output.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (
    ConfigError,
    ExperimentConfig,
    basis_csv,
    dump_basis,
    dump_profile,
    load_config_file,
    parse_number,
    profile_csv,
    run_experiment,
    table_config,
)
from .solver import SolverError

EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _add_model_flags(sub):
    sub.add_argument("--degree", type=int, help="polynomial degree p")
    sub.add_argument("--beta-minus", type=parse_number)
    sub.add_argument("--beta-plus", type=parse_number)
    sub.add_argument("--alpha", type=parse_number,
                     help="interface location; accepts tokens like pi/6")
    sub.add_argument("--gamma", type=parse_number)
    sub.add_argument("--c-coef", type=parse_number, dest="c")
    sub.add_argument("--kind", choices=("smooth", "nonsmooth"))
    sub.add_argument("--m", type=int, help="flux-jump order for nonsmooth runs")
    sub.add_argument("--method", choices=("ifvm", "ifem"))
    sub.add_argument("--format", choices=("csv", "markdown"), dest="fmt")


def _config_from_args(args, base=None) -> ExperimentConfig:
    cfg = {} if base is None else base
    if getattr(args, "config", None):
        cfg = {**cfg, **load_config_file(args.config)}
    for key in ("degree", "beta_minus", "beta_plus", "alpha", "gamma", "c",
                "kind", "m", "method", "fmt"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "mesh", None):
        cfg["mesh"] = tuple(int(t) for t in args.mesh.split(","))
    return ExperimentConfig(**cfg)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _figure_path(out: Path) -> Path:
    return out.with_suffix(".png")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifvm1d",
        description="High-order immersed finite volume solver and "
                    "convergence-study runner for 1D elliptic interface problems",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run a convergence experiment")
    p_run.add_argument("--config", help="flat key=value config file")
    _add_model_flags(p_run)
    p_run.add_argument("--mesh", help="comma-separated list of 1/h values")
    p_run.add_argument("--out", required=True, help="output table path")

    p_basis = subs.add_parser("dump-basis",
                              help="sample the generalized basis on [-1, 1]")
    p_basis.add_argument("--degree", type=int, required=True)
    p_basis.add_argument("--beta-minus", type=parse_number, required=True)
    p_basis.add_argument("--beta-plus", type=parse_number, required=True)
    p_basis.add_argument("--alpha-hat", type=parse_number, required=True)
    p_basis.add_argument("--out", required=True)

    p_prof = subs.add_parser("dump-profile",
                             help="pointwise error profile on a single mesh")
    p_prof.add_argument("--config", help="flat key=value config file")
    _add_model_flags(p_prof)
    p_prof.add_argument("--mesh", required=True, help="single 1/h value")
    p_prof.add_argument("--out", required=True)

    p_rep = subs.add_parser("reproduce",
                            help="run a pre-baked reference table config")
    p_rep.add_argument("--table", type=int, required=True, choices=range(1, 11))
    p_rep.add_argument("--format", choices=("csv", "markdown"), dest="fmt")
    p_rep.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _config_from_args(args)
            table = run_experiment(config)
            out = Path(args.out)
            _write(out, table.render())
            from .plotting import save_convergence_figure
            save_convergence_figure(table, _figure_path(out))
        elif args.command == "dump-basis":
            dump = dump_basis(args.degree, args.beta_minus, args.beta_plus,
                              args.alpha_hat)
            out = Path(args.out)
            _write(out, basis_csv(dump))
            from .plotting import save_basis_figure
            save_basis_figure(dump, _figure_path(out))
        elif args.command == "dump-profile":
            mesh_vals = args.mesh.split(",")
            if len(mesh_vals) != 1:
                raise ConfigError("dump-profile takes exactly one mesh")
            args.mesh = None
            config = _config_from_args(args)
            profile = dump_profile(config, int(mesh_vals[0]))
            out = Path(args.out)
            _write(out, profile_csv(profile))
            from .plotting import save_profile_figure
            save_profile_figure(profile, _figure_path(out))
        elif args.command == "reproduce":
            config = table_config(args.table)
            if args.fmt:
                config = replace(config, fmt=args.fmt)
            table = run_experiment(config)
            out = Path(args.out)
            _write(out, table.render())
            from .plotting import save_convergence_figure
            save_convergence_figure(table, _figure_path(out))
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
