"""Command-line entry points.

Subcommands mirror the runner's theorems:

    sharprem eigensolve       --points 513
    sharprem verify-steklov   --m 1 --parity even --backend spectral --refinements 3
    sharprem verify-friedrichs --m 2 --family heisenberg --phi manufactured
    sharprem sigma-table      --max-m 20
    sharprem constant-check   --trials 100 --seed 0
    sharprem run              --config experiment.cfg
    sharprem regression

Every run writes ``report.json`` (and a convergence CSV for sweeps) into
``--out``.  Exit codes: 0 all assertions pass, 1 an assertion failed,
2 invalid input.  ``SHARPREM_THREADS`` caps BLAS/FFT thread pools.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError, SharpremError
from .io import load_config, write_json
from .runner import ExperimentConfig, run
from .regression import load_golden, regression_suite, write_golden


def _apply_thread_env():
    threads = os.environ.get("SHARPREM_THREADS")
    if not threads:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, threads)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(threads))
    except (ImportError, ValueError):
        pass


_DOMAIN_KEYS = ("lower", "upper", "points", "mask", "mask_center", "mask_radius",
                "mask_radius_inner", "mask_radius_outer")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--domain", help="config file supplying only the domain keys")
    p.add_argument("--out", help="output directory for report.json and tables")
    p.add_argument("--quiet", action="store_true", help="suppress console summary")
    p.add_argument("--lower", help="comma-separated lower bounds")
    p.add_argument("--upper", help="comma-separated upper bounds")
    p.add_argument("--points", help="comma-separated points per axis")
    p.add_argument("--mask", choices=("box", "disk", "annulus"))
    p.add_argument("--family", choices=("euclidean", "heisenberg"))
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharprem",
        description="Grid verification of sharp remainder identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigensolve", help="Dirichlet ground state of -L")
    _add_common(p)
    p.add_argument("--eigen-tol", type=float)

    p = sub.add_parser("verify-steklov", help="pointwise + integrated identities")
    _add_common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--backend", choices=("fd", "spectral"))
    p.add_argument("--refinements", type=int)

    p = sub.add_parser("verify-friedrichs", help="power-of-two representation formula")
    _add_common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--phi", choices=("eigen", "manufactured"))
    p.add_argument("--backend", choices=("fd", "spectral"))
    p.add_argument("--refinements", type=int)

    p = sub.add_parser("sigma-table", help="sigma_m constants and asymptotics")
    _add_common(p)
    p.add_argument("--max-m", type=int, dest="max_m")

    p = sub.add_parser("constant-check", help="sharpness of the L2 constant")
    _add_common(p)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("run", help="run an experiment from a config file")
    _add_common(p)

    p = sub.add_parser("regression", help="pinned fixtures vs golden values")
    p.add_argument("--golden", help="alternative golden JSON")
    p.add_argument("--write-golden", help="regenerate the golden file at PATH")
    p.add_argument("--only", help="comma-separated fixture names")
    p.add_argument("--quiet", action="store_true")

    return parser


_THEOREM_BY_COMMAND = {
    "eigensolve": "eigensolve",
    "verify-steklov": None,  # depends on --parity
    "verify-friedrichs": "friedrichs",
    "sigma-table": "sigma_table",
    "constant-check": "constant_check",
}


def _merge_config(args) -> ExperimentConfig:
    cfg = {}
    if args.config:
        cfg.update(load_config(args.config))
    if getattr(args, "domain", None):
        dom = load_config(args.domain)
        cfg.update({k: v for k, v in dom.items() if k in _DOMAIN_KEYS})
    if args.command != "run":
        theorem = _THEOREM_BY_COMMAND[args.command]
        if args.command == "verify-steklov":
            theorem = f"steklov_{args.parity}"
        cfg["theorem"] = theorem
    flag_map = {
        "m": "m",
        "backend": "backend",
        "family": "family",
        "lower": "lower",
        "upper": "upper",
        "points": "points",
        "mask": "mask",
        "refinements": "refinements",
        "seed": "seed",
        "trials": "trials",
        "max_m": "max_m",
        "phi": "phi",
        "eigen_tol": "eigen_tol",
    }
    for attr, key in flag_map.items():
        val = getattr(args, attr, None)
        if val is not None:
            cfg[key] = val
    # convenient defaults for bare invocations
    cfg.setdefault("points", "513" if cfg.get("theorem") in ("eigensolve", "constant_check") else "65")
    return ExperimentConfig.from_mapping(cfg)


def _cmd_regression(args) -> int:
    if args.write_golden:
        payload = write_golden(args.write_golden)
        print(f"pinned {len(payload)} fixtures to {args.write_golden}")
        return 0
    golden = load_golden(args.golden) if args.golden else None
    names = args.only.split(",") if args.only else None
    summary = regression_suite(golden=golden, names=names)
    if not args.quiet:
        for line in summary.lines():
            print(line)
    return 0 if summary.passed else 1


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "regression":
        return _cmd_regression(args)
    out_dir = Path(args.out) if args.out else None
    try:
        config = _merge_config(args)
    except (ConfigError, FileNotFoundError) as e:
        payload = {"error": str(e), "kind": type(e).__name__}
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            write_json(out_dir / "error.json", payload)
        print(json.dumps(payload), file=sys.stderr)
        return 2
    try:
        result = run(config, out_dir=out_dir, quiet=args.quiet)
    except SharpremError as e:
        payload = {"error": str(e), "kind": type(e).__name__}
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            write_json(out_dir / "error.json", payload)
        print(json.dumps(payload), file=sys.stderr)
        return 2
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
