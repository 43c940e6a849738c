"""Command line front end.

Subcommands: ``run`` (one Monte-Carlo point), ``sweep`` (a named preset),
``design`` (solve and print an exploration design for an arms CSV), and
``bound`` (print a theoretical error bound).  Exit codes: 0 success, 2
configuration or input error, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .bounds import (BoundInputs, bound_glm_general, bound_glm_gopt,
                     bound_linear_general, bound_linear_gopt)
from .design import allocate_budget, fw_d_optimal, fw_g_optimal
from .errors import (BudgetTooSmallError, ConfigurationError,
                     DegenerateInputError, FbbaiError, SingularDesignError,
                     UndefinedBoundError)
from .harness import (PRESETS, VARIANTS, SweepRow, bound_for_source,
                      family_source, format_csv, format_json, mc_accuracy,
                      run_preset, write_csv, write_json)
from .instances import load_features, load_instance_csv

FAMILIES = ("adaptive", "static", "sphere", "logistic", "corner", "csv")

CONFIG_ERRORS = (ConfigurationError, DegenerateInputError, SingularDesignError,
                 BudgetTooSmallError, UndefinedBoundError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbbai",
        description="Fixed-budget best-arm identification experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one Monte-Carlo point")
    run.add_argument("--family", required=True, choices=FAMILIES)
    run.add_argument("--variant", required=True, choices=sorted(VARIANTS))
    run.add_argument("--budget", required=True, type=int)
    run.add_argument("--replications", type=int, default=1000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--eta", type=float, default=2.0)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--out", default=None, help="output path (default stdout)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--no-wall-time", action="store_true",
                     help="omit the wall-time column for byte-stable output")
    run.add_argument("--K", type=int, default=None)
    run.add_argument("--d", type=int, default=None)
    run.add_argument("--delta", type=float, default=None,
                     help="gap parameter of the static family")
    run.add_argument("--omega", type=float, default=None,
                     help="angle parameter of the adaptive family")
    run.add_argument("--sigma2", type=float, default=None)
    run.add_argument("--features", default=None,
                     help="arms CSV for --family csv")
    run.add_argument("--theta", default=None,
                     help="parameter vector file for --family csv")
    run.add_argument("--model", choices=("linear", "glm"), default="linear",
                     help="reward model for --family csv")
    run.add_argument("--bernoulli", action="store_true",
                     help="Bernoulli rewards for --family csv with --model glm")

    sweep = sub.add_parser("sweep", help="run a named preset")
    sweep.add_argument("--preset", required=True, choices=sorted(PRESETS))
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--replications", type=int, default=None)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--format", choices=("csv", "json", "both"),
                       default="both")
    sweep.add_argument("--no-wall-time", action="store_true")

    design = sub.add_parser("design", help="solve an exploration design")
    design.add_argument("--arms", required=True, help="arms CSV (header x1..xd)")
    design.add_argument("--budget", type=int, default=None,
                        help="also print a rounded allocation of this size")
    design.add_argument("--criterion", choices=("g", "d"), default="g")
    design.add_argument("--tol", type=float, default=0.01)
    design.add_argument("--iterations", type=int, default=None)

    bound = sub.add_parser("bound", help="print a theoretical error bound")
    bound.add_argument("--K", required=True, type=int)
    bound.add_argument("--d", required=True, type=int)
    bound.add_argument("--eta", type=float, default=2.0)
    bound.add_argument("--sigma2", required=True, type=float)
    bound.add_argument("--delta-min", required=True, type=float)
    bound.add_argument("--B", type=int, default=None)
    bound.add_argument("--c-min", type=float, default=None,
                       help="mean-function derivative floor (selects GLM bound)")
    bound.add_argument("--norm-terms", default=None,
                       help="comma-separated per-stage norms (selects general form)")
    return parser


def _family_params(args: argparse.Namespace) -> dict:
    params: dict = {}
    if args.family == "adaptive":
        if args.d is not None:
            params["d"] = args.d
        if args.omega is not None:
            params["omega"] = args.omega
        if args.sigma2 is not None:
            params["sigma2"] = args.sigma2
    elif args.family == "static":
        params["delta"] = 1.0 if args.delta is None else args.delta
        if args.K is not None:
            params["K"] = args.K
        if args.sigma2 is not None:
            params["sigma2"] = args.sigma2
    elif args.family == "sphere":
        params["K"] = 16 if args.K is None else args.K
        params["d"] = 10 if args.d is None else args.d
        if args.sigma2 is not None:
            params["sigma2"] = args.sigma2
    elif args.family == "logistic":
        params["K"] = 8 if args.K is None else args.K
        params["d"] = 10 if args.d is None else args.d
    elif args.family == "corner":
        params["K"] = 10 if args.K is None else args.K
        if args.sigma2 is not None:
            params["sigma2"] = args.sigma2
    return params


def _cmd_run(args: argparse.Namespace) -> int:
    if args.family == "csv":
        if not args.features or not args.theta:
            raise ConfigurationError(
                "--family csv needs --features and --theta")
        source = load_instance_csv(args.features, args.theta,
                                   model=args.model,
                                   sigma2=args.sigma2 if args.sigma2 is not None else 1.0,
                                   bernoulli=args.bernoulli)
    else:
        source = family_source(args.family, _family_params(args))
    start = time.perf_counter()
    res = mc_accuracy(source, args.variant, args.budget, args.replications,
                      args.seed, family=args.family, eta=args.eta,
                      workers=args.workers)
    wall = time.perf_counter() - start
    row = SweepRow(family=args.family, variant=args.variant,
                   param_name="budget", param_value=float(args.budget),
                   R=args.replications, successes=res.successes,
                   accuracy=res.accuracy, stderr=res.stderr,
                   bound_delta=bound_for_source(source, args.budget, args.eta),
                   aborts=res.aborts, wall_time_s=wall)
    include_wall = not args.no_wall_time
    if args.format == "json":
        text = format_json([row], include_wall_time=include_wall)
    else:
        text = format_csv([row], include_wall_time=include_wall)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    result = run_preset(args.preset, out_dir=None,
                        replications=args.replications, seed=args.seed,
                        workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    include_wall = not args.no_wall_time
    if args.format in ("csv", "both"):
        write_csv(out / f"{args.preset}.csv", result.rows,
                  include_wall_time=include_wall)
    if args.format in ("json", "both"):
        write_json(out / f"{args.preset}.json", result.rows,
                   include_wall_time=include_wall)
    print(f"wrote {len(result.rows)} rows to {out}", file=sys.stderr)
    return 0


def _cmd_design(args: argparse.Namespace) -> int:
    arms = load_features(args.arms)
    solver = fw_g_optimal if args.criterion == "g" else fw_d_optimal
    design = solver(arms, iterations=args.iterations, tol=args.tol)
    counts = None
    if args.budget is not None:
        counts = allocate_budget(args.budget, design, arms).counts
    print(f"arms={arms.shape[0]} dim={arms.shape[1]} "
          f"g={design.g_value:.6f} certified={design.certified} "
          f"iterations={design.iterations_used}", file=sys.stderr)
    header = "arm,weight" + (",count" if counts is not None else "")
    print(header)
    for i, w in enumerate(design.weights):
        line = f"{i},{w:.12g}"
        if counts is not None:
            line += f",{counts[i]}"
        print(line)
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    norm_terms = None
    if args.norm_terms:
        norm_terms = tuple(float(v) for v in args.norm_terms.split(","))
    inputs = BoundInputs(K=args.K, d=args.d, eta=args.eta, sigma2=args.sigma2,
                         delta_min=args.delta_min, budget=args.B,
                         c_min=args.c_min if args.c_min is not None else 1.0,
                         norm_terms=norm_terms)
    glm = args.c_min is not None
    if norm_terms is not None:
        value = bound_glm_general(inputs) if glm else bound_linear_general(inputs)
    else:
        value = bound_glm_gopt(inputs) if glm else bound_linear_gopt(inputs)
    print(f"{value:.12g}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "design": _cmd_design,
                "bound": _cmd_bound}
    try:
        return handlers[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"fbbai: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"fbbai: {exc}", file=sys.stderr)
        return 2
    except FbbaiError as exc:
        print(f"fbbai: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
