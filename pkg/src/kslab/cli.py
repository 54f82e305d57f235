"""Command-line surface.

Verbs: run, sweep, probe-gn, verify, mms, thresholds.
Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import diagnostics as diag
from . import experiment as exp
from . import model as _model
from . import solver as _solver
from .errors import ConfigError, InvariantViolation, NumericalError
from .grid import Grid


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kslab")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one configured scenario")
    p_run.add_argument("config")
    p_run.add_argument("--no-resume", action="store_true", help="ignore any checkpoint marker")

    p_sweep = sub.add_parser("sweep", help="run the cartesian sweep in a spec file")
    p_sweep.add_argument("spec")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_gn = sub.add_parser("probe-gn", help="empirically probe the interpolation constant")
    p_gn.add_argument("--nx", type=int, default=64)
    p_gn.add_argument("--ny", type=int, default=64)
    p_gn.add_argument("--lx", type=float, default=1.0)
    p_gn.add_argument("--ly", type=float, default=1.0)
    p_gn.add_argument("--samples", type=int, default=64)
    p_gn.add_argument("--mode", choices=diag.GN_MODES, default="ladyzhenskaya")
    p_gn.add_argument("--seed", type=int, default=0)
    p_gn.add_argument("--safety", type=float, default=1.5)

    p_verify = sub.add_parser("verify", help="re-check run invariants from the CSV")
    p_verify.add_argument("run_dir")

    p_mms = sub.add_parser("mms", help="manufactured-solution convergence table")
    p_mms.add_argument("--system", choices=["diffusion", "transformed", "original"], default="transformed")
    p_mms.add_argument("--levels", type=int, default=3)
    p_mms.add_argument("--nx0", type=int, default=16)

    p_thr = sub.add_parser("thresholds", help="print the smallness-threshold report")
    p_thr.add_argument("--chi", type=float, required=True)
    p_thr.add_argument("--beta", type=float, required=True)
    p_thr.add_argument("--mass", type=float, required=True)
    p_thr.add_argument("--cgn", type=float, required=True)
    p_thr.add_argument("--M", type=float, default=None, help="grad-w L2 budget; default mid-window")
    p_thr.add_argument("--area", type=float, default=1.0)
    p_thr.add_argument("--a", type=float, default=0.5)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    if args.verb == "run":
        cfg = exp.parse_config(args.config)
        for warning in cfg.warnings:
            print(f"warning: {warning}")
        status = exp.run_scenario(cfg, resume=not args.no_resume)
        if status == 0:
            print(f"run complete: {cfg.out_dir}")
        return status

    if args.verb == "sweep":
        spec = exp.parse_sweep(args.spec)
        status = exp.run_sweep(spec, workers=args.workers)
        print(f"sweep complete: {spec.base.out_dir} (status {status})")
        return status

    if args.verb == "probe-gn":
        grid = Grid(args.nx, args.ny, args.lx, args.ly)
        value = diag.gn_probe(grid, args.samples, args.mode, seed=args.seed)
        print(f"probe max ratio: {value!r}")
        print(f"working constant (x{args.safety}): {value * args.safety!r}")
        return 0

    if args.verb == "verify":
        result = exp.verify_run_dir(args.run_dir)
        print(json.dumps(result, indent=2))
        ok = result["mass_conservation"] and result["record_invariants"] and result["min_v_positive"]
        return 0 if ok else 4

    if args.verb == "mms":
        table = _solver.mms_convergence(args.system, levels=args.levels, nx0=args.nx0)
        orders = _solver.observed_orders(table)
        print("h,error")
        for h, e in table:
            print(f"{h!r},{e!r}")
        print("observed orders:", ", ".join(f"{o:.3f}" for o in orders))
        return 0

    if args.verb == "thresholds":
        params = _model.Params(chi=args.chi, beta=args.beta, domain_area=args.area)
        m_upper = 9.0 / (17.0 * 32.0 * args.cgn)
        m_budget = args.M if args.M is not None else 0.5 * m_upper
        rep = _model.threshold_boundedness(args.mass, params, args.cgn, m_budget, a=args.a)
        print(json.dumps(rep.__dict__, indent=2))
        return 0

    raise AssertionError(f"unhandled verb {args.verb}")


if __name__ == "__main__":
    sys.exit(main())
