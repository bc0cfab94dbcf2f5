"""Command-line front end.

    eedesign evaluate    --scenario FILE --M 193 --K 21
    eedesign optimize    --scenario FILE --method both --out surface.csv
    eedesign sweep       --scenario FILE --out sweep.csv [--mc]
    eedesign mc-validate --scenario FILE --out mc.csv --trials N --seed S

Exit codes: 0 success, 2 usage error, 3 scenario parse error,
4 infeasible design, 5 invalid parameter, 1 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .errors import ConfigError, InfeasibleError, InvalidParameterError
from .scenario import default_scenario, load_scenario
from .sweep import (
    DEFAULT_PRECISION,
    mc_csv,
    run_evaluate,
    run_mc_validate,
    run_optimize,
    run_sweep,
    surface_csv,
    sweep_csv,
    trajectory_csv,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_INVALID = 5

log = logging.getLogger("eedesign")


def _write(path: Optional[str], text: str):
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote %s", path)


def _say(args, text=""):
    if not args.quiet:
        print(text)


def _cmd_evaluate(args, scn) -> int:
    rep = run_evaluate(scn, args.M, args.K, args.lam)
    r, d = rep.result, rep.design
    _say(args, f"design            M={int(d.M)}  K={int(d.K)}  lambda={d.lam:g} AP/m^2")
    _say(args, f"rho*              {d.rho:.6g} J/symbol per UE")
    _say(args, f"radiated power    {rep.row.total_radiated_power_watt * 1e3:.2f} mW per AP")
    _say(args, f"SE bound          {r.se_bound:.6f} bit/symbol/UE")
    _say(args, f"ASE               {r.ase:.6g} bit/symbol/m^2")
    _say(args, f"AEC               {r.aec:.6g} J/symbol/m^2")
    _say(args, f"EE                {r.ee / 1e6:.4f} Mbit/Joule")
    _write(args.out, sweep_csv([rep.row], args.precision))
    return EXIT_OK


def _cmd_optimize(args, scn) -> int:
    rep = run_optimize(scn, args.method, args.lam)
    h = scn.hardware_profile()
    if rep.grid is not None:
        b = rep.grid.best
        (m0, m1), (k0, k1) = rep.grid.bounds_searched
        _say(args, f"grid search       M in [{m0}, {m1}], K in [{k0}, {k1}]")
        _say(args, f"  optimum         (M, K) = ({b.M}, {b.K})  EE = {rep.grid.ee / 1e6:.4f} Mbit/Joule")
        _say(args, f"  radiated power  {b.K * b.rho / h.S * 1e3:.2f} mW")
    if rep.alternating is not None:
        o = rep.alternating
        path = " -> ".join(f"({t.M},{t.K})" for t in o.trajectory)
        _say(args, f"alternating       {o.status} after {o.iterations} iterations")
        _say(args, f"  path            {path}")
        _say(args, f"  result          (M, K) = ({o.design.M}, {o.design.K})  EE = {o.ee / 1e6:.4f} Mbit/Joule")
    if rep.relative_gap is not None:
        _say(args, f"relative gap      {100 * rep.relative_gap:.3f} %")

    if args.out:
        out = Path(args.out)
        if rep.grid is not None:
            _write(str(out), surface_csv(rep.grid, args.precision))
            if rep.alternating is not None:
                traj = out.with_name(out.stem + "_trajectory" + out.suffix)
                _write(str(traj), trajectory_csv(rep.alternating, args.precision))
        else:
            _write(str(out), trajectory_csv(rep.alternating, args.precision))
    return EXIT_OK


def _cmd_sweep(args, scn) -> int:
    rows = run_sweep(scn, with_mc=args.mc, trials=args.trials, seed=args.seed, workers=args.workers)
    text = sweep_csv(rows, args.precision)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    n_bad = sum(r.status != "ok" for r in rows)
    log.info("%d rows, %d infeasible", len(rows), n_bad)
    return EXIT_OK


def _cmd_mc_validate(args, scn) -> int:
    rows = run_mc_validate(scn, trials=args.trials, seed=args.seed, workers=args.workers)
    text = mc_csv(rows, args.precision)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    violations = [r for r in rows if r.bound_violation]
    _say(args, f"{len(rows)} points, {len(violations)} bound violations")
    for r in violations:
        _say(args, f"  bound {r.se_bound:.4f} above MC {r.se_mc_mean:.4f} +/- {r.se_mc_halfwidth:.4f} "
                   f"at {r.variable}={r.swept_value:g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario YAML file (default: packaged reference scenario)")
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--quiet", action="store_true", help="suppress the human summary")
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION,
                        help="significant digits in CSV output")
    common.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="AP density [AP/m^2]; defaults to constraint.lambda_max")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--seed", type=int, default=None, help="Monte-Carlo master seed (u64)")
    mc.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials per point")
    mc.add_argument("--workers", type=int, default=1, help="worker processes for MC trials")

    parser = argparse.ArgumentParser(prog="eedesign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="EE breakdown at a given (M, K)")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("optimize", parents=[common], help="optimize (M, K) at fixed AP density")
    p.add_argument("--method", choices=("alternating", "grid", "both"), default="both")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", parents=[common, mc], help="parameter sweep to CSV")
    p.add_argument("--mc", action="store_true", help="add Monte-Carlo EE columns")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("mc-validate", parents=[common, mc], help="Monte-Carlo check of the SE bound")
    p.set_defaults(func=_cmd_mc_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s")
    try:
        scn = load_scenario(args.scenario) if args.scenario else default_scenario()
        return args.func(args, scn)
    except ConfigError as exc:
        print(f"error: scenario: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
