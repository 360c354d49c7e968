"""Command-line front end.

Exit codes: 0 success, 1 numerical/domain-level failure (agreement violated,
ill-conditioned solve, tolerance missed), 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings

import numpy as np

from . import __version__
from .boundary import agreement_check, classical_to_nonclassical, nonclassical_to_classical, traces_from_solution
from .expr import ExprDomainError
from .grid import MIN_NODES, GridError, read_csv, write_csv
from .norms import lp_norm_2d, sobolev_norm_2d
from .operator import CoefficientError, validate_coefficients
from .problem import ProblemError, classical_block, load_problem, nonclassical_block
from .solver import IllConditionedWarning, SolverError, convergence_study, equivalence_check, format_table, solve

log = logging.getLogger("pseudopar")

OK, FAIL, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _grid_arg(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NX,NY, got {text!r}") from None
    return nx, ny


def _sizes_arg(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _load(args):
    return load_problem(args.file, args.grid, args.p)


def _solve_quiet(spec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        return solve(spec)


def cmd_validate(args) -> int:
    prob = _load(args)
    if prob.kind != "classical":
        raise InputError("validate needs a 'classical' block")
    report = agreement_check(prob.data, args.tol)
    print(report.render())
    return OK if report.passed else FAIL


def cmd_convert(args) -> int:
    prob = _load(args)
    doc = {k: v for k, v in prob.doc.items() if k not in ("classical", "nonclassical", "manufactured")}
    doc["grid"] = {"nx": prob.grid.nx, "ny": prob.grid.ny}
    if args.direction == "to-nonclassical":
        if prob.kind != "classical":
            raise InputError("--direction to-nonclassical needs a 'classical' block")
        z = classical_to_nonclassical(prob.data)
        doc["nonclassical"] = nonclassical_block(z)
        for name, d in z.discrepancies.items():
            print(f"dual-source discrepancy {name:<7} {d:.3e}", file=sys.stderr)
    else:
        if prob.kind != "nonclassical":
            raise InputError("--direction to-classical needs a 'nonclassical' block")
        doc["classical"] = classical_block(nonclassical_to_classical(prob.data))
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return OK


def cmd_solve(args) -> int:
    prob = _load(args)
    res = _solve_quiet(prob.spec(nonclassical=args.nonclassical))
    print(res.summary())
    if prob.kind == "manufactured":
        err = float(np.abs(res.u.values - prob.manufactured.exact(prob.grid).values).max())
        print(f"max_error          {err:.6e}")
    if args.out:
        write_csv(res.u, args.out)
        print(f"wrote {args.out}")
    return OK if res.ok else FAIL


def cmd_equiv(args) -> int:
    prob = _load(args)
    if prob.kind == "classical":
        raise InputError("equiv needs a 'nonclassical' or 'manufactured' block")
    spec = prob.spec(nonclassical=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        report = equivalence_check(spec)
    print(report.render())
    print(report.result.summary())
    passed = report.max_deviation <= args.tol and report.result.ok
    print(f"tol = {args.tol:g}: {'PASS' if passed else 'FAIL'}")
    return OK if passed else FAIL


def cmd_norm(args) -> int:
    prob = _load(args)
    if args.target == "coefficient":
        report = validate_coefficients(prob.coefficients, prob.grid, prob.p)
        print(report.render())
        return OK if report.ok else FAIL
    try:
        u = read_csv(args.target)
    except (OSError, ValueError, GridError) as exc:
        raise InputError(f"cannot read grid function from {args.target}: {exc}") from exc
    print(f"p                 {prob.p:g}")
    print(f"L_p norm          {lp_norm_2d(u, prob.p):.17g}")
    print(f"W_p^(3,3) norm    {sobolev_norm_2d(u, prob.p):.17g}")
    return OK


def cmd_mms(args) -> int:
    prob = _load(args)
    if prob.kind != "manufactured":
        raise InputError("mms needs a 'manufactured' block")
    if len(args.sizes) < 3 or min(args.sizes) < MIN_NODES:
        raise InputError(f"--sizes needs at least three node counts, each >= {MIN_NODES}")
    rows = convergence_study(prob.manufactured, args.sizes, prob.grid.rect, nonclassical=args.nonclassical)
    table = format_table(rows)
    sys.stdout.write(table)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(table)
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="JSON problem file")
    common.add_argument("--grid", type=_grid_arg, metavar="NX,NY", help="override the file's grid")
    common.add_argument("--p", metavar="VALUE|inf", help="norm exponent (overrides the file)")
    common.add_argument("--tol", type=float, default=1e-6,
                        help="tolerance (default 1e-6, sized for 33 nodes on the unit square; "
                             "discretisation error scales like h^2)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pseudopar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the nine corner agreement conditions")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convert", parents=[common], help="convert between classical and non-classical data")
    p.add_argument("--direction", choices=("to-classical", "to-nonclassical"), required=True)
    p.add_argument("--out", help="write the converted problem here instead of stdout")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("solve", parents=[common], help="solve by least-squares collocation")
    p.add_argument("--out", help="solution CSV (x,y,value)")
    p.add_argument("--nonclassical", action="store_true",
                   help="for manufactured files, pose the problem with non-classical data")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("equiv", parents=[common], help="solve from non-classical data and recover it")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("norm", parents=[common], help="norms of a solution CSV or of the coefficients")
    p.add_argument("--target", required=True, help="a solution CSV path, or 'coefficient'")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("mms", parents=[common], help="manufactured-solution convergence study")
    p.add_argument("--sizes", type=_sizes_arg, default=[11, 21, 41], metavar="N1,N2,...")
    p.add_argument("--out", help="study table CSV (h,max_error,order)")
    p.add_argument("--nonclassical", action="store_true")
    p.set_defaults(func=cmd_mms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (InputError, ProblemError, CoefficientError, ExprDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
