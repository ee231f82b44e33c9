"""Command-line interface ``mtls``.

Exit codes: 0 success, 1 a table reported bound violations or too many
skipped trials, 2 non-generic problem, 3 consistent system, 4 input, format
or size errors.
"""

import argparse
import sys

import numpy as np

from . import io
from .condition import condition_report
from .core import (
    MtlsProblem,
    eigen_system_residual,
    solve,
    stationarity_residual,
    stationarity_tolerance,
)
from .errors import ConsistentSystem, DimensionError, MtlsError, NonGeneric, RankDeficient, SizeOverflow
from .experiments import TABLES, finite_difference_jacobian, run_bound_trial, run_first_order_trial, run_table
from .perturbation import jacobian_new
from .structured import read_basis, structured_condition_numbers

EXIT_OK = 0
EXIT_TABLE_FAILURE = 1
EXIT_NONGENERIC = 2
EXIT_CONSISTENT = 3
EXIT_INPUT = 4


def _add_problem_args(p):
    p.add_argument("--matrix", required=True, help="A as Matrix Market (.mtx) or headerless CSV")
    p.add_argument("--rhs", required=True, help="b, one value per line")
    p.add_argument("--n1", type=int, required=True, help="number of leading error-free columns of A")
    p.add_argument("--format", choices=("json", "text"), default="json")


def _load_problem(args):
    A = io.read_matrix(args.matrix)
    b = io.read_vector(args.rhs)
    if A.shape[0] != b.size:
        raise DimensionError(f"A has {A.shape[0]} rows but b has {b.size} entries")
    return MtlsProblem(A, b, args.n1)


def _solution_dict(sol):
    return {
        "x": sol.x,
        "sigma2": sol.sigma2,
        "residual_norm": sol.r_norm,
        "gap": sol.gap,
        "stationarity_residual": stationarity_residual(sol),
        "stationarity_tolerance": stationarity_tolerance(sol),
        "eigen_system_residual": eigen_system_residual(sol),
        "flags": {
            "gap_infinite": sol.problem.n2 == 0,
            "sigma2_is_ls_residual": sol.problem.n2 == 0,
        },
    }


def _text(d, indent=""):
    lines = []
    for key, value in d.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_text(value, indent + "  "))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{indent}{key}: " + " ".join(_scalar(v) for v in value))
        else:
            lines.append(f"{indent}{key}: {_scalar(value)}")
    return lines


def _scalar(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return "-" if v is None else str(v)


def _emit(payload, fmt, out=None):
    out = sys.stdout if out is None else out
    if fmt == "json":
        out.write(io.dumps(payload, indent=2) + "\n")
    else:
        out.write("\n".join(_text(io.jsonable(payload))) + "\n")


def cmd_solve(args):
    sol = solve(_load_problem(args))
    _emit(_solution_dict(sol), args.format)
    return EXIT_OK


def cmd_cond(args):
    sol = solve(_load_problem(args))
    report = condition_report(sol, full_k=True if args.full_k else None)
    payload = {"solution": _solution_dict(sol), "condition": report.to_dict()}
    if args.structure:
        basis = read_basis(args.structure)
        payload["structured"] = structured_condition_numbers(sol, basis).to_dict()
    _emit(payload, args.format)
    return EXIT_OK


def cmd_perturb(args):
    problem = _load_problem(args)
    if args.first_order:
        record = run_first_order_trial(problem, args.eps, args.seed)
    else:
        basis = read_basis(args.structure) if args.structure else None
        record = run_bound_trial(problem, args.eps, args.seed, structured=basis,
                                 full_k=True if args.full_k else None, strict=False)
    if record.skipped == "NonGeneric":
        raise NonGeneric("base or perturbed problem is not generic")
    if record.skipped == "ConsistentSystem":
        raise ConsistentSystem("base or perturbed problem is consistent")
    payload = record.to_dict()
    payload["violations"] = record.violations()
    _emit(payload, args.format)
    return EXIT_OK


def cmd_experiment(args):
    table = run_table(args.table, seed=args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(io.dumps(table, indent=2) + "\n")
    if args.format == "json":
        sys.stdout.write(io.dumps(table, indent=2) + "\n")
    else:
        sys.stdout.write(table.to_text() + "\n")
    try:
        table.check()
    except MtlsError as exc:
        sys.stderr.write(f"mtls: {exc}\n")
        return EXIT_TABLE_FAILURE
    return EXIT_OK


def cmd_oracle_fd(args):
    problem = _load_problem(args)
    sol = solve(problem)
    K = jacobian_new(sol)
    K_fd = finite_difference_jacobian(problem, h=args.h)
    payload = {
        "h": args.h,
        "shape": list(K.shape),
        "rel_error_fro": float(np.linalg.norm(K_fd - K) / np.linalg.norm(K)),
        "max_abs_error": float(np.max(np.abs(K_fd - K))),
        "norm_k_fro": float(np.linalg.norm(K)),
    }
    _emit(payload, args.format)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors share the input-error code; argparse's default 2 means non-generic here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="mtls", description="Mixed LS/TLS solver and condition numbers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem")
    _add_problem_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("cond", help="condition numbers of one problem")
    _add_problem_args(p)
    p.add_argument("--full-k", action="store_true", help="require the explicit Jacobian (exact mixed/componentwise values)")
    p.add_argument("--structure", help="structure basis file for structured condition numbers")
    p.set_defaults(func=cmd_cond)

    p = sub.add_parser("perturb", help="one seeded perturbation trial")
    _add_problem_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--structure", help="perturb the structure parameters of this basis instead of entries")
    p.add_argument("--full-k", action="store_true")
    p.add_argument("--first-order", action="store_true", help="report first-order prediction errors instead of bounds")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("experiment", help="run one of the experiment tables")
    p.add_argument("table", choices=sorted(TABLES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the full JSON report here")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="verification oracles")
    osub = p.add_subparsers(dest="oracle", required=True)
    q = osub.add_parser("fd", help="finite-difference check of the Jacobian")
    _add_problem_args(q)
    q.add_argument("--h", type=float, default=1e-6)
    q.set_defaults(func=cmd_oracle_fd)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonGeneric as exc:
        sys.stderr.write(f"mtls: non-generic problem: {exc}\n")
        return EXIT_NONGENERIC
    except ConsistentSystem as exc:
        sys.stderr.write(f"mtls: consistent system: {exc}\n")
        return EXIT_CONSISTENT
    except (io.InputFormatError, DimensionError, RankDeficient, SizeOverflow, OSError, ValueError) as exc:
        sys.stderr.write(f"mtls: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
