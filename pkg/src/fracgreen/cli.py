"""Command line surface: build kernels, solve problems, run checks.

Exit codes: 0 ok, 1 verification failure, 2 bad input, 3 singular problem,
4 no convergence, 5 existence check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import existence, expr, green, oracle, rtransform, solver
from .grid import GridFunction, make_forcing_grid
from .mittag import MittagLefflerParams, ml
from .problem import ProblemSpec
from .special import falling_factorial, gamma

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_SINGULAR = 3
EXIT_NO_CONVERGENCE = 4
EXIT_CHECK_FAIL = 5

_PROBLEM_KEYS = {
    "upsilon",
    "mu",
    "alpha",
    "b",
    "h",
    "h_expr",
    "f_expr",
    "g_expr",
    "psi_expr",
    "m",
}


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT) -> None:
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class Problem:
    """Resolved problem file: spec plus optional forcing/check data."""

    spec: ProblemSpec
    h: GridFunction | None = None
    f: solver.NonlinearRHS | None = None
    g_expr: str | None = None
    psi_expr: str | None = None
    m: float | None = None
    raw: dict | None = None


def _spec_from_fields(fields: dict) -> ProblemSpec:
    try:
        return ProblemSpec(
            upsilon=float(fields["upsilon"]),
            mu=float(fields["mu"]),
            alpha=float(fields["alpha"]),
            b=int(fields["b"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"invalid problem parameters: {exc}") from exc


def _h_from_values(spec: ProblemSpec, values) -> GridFunction:
    grid = make_forcing_grid(spec)
    try:
        return GridFunction(grid, np.array([float(v) for v in values]))
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid h values: {exc}") from exc


def _h_from_expr(spec: ProblemSpec, source: str) -> GridFunction:
    try:
        tree = expr.parse(source, allowed_vars={"t"})
        grid = make_forcing_grid(spec)
        vals = [expr.evaluate(tree, {"t": p}) for p in grid.points()]
    except (expr.ExprSyntaxError, expr.DomainError) as exc:
        raise CLIError(f"invalid h_expr: {exc}") from exc
    return GridFunction(grid, np.array(vals))


def load_problem(fields: dict) -> Problem:
    """Validate and resolve a problem-file dictionary."""
    if "problem" in fields and isinstance(fields["problem"], dict):
        fields = fields["problem"]
    unknown = set(fields) - _PROBLEM_KEYS
    if unknown:
        raise CLIError(f"unknown problem keys: {sorted(unknown)}")
    spec = _spec_from_fields(fields)
    modes = [k for k in ("h", "h_expr", "f_expr") if fields.get(k) is not None]
    if len(modes) != 1:
        raise CLIError(
            "exactly one of h, h_expr, f_expr must be present, "
            f"got {modes or 'none'}"
        )
    problem = Problem(spec=spec, raw=dict(fields))
    if fields.get("h") is not None:
        h = fields["h"]
        if len(h) != spec.b + 2:
            raise CLIError(f"h must have {spec.b + 2} entries, got {len(h)}")
        problem.h = _h_from_values(spec, h)
    elif fields.get("h_expr") is not None:
        problem.h = _h_from_expr(spec, fields["h_expr"])
    else:
        try:
            problem.f = solver.NonlinearRHS.from_expression(fields["f_expr"])
        except expr.ExprSyntaxError as exc:
            raise CLIError(f"invalid f_expr: {exc}") from exc
    problem.g_expr = fields.get("g_expr")
    problem.psi_expr = fields.get("psi_expr")
    if fields.get("m") is not None:
        problem.m = float(fields["m"])
    return problem


def _load_problem_file(path: str) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            fields = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read problem file {path!r}: {exc}") from exc
    if not isinstance(fields, dict):
        raise CLIError("problem file must contain a JSON object")
    return load_problem(fields)


def _spec_from_args(args) -> ProblemSpec:
    missing = [
        name
        for name in ("upsilon", "mu", "alpha", "b")
        if getattr(args, name) is None
    ]
    if missing:
        raise CLIError(f"missing required flags: {', '.join('--' + m for m in missing)}")
    try:
        return ProblemSpec(
            upsilon=args.upsilon, mu=args.mu, alpha=args.alpha, b=args.b
        )
    except ValueError as exc:
        raise CLIError(str(exc)) from exc


def _resolve_spec(args) -> tuple[ProblemSpec, Problem | None]:
    if getattr(args, "problem", None):
        problem = _load_problem_file(args.problem)
        return problem.spec, problem
    return _spec_from_args(args), None


def _problem_echo(spec: ProblemSpec, problem: Problem | None) -> dict:
    if problem is not None and problem.raw is not None:
        return problem.raw
    return {"upsilon": spec.upsilon, "mu": spec.mu, "alpha": spec.alpha, "b": spec.b}


# ---------------------------------------------------------------------------
# green


def cmd_green(args) -> int:
    spec, problem = _resolve_spec(args)
    try:
        kernel = green.build_kernel(spec)
    except green.SingularProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    d = existence.compute_d(kernel)

    code = EXIT_OK
    if args.check_g0:
        if spec.alpha != 0.0:
            raise CLIError("--check-g0 requires alpha = 0")
        reference = green.atici_eloe_kernel(spec.upsilon, spec.b)
        delta = float(np.max(np.abs(kernel.table - reference)))
        if delta < 1e-10:
            print(f"G0 match: max|delta| = {delta:.3e} < 1e-10")
        else:
            print(f"G0 MISMATCH: max|delta| = {delta:.3e} >= 1e-10")
            code = EXIT_VERIFY_FAIL

    out = sys.stdout
    close = False
    if args.output:
        out = open(args.output, "w", encoding="utf-8")
        close = True
    try:
        if args.format == "csv":
            kernel.write_csv(out)
        else:
            doc = kernel.to_json_dict()
            doc["d"] = d
            out.write(json.dumps(doc) + "\n")
    finally:
        if close:
            out.close()
    print(f"# denominator = {_fmt(kernel.denominator)}")
    print(f"# d = {_fmt(d)}")
    return code


# ---------------------------------------------------------------------------
# solve


def _solve_linear(args, spec: ProblemSpec, h: GridFunction) -> int:
    kernel = green.build_kernel(spec)
    y_kernel = green.apply_kernel(kernel, h)
    y_colloc = oracle.solve_collocation(spec, h)
    if args.dump_matrix:
        with open(args.dump_matrix, "w", encoding="utf-8") as fh:
            oracle.assemble(spec, h).write_csv(fh)
    discrepancy = float(np.max(np.abs(y_kernel.values - y_colloc.values)))
    doc = {
        "problem": _problem_echo(spec, args._problem),
        "mode": "linear",
        "grid": {"offset": spec.upsilon - 2.0, "count": spec.b + 4},
        "y_kernel": [float(v) for v in y_kernel.values],
        "y_collocation": [float(v) for v in y_colloc.values],
        "max_discrepancy": discrepancy,
    }
    print(json.dumps(doc))
    return EXIT_OK


def _solve_nonlinear(args, spec: ProblemSpec, f: solver.NonlinearRHS) -> int:
    kernel = green.build_kernel(spec)
    outcome = None
    try:
        outcome = solver.solve_picard(
            kernel,
            f,
            tol=args.tol,
            max_iter=args.max_iter,
            damping=args.damping,
        )
    except (solver.DivergenceError, solver.NonFiniteError):
        outcome = None
    if outcome is None or not outcome.converged:
        try:
            newton = solver.solve_newton(spec, f, tol=args.tol)
        except (solver.StagnationError, oracle.SingularMatrixError, solver.NonFiniteError):
            newton = None
        if newton is not None and newton.converged:
            outcome = newton
    if outcome is None or not outcome.converged:
        print("error: no method converged", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    doc = {
        "problem": _problem_echo(spec, args._problem),
        "mode": "nonlinear",
        "outcome": outcome.to_json_dict(),
    }
    print(json.dumps(doc))
    nontrivial = solver.is_nontrivial(spec, f, outcome, tol=args.tol)
    print(f"nontrivial: {'yes' if nontrivial else 'no'}")
    return EXIT_OK


def cmd_solve(args) -> int:
    spec, problem = _resolve_spec(args)
    if problem is None:
        # Forcing must come from flags; build a problem-file dict so exactly
        # the same validation applies.
        given = [k for k in ("h", "h_expr", "f_expr") if getattr(args, k)]
        if len(given) != 1:
            raise CLIError("exactly one of --h, --h-expr, --f-expr required")
        fields = _problem_echo(spec, None)
        key = given[0]
        if key == "h":
            fields["h"] = [float(v) for v in args.h.split(",")]
        elif key == "h_expr":
            fields["h_expr"] = args.h_expr
        else:
            fields["f_expr"] = args.f_expr
        problem = load_problem(fields)
    args._problem = problem
    try:
        if problem.h is not None:
            return _solve_linear(args, spec, problem.h)
        assert problem.f is not None
        return _solve_nonlinear(args, spec, problem.f)
    except (green.SingularProblemError, oracle.SingularMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    spec, problem = _resolve_spec(args)
    m = args.m if args.m is not None else (problem.m if problem else None)
    g_expr = args.g_expr or (problem.g_expr if problem else None)
    psi_expr = args.psi_expr or (problem.psi_expr if problem else None)
    if m is None and not (g_expr and psi_expr):
        raise CLIError("need --m and/or both --g-expr and --psi-expr")
    if (g_expr is None) != (psi_expr is None):
        raise CLIError("--g-expr and --psi-expr must be given together")
    try:
        kernel = green.build_kernel(spec)
    except green.SingularProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    g = None
    psi: Callable[[float], float] | None = None
    if g_expr is not None:
        try:
            g_tree = expr.parse(g_expr, allowed_vars={"t"})
            psi_tree = expr.parse(psi_expr, allowed_vars={"L"})
        except expr.ExprSyntaxError as exc:
            raise CLIError(str(exc)) from exc
        grid = make_forcing_grid(spec)
        g = GridFunction(
            grid, np.array([expr.evaluate(g_tree, {"t": p}) for p in grid.points()])
        )
        psi = lambda L: expr.evaluate(psi_tree, {"L": L})  # noqa: E731
    try:
        report = existence.build_report(kernel, m=m, g=g, psi=psi)
    except existence.NegativeWeightError as exc:
        raise CLIError(str(exc)) from exc
    print(report.to_json())
    if args.probe_slope:
        f = problem.f if problem else None
        if f is None:
            raise CLIError("--probe-slope needs a problem with f_expr")
        probe = existence.slope_probe(f.eval, make_forcing_grid(spec).points())
        print(json.dumps({"slope_probe": probe}))
    requested = []
    if m is not None:
        requested.append(bool(report.kz_pass))
    if g is not None:
        requested.append(bool(report.ls_pass))
    return EXIT_OK if all(requested) else EXIT_CHECK_FAIL


# ---------------------------------------------------------------------------
# verify


def _random_spec(rng: np.random.Generator) -> ProblemSpec:
    return ProblemSpec(
        upsilon=float(rng.uniform(1.05, 1.95)),
        mu=float(rng.uniform(0.05, 0.95)),
        alpha=float(rng.uniform(-0.9, 0.9)),
        b=int(rng.integers(1, 9)),
    )


def _check_ml_special_values(rng, sweeps) -> float:
    worst = 0.0
    for lam in (-0.9, -0.5, 0.1, 0.5, 0.9):
        for order in (0.3, 1.0, 1.4):
            for beta in (1.0, 1.5, 2.0):
                params = MittagLefflerParams(order, beta, lam)
                worst = max(worst, abs(ml(params, -1)))
                worst = max(worst, abs(ml(params, 0) - 1.0 / (1.0 - lam)))
                closed = order * lam / (1.0 - lam) ** 2 + beta / (1.0 - lam)
                worst = max(worst, abs(ml(params, 1) - closed))
    return worst


def _check_transform_power_rule(rng, sweeps) -> float:
    upsilon = 1.5
    gen = rtransform.SequenceGenerator(
        upsilon - 1.0, lambda t: falling_factorial(t, upsilon - 1.0)
    )
    worst = 0.0
    for s in (0.5, 1.0, 2.0):
        value = rtransform.r_transform(gen, s, 1e-10)
        worst = max(worst, abs(value - gamma(upsilon) / s**upsilon))
    return worst


def _check_transform_convolution(rng, sweeps) -> float:
    from .grid import Grid

    worst = 0.0
    for _ in range(10):
        upsilon = float(rng.uniform(1.05, 1.95))
        n = int(rng.integers(2, 7))
        grid = Grid(upsilon - 2.0, n)
        f = GridFunction(grid, rng.uniform(-1.0, 1.0, n))
        g = GridFunction(grid, rng.uniform(-1.0, 1.0, n))
        s = float(rng.uniform(0.3, 2.5))
        worst = max(worst, rtransform.verify_convolution_lemma(f, g, s, 1e-13))
    return worst


def _check_transform_difference(rng, sweeps) -> float:
    from .grid import Grid

    worst = 0.0
    for m in (1, 2):
        for _ in range(10):
            mu = float(rng.uniform(m - 0.95, m - 0.05))
            n = int(rng.integers(2, 6))
            f = GridFunction(Grid(mu - m, n), rng.uniform(-1.0, 1.0, n))
            s = float(rng.uniform(0.5, 2.0))
            worst = max(worst, rtransform.verify_difference_lemma(f, mu, m, s))
    return worst


def _check_falling_factorial_lemma(rng, sweeps) -> float:
    worst = 0.0
    for _ in range(100):
        t = float(rng.uniform(0.5, 12.0))
        upsilon = float(rng.uniform(0.1, 1.9))
        lhs = falling_factorial(t + 1.0, upsilon) - falling_factorial(t, upsilon)
        rhs = upsilon * falling_factorial(t, upsilon - 1.0)
        scale = max(1.0, abs(rhs))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def _check_boundary_rows(rng, sweeps) -> float:
    worst = 0.0
    for _ in range(sweeps):
        spec = _random_spec(rng)
        kernel = green.build_kernel(spec)
        worst = max(worst, float(np.max(np.abs(kernel.table[0]))))
        worst = max(worst, float(np.max(np.abs(kernel.table[-1]))))
    return worst


def _check_alpha0_reduction(rng, sweeps) -> float:
    worst = 0.0
    for upsilon, mu, b in ((1.5, 0.5, 5), (1.25, 0.75, 3), (1.8, 0.2, 6)):
        spec = ProblemSpec(upsilon=upsilon, mu=mu, alpha=0.0, b=b)
        kernel = green.build_kernel(spec)
        reference = green.atici_eloe_kernel(upsilon, b)
        worst = max(worst, float(np.max(np.abs(kernel.table - reference))))
    return worst


def _check_kernel_vs_collocation(rng, sweeps) -> float:
    worst = 0.0
    for _ in range(sweeps):
        spec = _random_spec(rng)
        h = GridFunction(
            make_forcing_grid(spec), rng.uniform(-1.0, 1.0, spec.b + 2)
        )
        y_kernel = green.solve_linear(spec, h)
        y_colloc = oracle.solve_collocation(spec, h)
        gap = float(np.max(np.abs(y_kernel.values - y_colloc.values)))
        scale = 1.0 + float(np.max(np.abs(y_colloc.values)))
        worst = max(worst, gap / scale)
    return worst


_VERIFY_CHECKS: list[tuple[str, Callable, float]] = [
    ("mittag-special-values", _check_ml_special_values, 1e-10),
    ("transform-power-rule", _check_transform_power_rule, 1e-6),
    ("transform-convolution-rule", _check_transform_convolution, 1e-10),
    ("transform-difference-rule", _check_transform_difference, 1e-10),
    ("falling-factorial-lemma", _check_falling_factorial_lemma, 1e-10),
    ("kernel-boundary-rows", _check_boundary_rows, 1e-12),
    ("alpha0-reduction", _check_alpha0_reduction, 1e-10),
    ("kernel-vs-collocation", _check_kernel_vs_collocation, 1e-8),
]


def cmd_verify(args) -> int:
    failures = 0
    for name, check, default_tol in _VERIFY_CHECKS:
        tol = args.tol if args.tol is not None else default_tol
        rng = np.random.default_rng(args.seed)
        measured = check(rng, args.sweeps)
        ok = measured <= tol
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: measured={measured:.6g} tol={tol:.6g}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} of {len(_VERIFY_CHECKS)} checks failed")
        return EXIT_VERIFY_FAIL
    print(f"all {len(_VERIFY_CHECKS)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", help="JSON problem file")
    p.add_argument("--upsilon", type=float, help="order in (1, 2)")
    p.add_argument("--mu", type=float, help="order in (0, 1)")
    p.add_argument("--alpha", type=float, help="coupling, |alpha| < 1")
    p.add_argument("--b", type=int, help="interior size, b >= 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgreen",
        description=(
            "Kernel construction, linear and nonlinear solves, and existence "
            "checks for an implicit fractional difference Dirichlet problem."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_green = sub.add_parser("green", help="build and export the kernel table")
    _add_spec_flags(p_green)
    p_green.add_argument("--format", choices=("csv", "json"), default="csv")
    p_green.add_argument("--output", help="write the table here instead of stdout")
    p_green.add_argument(
        "--check-g0",
        action="store_true",
        help="compare against the alpha = 0 closed form (requires alpha = 0)",
    )
    p_green.set_defaults(fn=cmd_green)

    p_solve = sub.add_parser("solve", help="solve a linear or nonlinear problem")
    _add_spec_flags(p_solve)
    p_solve.add_argument("--h", help="comma separated forcing values")
    p_solve.add_argument("--h-expr", dest="h_expr", help="forcing as expression in t")
    p_solve.add_argument(
        "--f-expr", dest="f_expr", help="nonlinearity as expression in t, r"
    )
    p_solve.add_argument("--tol", type=float, default=1e-10)
    p_solve.add_argument("--max-iter", dest="max_iter", type=int, default=10_000)
    p_solve.add_argument("--damping", type=float, default=0.5)
    p_solve.add_argument(
        "--dump-matrix", dest="dump_matrix", help="debug: write collocation CSV here"
    )
    p_solve.set_defaults(fn=cmd_solve, _problem=None)

    p_check = sub.add_parser("check", help="run the existence tests")
    _add_spec_flags(p_check)
    p_check.add_argument("--m", type=float, help="asymptotic slope of f(t, r)/r")
    p_check.add_argument("--g-expr", dest="g_expr", help="majorant weight, in t")
    p_check.add_argument("--psi-expr", dest="psi_expr", help="growth majorant, in L")
    p_check.add_argument(
        "--probe-slope",
        action="store_true",
        help="sample f(t, r)/r at large |r| (diagnostic only)",
    )
    p_check.set_defaults(fn=cmd_check)

    p_verify = sub.add_parser("verify", help="run the built-in invariant suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--sweeps", type=int, default=10)
    p_verify.add_argument(
        "--tol", type=float, default=None, help="override every check tolerance"
    )
    p_verify.set_defaults(fn=cmd_verify)
    return parser


def _validate_thread_env() -> None:
    raw = os.environ.get("FRACGREEN_THREADS")
    if raw is None:
        return
    try:
        value = int(raw)
    except ValueError as exc:
        raise CLIError(f"FRACGREEN_THREADS must be an integer, got {raw!r}") from exc
    if value < 0:
        raise CLIError(f"FRACGREEN_THREADS must be >= 0, got {value}")
    # 0 means auto; computation is sequential, so any cap is honored.


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate_thread_env()
        return args.fn(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, expr.DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except solver.DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
