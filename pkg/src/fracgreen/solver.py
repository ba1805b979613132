"""Nonlinear solves through the kernel quadrature operator.

Solutions of the nonlinear problem coincide with fixed points of

    (F y)(t) = sum_s G(t, s) f(s, y(s)),

so the primary method is damped Picard iteration on F, with a damped Newton
method on the collocation form M y = f-stack as insurance when F is not a
contraction.  Converged outcomes are certified through the collocation
residual meter, which is independent of the kernel path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracle
from .green import GreenKernel, make_forcing_grid, make_solution_grid
from .grid import GridFunction
from .problem import ProblemSpec

_DIVERGENCE_CAP = 1e12
_MAX_HALVINGS = 30


class NonFiniteError(RuntimeError):
    """f returned NaN or infinity at a needed point."""


class DivergenceError(RuntimeError):
    """Picard iterates left the trust region."""


class StagnationError(RuntimeError):
    """Newton line search could not reduce the residual."""


@dataclass(frozen=True)
class NonlinearRHS:
    """Right-hand side f(t, r) on forcing-grid points t and real r."""

    eval: Callable[[float, float], float]
    descriptor: str

    @classmethod
    def from_callable(
        cls, fn: Callable[[float, float], float], descriptor: str = "<callable>"
    ) -> "NonlinearRHS":
        return cls(eval=fn, descriptor=descriptor)

    @classmethod
    def from_expression(cls, source: str) -> "NonlinearRHS":
        """Compile an expression in the variables t (forcing point) and r."""
        from .expr import parse

        tree = parse(source, allowed_vars={"t", "r"})

        def fn(t: float, r: float) -> float:
            return tree.eval({"t": t, "r": r})

        return cls(eval=fn, descriptor=source)


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one nonlinear solve; ``residual`` is the collocation meter."""

    y: GridFunction
    iterations: int
    method: str
    residual: float
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "y": {
                "grid": {"offset": self.y.grid.offset, "count": self.y.grid.count},
                "values": [float(v) for v in self.y.values],
            },
            "iterations": self.iterations,
            "method": self.method,
            "residual": self.residual,
            "converged": self.converged,
        }


def _forcing_values(
    spec: ProblemSpec, f: NonlinearRHS, y_values: np.ndarray
) -> np.ndarray:
    # f sampled at (s_j, y(s_j)); the forcing points are the interior
    # solution points 1..b+2.
    points = make_forcing_grid(spec).points()
    out = np.empty(spec.b + 2)
    for j, s in enumerate(points):
        out[j] = f.eval(float(s), float(y_values[j + 1]))
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"f ({f.descriptor!r}) returned a non-finite value")
    return out


def apply_F(kernel: GreenKernel, f: NonlinearRHS, y: GridFunction) -> GridFunction:
    """One application of the quadrature operator F.

    Boundary values are exactly zero because the kernel rows there vanish.
    """
    spec = kernel.spec
    if not y.grid.matches(make_solution_grid(spec)):
        raise ValueError("y must live on the solution grid")
    z = _forcing_values(spec, f, y.values)
    return GridFunction(y.grid, kernel.table @ z)


def _certified(
    spec: ProblemSpec, f: NonlinearRHS, y_values: np.ndarray
) -> float:
    z = _forcing_values(spec, f, y_values)
    y = GridFunction(make_solution_grid(spec), y_values)
    h = GridFunction(make_forcing_grid(spec), z)
    return oracle.residual(spec, y, h)


def solve_picard(
    kernel: GreenKernel,
    f: NonlinearRHS,
    y0: GridFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    damping: float = 0.5,
) -> SolveOutcome:
    """Damped fixed-point iteration y <- (1 - damping) y + damping F(y).

    Parameters
    ----------
    kernel : GreenKernel
        Prebuilt kernel of the problem.
    f : NonlinearRHS
        Right-hand side.
    y0 : GridFunction, optional
        Starting iterate; zero when omitted.
    tol : float
        Stop when the sup norm of the damped update falls below tol.
    max_iter : int
        Iteration cap; exceeding it yields converged = False.
    damping : float
        Relaxation factor in (0, 1].

    Raises
    ------
    DivergenceError
        When the iterate norm exceeds 1e12.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping!r}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    spec = kernel.spec
    grid = make_solution_grid(spec)
    y = np.zeros(grid.count) if y0 is None else np.array(y0.values, dtype=float)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        z = _forcing_values(spec, f, y)
        fy = kernel.table @ z
        step = damping * (fy - y)
        y = y + step
        if np.max(np.abs(y)) > _DIVERGENCE_CAP:
            raise DivergenceError(
                f"iterate norm exceeded {_DIVERGENCE_CAP:g} at iteration {iterations}"
            )
        if np.max(np.abs(step)) < tol:
            converged = True
            break
    return SolveOutcome(
        y=GridFunction(grid, y),
        iterations=iterations,
        method="picard",
        residual=_certified(spec, f, y),
        converged=converged,
    )


def solve_newton(
    spec: ProblemSpec,
    f: NonlinearRHS,
    y0: GridFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> SolveOutcome:
    """Damped Newton on the collocation form R(y) = M y - f-stack(y).

    Parameters
    ----------
    spec : ProblemSpec
        Problem parameters (the collocation matrix is assembled once).
    f : NonlinearRHS
        Right-hand side; its r-derivative is taken by central differences
        with step 1e-6 (1 + |y(s)|).
    y0 : GridFunction, optional
        Starting iterate; zero when omitted.
    tol : float
        Absorbed into the scaled residual floor for the convergence test.
    max_iter : int
        Newton step cap; exceeding it yields converged = False.

    Raises
    ------
    StagnationError
        When 30 step halvings cannot reduce the residual norm.
    oracle.SingularMatrixError
        When the Jacobian cannot be factored.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    b = spec.b
    grid = make_solution_grid(spec)
    system = oracle.assemble(spec, None)
    matrix = system.matrix
    points = make_forcing_grid(spec).points()
    y = np.zeros(grid.count) if y0 is None else np.array(y0.values, dtype=float)
    converged = False
    iterations = 0

    def stacked(yv: np.ndarray) -> np.ndarray:
        out = np.zeros(b + 4)
        out[: b + 2] = _forcing_values(spec, f, yv)
        return out

    def res(yv: np.ndarray) -> np.ndarray:
        return matrix @ yv - stacked(yv)

    r = res(y)
    for iterations in range(max_iter + 1):
        scale = 1.0 + np.max(np.abs(matrix @ y)) + np.max(np.abs(stacked(y)))
        if np.max(np.abs(r)) <= max(1e-12, tol * 1e-2) * scale:
            converged = True
            break
        if iterations == max_iter:
            break
        jac = matrix.copy()
        for t in range(b + 2):
            s = float(points[t])
            v = float(y[t + 1])
            step = 1e-6 * (1.0 + abs(v))
            deriv = (f.eval(s, v + step) - f.eval(s, v - step)) / (2.0 * step)
            jac[t, t + 1] -= deriv
        dy = oracle.gauss_solve(jac, -r)
        base = np.max(np.abs(r))
        lam = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            y_try = y + lam * dy
            r_try = res(y_try)
            if np.max(np.abs(r_try)) < base:
                break
            lam *= 0.5
        else:
            raise StagnationError(
                f"no residual decrease after {_MAX_HALVINGS} halvings "
                f"at iteration {iterations + 1}"
            )
        y = y_try
        r = r_try
    return SolveOutcome(
        y=GridFunction(grid, y),
        iterations=iterations,
        method="newton",
        residual=_certified(spec, f, y),
        converged=converged,
    )


def is_nontrivial(
    spec: ProblemSpec, f: NonlinearRHS, outcome: SolveOutcome, tol: float = 1e-10
) -> bool:
    """True when f(t, 0) != 0 somewhere and the solution norm exceeds tol."""
    points = make_forcing_grid(spec).points()
    forced = any(f.eval(float(s), 0.0) != 0.0 for s in points)
    return forced and float(np.max(np.abs(outcome.y.values))) > tol
