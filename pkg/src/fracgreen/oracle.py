"""Brute-force collocation solver: the independent ground truth.

The operator -D^v y(t) + alpha D^u y(t + v - u) is discretized directly by
applying it (through :mod:`fracgreen.fracops`) to each unit basis function
on the solution grid, giving a dense (b+4) x (b+4) system whose first b+2
rows are the equations at t = 0..b+1 and whose last two rows enforce the
Dirichlet conditions.  This path shares only the falling-factorial weights
with the kernel construction, which keeps the cross-check meaningful.

The system is solved by Gaussian elimination with partial pivoting and a
couple of iterative-refinement sweeps (residuals accumulated in extended
precision) so the comparison against the kernel quadrature is not limited
by forward rounding on ill-conditioned corners.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .fracops import fractional_difference
from .grid import Grid, GridFunction, make_forcing_grid, make_solution_grid
from .problem import ProblemSpec


class SingularMatrixError(RuntimeError):
    """Elimination hit a pivot below tolerance."""


@dataclass(frozen=True)
class CollocationSystem:
    """Dense matrix and right-hand side of the discretized problem.

    Rows 0..b+1 are equation rows for t = 0..b+1; rows b+2 and b+3 are the
    Dirichlet rows (unit entries at the indices of v-2 and v+b+1, zero
    right-hand side).  The coefficient of the newest unknown y(t+v) in
    equation row t is alpha - 1.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    spec: ProblemSpec

    def write_csv(self, stream) -> None:
        n = self.matrix.shape[0]
        for i in range(n):
            cells = ",".join(f"{v:.12g}" for v in self.matrix[i])
            stream.write(f"{cells},{self.rhs[i]:.12g}\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def assemble(spec: ProblemSpec, h: GridFunction | None = None) -> CollocationSystem:
    """Discretize the operator row by row against the unit basis.

    ``h`` may be omitted (zero forcing), e.g. when only the matrix matters.
    """
    b = spec.b
    n = b + 4
    sol_grid = make_solution_grid(spec)
    if h is not None and not h.grid.matches(make_forcing_grid(spec)):
        raise ValueError("h must live on the forcing grid")
    matrix = np.zeros((n, n))
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        e = GridFunction(sol_grid, unit)
        dv = fractional_difference(e, spec.upsilon)  # t = 0..b+1
        du = fractional_difference(e, spec.mu)  # points v-u-1+k, k = 0..b+2
        # D^u is evaluated at t+v-u, the (t+1)-th point of its grid.
        matrix[: b + 2, i] = -dv.values + spec.alpha * du.values[1 : b + 3]
    matrix[b + 2, 0] = 1.0
    matrix[b + 3, n - 1] = 1.0
    rhs = np.zeros(n)
    if h is not None:
        rhs[: b + 2] = h.values
    return CollocationSystem(matrix=matrix, rhs=rhs, spec=spec)


def _factor(a: np.ndarray, pivot_tol: float) -> tuple[np.ndarray, list[int], int]:
    """In-place LU with partial pivoting; returns (LU, row permutation, swaps)."""
    lu = np.array(a, dtype=float)
    n = lu.shape[0]
    perm = list(range(n))
    swaps = 0
    for k in range(n):
        p = int(np.argmax(np.abs(lu[k:, k]))) + k
        if abs(lu[p, k]) <= pivot_tol:
            raise SingularMatrixError(
                f"pivot {lu[p, k]!r} below tolerance {pivot_tol!r} at step {k}"
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[k], perm[p] = perm[p], perm[k]
            swaps += 1
        if k < n - 1:
            lu[k + 1 :, k] /= lu[k, k]
            lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm, swaps


def _solve_factored(lu: np.ndarray, perm: list[int], b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = np.array([b[p] for p in perm], dtype=float)
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1 :] @ x[k + 1 :]) / lu[k, k]
    return x


def gauss_solve(
    a: np.ndarray,
    b: np.ndarray,
    pivot_tol: float = 1e-12,
    refine: int = 2,
) -> np.ndarray:
    """Dense solve by GE with partial pivoting plus iterative refinement.

    Refinement residuals are accumulated in ``numpy.longdouble`` so the
    corrected solution is not forward-error-limited by double rounding.
    """
    lu, perm, _ = _factor(a, pivot_tol)
    x = _solve_factored(lu, perm, b)
    if refine > 0:
        a_ld = a.astype(np.longdouble)
        b_ld = b.astype(np.longdouble)
        for _ in range(refine):
            r = b_ld - a_ld @ x.astype(np.longdouble)
            x = x + _solve_factored(lu, perm, r.astype(float))
    return x


def determinant_sign_log(a: np.ndarray, pivot_tol: float = 1e-300) -> tuple[int, float]:
    """(sign, log|det|) from the LU factorization; (0, -inf) when singular."""
    try:
        lu, _, swaps = _factor(a, pivot_tol)
    except SingularMatrixError:
        return 0, -np.inf
    diag = np.diag(lu)
    sign = 1 if swaps % 2 == 0 else -1
    for d in diag:
        if d < 0:
            sign = -sign
    return sign, float(np.sum(np.log(np.abs(diag))))


def solve_collocation(spec: ProblemSpec, h: GridFunction) -> GridFunction:
    """Assemble and solve; raises :class:`SingularMatrixError` on pivot failure.

    The error message carries the kernel-side uniqueness indicator for
    diagnosis (the two singularities should coincide).
    """
    system = assemble(spec, h)
    try:
        y = gauss_solve(system.matrix, system.rhs)
    except SingularMatrixError as exc:
        from .green import uniqueness_indicator

        raise SingularMatrixError(
            f"{exc}; uniqueness indicator e(b+2) = "
            f"{uniqueness_indicator(spec):.6g}"
        ) from exc
    return GridFunction(make_solution_grid(spec), y)


def residual(spec: ProblemSpec, y: GridFunction, h: GridFunction) -> float:
    """Equation-satisfaction meter: max over t of

        |-D^v y(t) + alpha D^u y(t+v-u) - h(t+v-1)|

    with the two boundary magnitudes folded in.  Computed through the
    fractional operators directly, not the assembled matrix.
    """
    b = spec.b
    if not y.grid.matches(make_solution_grid(spec)):
        raise ValueError("y must live on the solution grid")
    if not h.grid.matches(make_forcing_grid(spec)):
        raise ValueError("h must live on the forcing grid")
    dv = fractional_difference(y, spec.upsilon).values
    du = fractional_difference(y, spec.mu).values
    eq = -dv + spec.alpha * du[1 : b + 3] - h.values
    return float(
        max(np.max(np.abs(eq)), abs(y.values[0]), abs(y.values[-1]))
    )
