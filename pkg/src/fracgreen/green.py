"""Kernel assembly and linear solves for the implicit Dirichlet problem.

With e(x) short for the discrete Mittag-Leffler value
e_{v-u,v}(alpha, x), the problem

    -D^v y(t) + alpha D^u y(t + v - u) = h(t + v - 1),
    y(v-2) = y(v+b+1) = 0,

has a unique solution exactly when e(b+2) != 0, and the solution is the
quadrature y(t) = sum_s G(t, s) h(s) over the forcing points
s = v-1, ..., v+b with the two-branch kernel

    G(t, s) = e(t-v+1)/e(b+2) * e(v+b-s) - e(t-s-1)    for s <= t,
    G(t, s) = e(t-v+1)/e(b+2) * e(v+b-s)               for s >= t+1.

Both branches enter the quadrature with positive sign; splitting the full
sum form of the solution at s = t shows this is the consistent reading, and
the cross-check suite pins it against the independent collocation solver
(see tests and the ``verify`` command).  Because e(-1) = 0 the two branches
agree at s = t and the rows at t = v-2 and t = v+b+1 vanish identically,
which realizes the Dirichlet conditions exactly.

The module also evaluates the general initial-value form of the solution
(driven by y(v-2) and the order v-1 difference at 0) and the alpha = 0
closed-form kernel used as a reduction cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO

import numpy as np

from .grid import GridFunction, make_forcing_grid, make_solution_grid
from .mittag import MittagLefflerParams, ml, ml_profile
from .problem import ProblemSpec
from .special import falling_factorial, gamma

#: Series controls for kernel-internal Mittag-Leffler evaluations.  The
#: public ml() default kmax suits one-off calls; kernel assembly near
#: |alpha| -> 1 legitimately needs far more terms.
_ML_TOL = 1e-13
_ML_KMAX = 50_000

#: Construction aborts below this denominator magnitude rather than
#: amplifying noise.
_DENOMINATOR_TOL = 1e-10


class SingularProblemError(RuntimeError):
    """The uniqueness denominator e(b+2) vanishes within tolerance."""


def _params(spec: ProblemSpec) -> MittagLefflerParams:
    return MittagLefflerParams(spec.upsilon - spec.mu, spec.upsilon, spec.alpha)


def _profile(params: MittagLefflerParams, x_min: int, x_max: int) -> np.ndarray:
    return np.array(ml_profile(params, x_min, x_max, tol=_ML_TOL, kmax=_ML_KMAX))


@dataclass(frozen=True)
class GreenKernel:
    """Dense kernel table plus the uniqueness denominator e(b+2).

    Rows run over t = v-2, ..., v+b+1 (b+4 of them); columns over the
    forcing points s = v-1, ..., v+b (b+2).  The rows at both boundary
    points are identically zero.
    """

    spec: ProblemSpec
    table: np.ndarray
    denominator: float

    def __post_init__(self) -> None:
        tab = np.array(self.table, dtype=float)
        if tab.shape != (self.spec.b + 4, self.spec.b + 2):
            raise ValueError(
                f"table must have shape {(self.spec.b + 4, self.spec.b + 2)}"
            )
        tab.flags.writeable = False
        object.__setattr__(self, "table", tab)

    def row_points(self) -> np.ndarray:
        return make_solution_grid(self.spec).points()

    def col_points(self) -> np.ndarray:
        return make_forcing_grid(self.spec).points()

    def column(self, j: int) -> np.ndarray:
        return self.table[:, j]

    def write_csv(self, stream: IO[str]) -> None:
        """Table as CSV; headers carry the grid points, 12 significant digits."""
        cols = ",".join(f"{p:.12g}" for p in self.col_points())
        stream.write(f"t\\s,{cols}\n")
        for p, row in zip(self.row_points(), self.table):
            cells = ",".join(f"{v:.12g}" for v in row)
            stream.write(f"{p:.12g},{cells}\n")

    def to_json_dict(self) -> dict:
        """Spec plus the flattened row-major table."""
        return {
            "problem": {
                "upsilon": self.spec.upsilon,
                "mu": self.spec.mu,
                "alpha": self.spec.alpha,
                "b": self.spec.b,
            },
            "rows": self.table.shape[0],
            "cols": self.table.shape[1],
            "denominator": self.denominator,
            "table": [float(v) for v in self.table.ravel()],
        }


@dataclass(frozen=True)
class IVPState:
    """Initial data of the general solution: A = y(v-2) and the order v-1
    difference B = (1-v) y(v-2) + y(v-1) at t = 0."""

    A: float
    B: float


def uniqueness_indicator(spec: ProblemSpec) -> float:
    """e_{v-u,v}(alpha, b+2); the problem is uniquely solvable iff nonzero."""
    return ml(_params(spec), spec.b + 2, tol=_ML_TOL, kmax=_ML_KMAX)


def build_kernel(spec: ProblemSpec) -> GreenKernel:
    """Assemble the dense kernel table from one Mittag-Leffler profile.

    Every entry uses e(x) at integer x in [-1, b+2], so the profile is
    evaluated once.  Raises :class:`SingularProblemError` when the
    denominator e(b+2) vanishes within 1e-10.
    """
    b = spec.b
    e = _profile(_params(spec), -1, b + 2)  # e[i] = e(x = i - 1)
    denominator = float(e[b + 3])
    if abs(denominator) <= _DENOMINATOR_TOL:
        raise SingularProblemError(
            f"uniqueness denominator e(b+2) = {denominator!r} vanishes"
        )
    eb_rev = e[1 : b + 3][::-1]  # column factors e(v+b-s) = e(b+1-j), j = 0..b+1
    table = np.empty((b + 4, b + 2))
    for i in range(b + 4):
        ratio = e[i] / denominator  # e(t-v+1) / e(b+2) with t = v-2+i
        row = ratio * eb_rev
        m = min(i, b + 2)  # columns j <= i-1 carry the extra e(t-s-1) term
        if m > 0:
            row[:m] = row[:m] - e[i - m : i][::-1]
        table[i] = row
    return GreenKernel(spec=spec, table=table, denominator=denominator)


def atici_eloe_kernel(upsilon: float, b: int) -> np.ndarray:
    """Closed-form kernel of the explicit problem (alpha = 0 reduction).

    Writing p^(q) for the falling factorial, the entry at row t = v-2+i and
    integer column j (forcing point s = v-1+j) is

        [ t^(v-1) (v+b-j)^(v-1) / (v+b+1)^(v-1)
          - (t-j-1)^(v-1) if j < t-v+1 ] / Gamma(v).

    Index ranges match :class:`GreenKernel.table`.
    """
    if not 1.0 < upsilon < 2.0:
        raise ValueError(f"upsilon must lie in (1, 2), got {upsilon!r}")
    v = upsilon
    g = gamma(v)
    row_f = [falling_factorial(v - 2.0 + i, v - 1.0) for i in range(b + 4)]
    col_f = [falling_factorial(v + b - j, v - 1.0) for j in range(b + 2)]
    denom = falling_factorial(v + b + 1.0, v - 1.0)
    # (t-j-1)^(v-1) depends on d = i-j only; the subtraction branch is d >= 2.
    diag_f = [falling_factorial(v + d - 3.0, v - 1.0) for d in range(b + 4)]
    table = np.empty((b + 4, b + 2))
    for i in range(b + 4):
        lead = row_f[i] / denom
        for j in range(b + 2):
            val = lead * col_f[j]
            d = i - j
            if d >= 2:
                val -= diag_f[d]
            table[i, j] = val / g
    return table


def ivp_solution(
    spec: ProblemSpec, state: IVPState, h: GridFunction
) -> GridFunction:
    """General solution of the equation driven by initial data (A, B).

    With e, e1, e2 the Mittag-Leffler families with second parameter v,
    v-1 and v-u respectively (first parameter v-u, argument alpha),

        y(t) = [e1(t-v+2) + alpha (1-v) e(t-v+1) - alpha e2(t-v+2)] A
               + (1-alpha) e(t-v+1) B
               - sum_{s=v-1}^{t} e(t-s-1) h(s),

    with an empty sum for t < v-1.
    """
    b = spec.b
    sol_grid = make_solution_grid(spec)
    if not h.grid.matches(make_forcing_grid(spec)):
        raise ValueError("h must live on the forcing grid")
    vu = spec.upsilon - spec.mu
    alpha = spec.alpha
    e = _profile(MittagLefflerParams(vu, spec.upsilon, alpha), -1, b + 2)
    e1 = _profile(MittagLefflerParams(vu, spec.upsilon - 1.0, alpha), 0, b + 3)
    e2 = _profile(MittagLefflerParams(vu, vu, alpha), 0, b + 3)
    hv = h.values
    out = np.empty(b + 4)
    for i in range(b + 4):
        # t = v-2+i: t-v+1 = i-1 (profile index i), t-v+2 = i.
        coef_a = e1[i] + alpha * (1.0 - spec.upsilon) * e[i] - alpha * e2[i]
        acc = coef_a * state.A + (1.0 - alpha) * e[i] * state.B
        # s = v-1+j <= t requires j <= i-1; e(t-s-1) = e(i-j-2), index i-j-1.
        for j in range(min(i, b + 2)):
            acc -= e[i - j - 1] * hv[j]
        out[i] = acc
    return GridFunction(sol_grid, out)


def dirichlet_state(spec: ProblemSpec, h: GridFunction) -> IVPState:
    """Initial data forced by the two Dirichlet conditions: A = 0 and

        B = sum_{s=v-1}^{v+b} e(v+b-s) h(s) / ((1-alpha) e(b+2)).
    """
    b = spec.b
    if not h.grid.matches(make_forcing_grid(spec)):
        raise ValueError("h must live on the forcing grid")
    e = _profile(_params(spec), 0, b + 2)  # e[i] = e(x = i)
    denominator = float(e[b + 2])
    if abs(denominator) <= _DENOMINATOR_TOL:
        raise SingularProblemError(
            f"uniqueness denominator e(b+2) = {denominator!r} vanishes"
        )
    acc = 0.0
    for j in range(b + 2):
        acc += e[b + 1 - j] * float(h.values[j])
    return IVPState(A=0.0, B=acc / ((1.0 - spec.alpha) * denominator))


def apply_kernel(kernel: GreenKernel, h: GridFunction) -> GridFunction:
    """Quadrature y(t) = sum_s G(t, s) h(s) for a prebuilt kernel."""
    if not h.grid.matches(make_forcing_grid(kernel.spec)):
        raise ValueError("h must live on the forcing grid")
    return GridFunction(
        make_solution_grid(kernel.spec), kernel.table @ h.values
    )


def solve_linear(spec: ProblemSpec, h: GridFunction) -> GridFunction:
    """Solve the linear Dirichlet problem through the kernel quadrature.

    The boundary values at v-2 and v+b+1 are exactly zero (zero rows).
    """
    return apply_kernel(build_kernel(spec), h)


def kernel_json(kernel: GreenKernel) -> str:
    return json.dumps(kernel.to_json_dict())
