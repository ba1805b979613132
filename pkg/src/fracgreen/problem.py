"""The problem tuple shared by every module: one boundary value problem.

The equation solved throughout the package is

    -D^v y(t) + alpha * D^u y(t + v - u) = h(t + v - 1),   t in {0, ..., b+1},

with homogeneous Dirichlet conditions y(v-2) = y(v+b+1) = 0, where D^v and
D^u are the Riemann-Liouville fractional difference operators of orders
v in (1, 2) and u in (0, 1).  The series defining the kernel converge only
for |alpha| < 1, so that bound is enforced here.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters (upsilon, mu, alpha, b) of one Dirichlet problem."""

    upsilon: float
    mu: float
    alpha: float
    b: int

    def __post_init__(self) -> None:
        if not 1.0 < self.upsilon < 2.0:
            raise ValueError(f"upsilon must lie in (1, 2), got {self.upsilon!r}")
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu!r}")
        if not abs(self.alpha) < 1.0:
            raise ValueError(f"|alpha| must be < 1, got {self.alpha!r}")
        if not isinstance(self.b, int) or isinstance(self.b, bool) or self.b < 1:
            raise ValueError(f"b must be an integer >= 1, got {self.b!r}")
