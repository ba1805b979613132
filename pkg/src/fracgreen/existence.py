"""Computable verdicts for the two existence tests.

The slope test: the nonlinear problem has a solution whenever the asymptotic
slope m of f(s, r)/r satisfies |m| < d, where

    d = 1 / max_t sum_s |G(t, s)|.

The growth test: given a majorant |f(s, r)| <= g(s) psi(|r|) with g >= 0 and
psi nondecreasing, a solution exists whenever some L > 0 satisfies
L > psi(L) * M with

    M = max_t sum_s g(s) |G(t, s)|,

and that first such L is also an a priori bound for the solution norm.  The
search scans a log-spaced grid (1e-3 to 1e12, 200 points per decade) and
refines the first crossing by bisection; "minimal" therefore means minimal
over the scan grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .green import GreenKernel
from .grid import GridFunction, make_forcing_grid
from .problem import ProblemSpec

_SCAN_LO_EXP = -3
_SCAN_HI_EXP = 12
_SCAN_PER_DECADE = 200
_BISECT_REL_WIDTH = 1e-6


class NegativeWeightError(ValueError):
    """The growth-test weight g must be nonnegative."""


@dataclass(frozen=True)
class ExistenceReport:
    """Constants and verdicts; fields are None when a test was not requested."""

    d: float
    m: float | None = None
    kz_pass: bool | None = None
    M: float | None = None
    minimal_L: float | None = None
    ls_pass: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "kz_pass": self.kz_pass,
            "M": self.M,
            "minimal_L": self.minimal_L,
            "ls_pass": self.ls_pass,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def compute_d(kernel: GreenKernel) -> float:
    """1 over the maximal absolute row sum of the kernel table."""
    row_sums = np.abs(kernel.table).sum(axis=1)
    top = float(row_sums.max())
    if not top > 0.0:
        raise ValueError("kernel table is identically zero")
    return 1.0 / top


def check_kz(kernel: GreenKernel, m: float) -> bool:
    """Strict slope test |m| < d."""
    return abs(m) < compute_d(kernel)


def weighted_bound(kernel: GreenKernel, g: GridFunction) -> float:
    """M = max_t sum_s g(s) |G(t, s)| for a nonnegative weight g."""
    if not g.grid.matches(make_forcing_grid(kernel.spec)):
        raise ValueError("g must live on the forcing grid")
    if np.any(g.values < 0.0):
        raise NegativeWeightError("g must be nonnegative on the forcing grid")
    return float((np.abs(kernel.table) @ g.values).max())


def minimal_L(
    M: float,
    psi: Callable[[float], float],
    spec: ProblemSpec | None = None,
) -> float | None:
    """First L on the scan grid with L > psi(L) * M, refined by bisection.

    Returns None when no grid point passes.  ``psi`` must be nondecreasing
    on [0, inf); ``spec`` is accepted for report context only.
    """
    del spec
    if not M > 0.0:
        raise ValueError(f"M must be positive, got {M!r}")
    decades = _SCAN_HI_EXP - _SCAN_LO_EXP
    exps = np.linspace(_SCAN_LO_EXP, _SCAN_HI_EXP, decades * _SCAN_PER_DECADE + 1)
    grid = 10.0**exps
    hit = None
    for i, L in enumerate(grid):
        if L > psi(float(L)) * M:
            hit = i
            break
    if hit is None:
        return None
    if hit == 0:
        return float(grid[0])
    lo, hi = float(grid[hit - 1]), float(grid[hit])
    while (hi - lo) / hi > _BISECT_REL_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid > psi(mid) * M:
            hi = mid
        else:
            lo = mid
    return hi


def slope_probe(
    f_eval: Callable[[float, float], float],
    points: np.ndarray,
    magnitudes: tuple[float, ...] = (1e4, 1e6, 1e8),
) -> dict:
    """Sample f(t, r)/r at large |r| and report the observed spread.

    Diagnostic only: the asymptotic slope m of the slope test is analytic
    and must be supplied by the caller, never inferred from this probe.
    """
    ratios = []
    for t in points:
        for mag in magnitudes:
            for r in (mag, -mag):
                ratios.append(f_eval(float(t), r) / r)
    lo, hi = min(ratios), max(ratios)
    return {"min": lo, "max": hi, "spread": hi - lo}


def build_report(
    kernel: GreenKernel,
    m: float | None = None,
    g: GridFunction | None = None,
    psi: Callable[[float], float] | None = None,
) -> ExistenceReport:
    """Assemble an :class:`ExistenceReport` for the requested tests."""
    d = compute_d(kernel)
    kz = None if m is None else abs(m) < d
    M = None
    best = None
    ls = None
    if g is not None and psi is not None:
        M = weighted_bound(kernel, g)
        best = minimal_L(M, psi, kernel.spec)
        ls = best is not None
    return ExistenceReport(
        d=d, m=m, kz_pass=kz, M=M, minimal_L=best, ls_pass=ls
    )
