"""Truncated discrete Laplace transform on the integer time scale.

For a sequence f on the shifted lattice {t0, t0+1, ...} and s > 0,

    R_{t0}(f)(s) = sum_{t >= t0} (1/(s+1))^(t+1) f(t).

Fractional powers of s+1 are principal real powers, so everything here is
restricted to s > 0 where the damping factor lies in (0, 1) and the series
converges for polynomially bounded sequences.  The module also provides
numerical certifiers for two transform identities used in the kernel
derivation: the convolution rule

    R_a(f * g)(s) = (s+1)^(a+1) R_a(f)(s) R_a(g)(s)      (a = v - 2)

and the differentiation rule for the fractional difference of order u with
m - 1 < u < m,

    R_0(D^u f)(s) = s^u R_{u-m}(f)(s)
                    - sum_{k=0}^{m-1} s^(m-k-1) (D^k S_{m-u} f)(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .fracops import forward_difference, fractional_sum
from .grid import Grid, GridFunction

#: Hard cap on accumulated terms.
_MAX_TERMS = 10**6

#: Stop once this many consecutive terms fall below the tolerance.  Falling
#: factorial sequences grow polynomially before the geometric damping wins,
#: so early terms can dip; the run-length rule prevents premature stops.
_RUN_LENGTH = 20


class TransformNonConvergenceError(RuntimeError):
    """The partial sums did not settle within the term cap."""


@dataclass(frozen=True)
class SequenceGenerator:
    """A sequence on {start, start+1, ...} given by a term callback.

    The contract (not enforced beyond the truncation diagnostics) is that
    |term(t)| grows at most polynomially in t.
    """

    start: float
    term: Callable[[float], float]

    @classmethod
    def from_grid_function(cls, f: GridFunction) -> "SequenceGenerator":
        """Zero-extended view of a finite grid function."""

        def term(t: float) -> float:
            k = round(t - f.grid.offset)
            if 0 <= k < f.count:
                return float(f.values[k])
            return 0.0

        return cls(f.grid.offset, term)


def r_transform(f: SequenceGenerator, s: float, tol: float) -> float:
    """Partial sums of R_{start}(f)(s), truncated by the run-length rule.

    Terms are added until |term| <= tol * max(1, |partial|) held for
    :data:`_RUN_LENGTH` consecutive terms; for finitely supported f the
    result is the exact finite sum.
    """
    if not s > 0.0:
        raise ValueError(f"s must be positive, got {s!r}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    q = 1.0 / (s + 1.0)
    weight = q ** (f.start + 1.0)
    total = 0.0
    run = 0
    for n in range(_MAX_TERMS):
        t = f.start + n
        term = weight * f.term(t)
        if not math.isfinite(term):
            raise TransformNonConvergenceError(
                f"non-finite term at t = {t!r}; series diverges"
            )
        total += term
        if abs(term) <= tol * max(1.0, abs(total)):
            run += 1
            if run >= _RUN_LENGTH:
                return total
        else:
            run = 0
        weight *= q
    raise TransformNonConvergenceError(
        f"no convergence after {_MAX_TERMS} terms at s = {s!r}"
    )


def verify_convolution_lemma(
    f: GridFunction, g: GridFunction, s: float, tol: float
) -> float:
    """|LHS - RHS| of the convolution rule for zero-extended f, g.

    Both sides are finite sums for finitely supported inputs, so the
    residual is rounding-level.
    """
    if abs(f.grid.offset - g.grid.offset) > 1e-9:
        raise ValueError("f and g must start at the same grid point")
    from .fracops import convolve_shifted

    upsilon = f.grid.offset + 2.0
    n = f.count + g.count - 1
    conv = convolve_shifted(f.zero_extended(n), g.zero_extended(n))
    lhs = r_transform(SequenceGenerator.from_grid_function(conv), s, tol)
    rf = r_transform(SequenceGenerator.from_grid_function(f), s, tol)
    rg = r_transform(SequenceGenerator.from_grid_function(g), s, tol)
    rhs = (s + 1.0) ** (upsilon - 1.0) * rf * rg
    return abs(lhs - rhs)


def verify_difference_lemma(
    f: GridFunction, mu: float, m: int, s: float
) -> float:
    """|LHS - RHS| of the differentiation rule for finitely supported f.

    f lives on the grid starting at mu - m with m in {1, 2} and
    m - 1 < mu < m.  The left side transforms the pointwise fractional
    difference (an infinite series, truncated internally at 1e-13); the
    boundary terms on the right side come out of :mod:`fracgreen.fracops`.
    """
    if m not in (1, 2):
        raise ValueError(f"m must be 1 or 2, got {m!r}")
    if not m - 1 < mu < m:
        raise ValueError(f"mu must satisfy m-1 < mu < m, got {mu!r}")
    if abs(f.grid.offset - (mu - m)) > 1e-9:
        raise ValueError(f"f must live on the grid starting at {mu - m!r}")
    inner_tol = 1e-13
    nu = m - mu

    # Window of S_nu f on {0, 1, ...}, extended on demand; zero-extension of
    # f leaves the fractional sum unchanged.
    cache: dict[str, GridFunction] = {}

    def window(upto: int) -> GridFunction:
        cur = cache.get("w")
        if cur is None or cur.count < upto:
            size = max(4 * f.count + 16, 2 * upto)
            cur = fractional_sum(f.zero_extended(size), nu)
            cache["w"] = cur
        return cur

    def diff_term(t: float) -> float:
        k = round(t)
        w = window(k + m + 1)
        vals = w.values
        if m == 1:
            return float(vals[k + 1] - vals[k])
        return float(vals[k + 2] - 2.0 * vals[k + 1] + vals[k])

    lhs = r_transform(SequenceGenerator(0.0, diff_term), s, inner_tol)

    rf = r_transform(SequenceGenerator.from_grid_function(f), s, inner_tol)
    w = window(m + 1)
    boundary = 0.0
    for k in range(m):
        head = w if k == 0 else forward_difference(w, k)
        boundary += s ** (m - k - 1) * float(head.values[0])
    rhs = s**mu * rf - boundary
    return abs(lhs - rhs)
