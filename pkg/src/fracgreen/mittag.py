"""The two-parameter delta discrete Mittag-Leffler function.

For order a > 0, beta real and |lambda| < 1, the series

    e_{a,b}(lambda, x) = sum_{k>=0} lambda^k (x + k a + b - 1)^(k a + b - 1)
                                    / Gamma(k a + b)

is evaluated at integer arguments x >= -1.  Writing the falling factorial as
a gamma ratio, each term is

    lambda^k * Gamma(x + k a + b) / (Gamma(x + 1) * Gamma(k a + b)),

and since x is a nonnegative integer the ratio Gamma(x + c)/Gamma(c) is the
rising product c (c+1) ... (c+x-1), which is computed directly (it equals
the analytic limit at any gamma pole) and in log space once the product
could overflow.  At x = -1 every term carries the Gamma(0) pole in the
denominator position of the falling factorial, so the value is exactly 0.

Closed forms used as test anchors:

    e_{a,b}(lambda, -1) = 0
    e_{a,b}(lambda, 0)  = 1 / (1 - lambda)
    e_{a,b}(lambda, 1)  = a lambda / (1 - lambda)^2 + b / (1 - lambda)

The series converges for |lambda| < 1 and diverges for |lambda| > 1; this
module rejects |lambda| >= 1 rather than guessing at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special import gamma, log_gamma_signed

#: Stop once this many consecutive terms fall below the tolerance.
_RUN_LENGTH = 10

#: Switch the rising product to log space beyond this x (overflow guard).
_PRODUCT_MAX_X = 40


class MLDivergenceError(ValueError):
    """|lambda| >= 1: outside the convergence region of the series."""


class MLNonConvergenceError(RuntimeError):
    """The series did not satisfy the stop rule within kmax terms."""


@dataclass(frozen=True)
class MittagLefflerParams:
    """Parameter triple (order, beta, lam) with order > 0 and |lam| < 1."""

    order: float
    beta: float
    lam: float

    def __post_init__(self) -> None:
        if not self.order > 0.0:
            raise ValueError(f"order must be positive, got {self.order!r}")
        if not abs(self.lam) < 1.0:
            raise MLDivergenceError(
                f"series diverges for |lambda| >= 1, got lambda = {self.lam!r}"
            )


def _rising(c: float, x: int) -> float:
    # Gamma(x + c) / Gamma(c) for integer x >= 0: the product c(c+1)...(c+x-1).
    # A factor hitting a gamma pole zeroes the product exactly as the
    # analytic limit demands.
    p = 1.0
    for i in range(x):
        p *= c + i
    return p


def _rising_signed_log(c: float, x: int) -> tuple[float, int] | None:
    # (log |product|, sign), or None when the product is exactly zero.
    log_sum = 0.0
    sign = 1
    for i in range(x):
        v = c + i
        if v == 0.0:
            return None
        if v < 0.0:
            sign = -sign
        log_sum += math.log(abs(v))
    return log_sum, sign


def ml(
    params: MittagLefflerParams,
    x: int,
    tol: float = 1e-12,
    kmax: int = 500,
) -> float:
    """Evaluate e_{order,beta}(lam, x) at an integer x >= -1.

    Terms are accumulated until |term| <= tol * max(1, |partial|) for
    :data:`_RUN_LENGTH` consecutive k.  Raises
    :class:`MLNonConvergenceError` when kmax terms did not suffice.
    """
    if x != int(x):
        raise ValueError(f"argument must be an integer, got {x!r}")
    x = int(x)
    if x < -1:
        raise ValueError(f"argument must be >= -1, got {x!r}")
    if x == -1:
        return 0.0
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")

    a, b, lam = params.order, params.beta, params.lam
    small_x = x <= _PRODUCT_MAX_X
    fact = gamma(x + 1.0)
    log_fact = 0.0 if small_x else log_gamma_signed(x + 1.0).log_magnitude
    total = 0.0
    lam_pow = 1.0
    run = 0
    for k in range(kmax):
        c = k * a + b
        if small_x:
            term = lam_pow * _rising(c, x) / fact
        else:
            sl = _rising_signed_log(c, x)
            if sl is None:
                term = 0.0
            else:
                log_r, sign = sl
                try:
                    term = lam_pow * sign * math.exp(log_r - log_fact)
                except OverflowError:
                    term = lam_pow * sign * math.inf
        total += term
        if abs(term) <= tol * max(1.0, abs(total)):
            run += 1
            if run >= _RUN_LENGTH:
                return total
        else:
            run = 0
        lam_pow *= lam
    raise MLNonConvergenceError(
        f"series not converged after {kmax} terms (order={a}, beta={b}, "
        f"lambda={lam}, x={x})"
    )


def ml_profile(
    params: MittagLefflerParams,
    x_min: int,
    x_max: int,
    tol: float = 1e-12,
    kmax: int = 500,
) -> list[float]:
    """Pointwise ml on the inclusive integer range [x_min, x_max].

    Element j equals ``ml(params, x_min + j)`` bit for bit.
    """
    if x_min < -1:
        raise ValueError(f"x_min must be >= -1, got {x_min!r}")
    if x_max < x_min:
        raise ValueError("x_max must be >= x_min")
    return [ml(params, x, tol=tol, kmax=kmax) for x in range(x_min, x_max + 1)]
