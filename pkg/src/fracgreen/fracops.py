"""Fractional sums and differences on finite grid functions.

The fractional sum of order v > 0 of f defined on the grid starting at a is

    (S_v f)(t) = (1/Gamma(v)) * sum_{s=a}^{t-v} (t-s-1)^(v-1) f(s),

a weighted running sum living on the grid starting at a+v.  The fractional
difference of order v is D^N composed with S_{N-v}, N = ceil(v).  Weights go
through :func:`fracgreen.special.falling_factorial` so the pole conventions
apply uniformly; summation is dense O(n^2), which is exact and fast at the
window sizes this package targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, GridMismatchError
from .special import falling_factorial, gamma


class TooShortError(ValueError):
    """A difference was requested on a window with too few samples."""


@dataclass(frozen=True)
class FractionalOrder:
    """Order nu > 0 together with its ceiling N, N-1 < nu <= N."""

    nu: float

    def __post_init__(self) -> None:
        if not self.nu > 0.0:
            raise ValueError(f"order must be positive, got {self.nu!r}")

    @property
    def ceiling(self) -> int:
        return math.ceil(self.nu)


def _sum_weights(nu: float, n: int) -> np.ndarray:
    # w[i] = (nu+i-1)^(nu-1); w[0] = Gamma(nu).
    return np.array([falling_factorial(nu + i - 1.0, nu - 1.0) for i in range(n)])


def fractional_sum(f: GridFunction, nu: float) -> GridFunction:
    """Fractional sum of order nu > 0; output lives on the grid shifted by nu.

    Output value at a+nu+k is (1/Gamma(nu)) * sum_j (nu+k-j-1)^(nu-1) f(a+j),
    j = 0..k.
    """
    if not nu > 0.0:
        raise ValueError(f"order must be positive, got {nu!r}")
    n = f.count
    w = _sum_weights(nu, n)
    out = np.convolve(w, f.values)[:n] / gamma(nu)
    return GridFunction(f.grid.shifted(nu), out)


def forward_difference(f: GridFunction, order: int = 1) -> GridFunction:
    """Iterated first difference g(t) = f(t+1) - f(t); count drops by order."""
    if order < 1:
        raise ValueError(f"difference order must be >= 1, got {order!r}")
    if f.count <= order:
        raise TooShortError(
            f"need more than {order} samples, got {f.count}"
        )
    return GridFunction(
        Grid(f.grid.offset, f.count - order), np.diff(f.values, n=order)
    )


def fractional_difference(f: GridFunction, nu: float) -> GridFunction:
    """Riemann-Liouville difference D^nu f = D^N (S_{N-nu} f), N = ceil(nu).

    Output lives on the grid shifted by N-nu with count reduced by N.  For
    integer nu the inner fractional sum is the identity and the operator
    reduces to the plain N-fold difference.
    """
    order = FractionalOrder(nu)
    n_int = order.ceiling
    if f.count <= n_int:
        raise TooShortError(f"need more than {n_int} samples, got {f.count}")
    inner = f if n_int == nu else fractional_sum(f, n_int - nu)
    return forward_difference(inner, n_int)


def convolve_shifted(f: GridFunction, g: GridFunction) -> GridFunction:
    """Convolution product on a common grid starting at a:

        (f * g)(t) = sum_{s=a}^{t} f(t - s + a) g(s).

    The unit pulse at a is the identity element.
    """
    if not f.grid.matches(g.grid):
        raise GridMismatchError("convolution requires identical grids")
    out = np.convolve(f.values, g.values)[: f.count]
    return GridFunction(f.grid, out)
