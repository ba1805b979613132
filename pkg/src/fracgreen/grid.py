"""Shifted integer grids and real-valued functions sampled on them.

A grid is the set {a, a+1, ..., a+count-1} for a real start point a.  Point
to index mapping is exact up to the 1e-9 snap, which keeps floating offsets
safe at the sizes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .problem import ProblemSpec

#: Snap tolerance for point -> index conversion.
SNAP = 1e-9


class OffGridError(ValueError):
    """A point does not lie on the grid (snap or range check failed)."""


class GridMismatchError(ValueError):
    """Two grid functions were combined but live on different grids."""


@dataclass(frozen=True)
class Grid:
    """Finite window of the shifted integer lattice starting at ``offset``."""

    offset: float
    count: int

    def __post_init__(self) -> None:
        if not isinstance(self.count, int) or self.count < 1:
            raise ValueError(f"count must be an integer >= 1, got {self.count!r}")

    def point(self, k: int) -> float:
        if not 0 <= k < self.count:
            raise IndexError(f"index {k} out of range for count {self.count}")
        return self.offset + k

    def points(self) -> np.ndarray:
        return self.offset + np.arange(self.count, dtype=float)

    def index(self, p: float) -> int:
        k = round(p - self.offset)
        if abs(p - self.offset - k) > SNAP:
            raise OffGridError(f"{p!r} is not on the grid starting at {self.offset!r}")
        if not 0 <= k < self.count:
            raise OffGridError(f"{p!r} lies outside the grid window")
        return int(k)

    def matches(self, other: "Grid") -> bool:
        return self.count == other.count and abs(self.offset - other.offset) <= SNAP

    def shifted(self, delta: float) -> "Grid":
        return Grid(self.offset + delta, self.count)


def index_of(grid: Grid, p: float) -> int:
    """Index k with grid.point(k) == p, or :class:`OffGridError`."""
    return grid.index(p)


@dataclass(frozen=True)
class GridFunction:
    """Real samples on a :class:`Grid`; values are finite and read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) != self.grid.count:
            raise ValueError(
                f"values must be a 1-d sequence of length {self.grid.count}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must all be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.count))

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[float], float]) -> "GridFunction":
        return cls(grid, np.array([fn(p) for p in grid.points()], dtype=float))

    @property
    def count(self) -> int:
        return self.grid.count

    def value_at(self, p: float) -> float:
        return float(self.values[self.grid.index(p)])

    def zero_extended(self, count: int) -> "GridFunction":
        """Same function on a longer window, padded with zeros on the right."""
        if count < self.grid.count:
            raise ValueError("zero_extended cannot shrink the window")
        vals = np.zeros(count)
        vals[: self.grid.count] = self.values
        return GridFunction(Grid(self.grid.offset, count), vals)


def make_solution_grid(spec: ProblemSpec) -> Grid:
    """Grid carrying the solution samples: points v-2, ..., v+b+1."""
    return Grid(spec.upsilon - 2.0, spec.b + 4)


def make_forcing_grid(spec: ProblemSpec) -> Grid:
    """Grid carrying the forcing samples: points v-1, ..., v+b."""
    return Grid(spec.upsilon - 1.0, spec.b + 2)
