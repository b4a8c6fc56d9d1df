"""Uniform midpoint grids, tabulated functions and discrete probability measures."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MASS_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Partition of ``[lo, hi]`` into ``n`` equal cells, sampled at cell midpoints."""

    lo: float
    hi: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"grid endpoints must be finite, got ({self.lo}, {self.hi})")
        if not self.hi > self.lo:
            raise ValueError(f"need hi > lo, got ({self.lo}, {self.hi})")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need an integer n >= 2, got {self.n}")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "n", int(self.n))
        nodes = self.lo + (np.arange(self.n) + 0.5) * self.spacing
        object.__setattr__(self, "nodes", _frozen(nodes))

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def cell_index(self, x) -> np.ndarray:
        """Index of the cell containing ``x`` (-1 or n when outside)."""
        idx = np.floor((np.asarray(x, dtype=float) - self.lo) / self.spacing).astype(int)
        # a point on the right endpoint belongs to the last cell
        idx = np.where(np.asarray(x) == self.hi, self.n - 1, idx)
        return np.clip(idx, -1, self.n)

    def interior_mask(self, keep: float = 0.8) -> np.ndarray:
        """Nodes inside the central ``keep`` fraction of the interval."""
        mid = 0.5 * (self.lo + self.hi)
        half = 0.5 * keep * self.width
        return np.abs(self.nodes - mid) <= half

    def padded(self, cells_left: int, cells_right: int) -> "Grid":
        return Grid(
            self.lo - cells_left * self.spacing,
            self.hi + cells_right * self.spacing,
            self.n + cells_left + cells_right,
        )

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "n": self.n}


def make_grid(lo: float, hi: float, n: int) -> Grid:
    return Grid(lo, hi, n)


@dataclass(frozen=True)
class Samples:
    """Real function tabulated at the nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, grid: Grid) -> "Samples":
        return cls(grid, func(grid.nodes))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def __add__(self, other: "Samples") -> "Samples":
        check_same_grid(self, other)
        return Samples(self.grid, self.values + other.values)

    def __sub__(self, other: "Samples") -> "Samples":
        check_same_grid(self, other)
        return Samples(self.grid, self.values - other.values)

    def __mul__(self, other) -> "Samples":
        if isinstance(other, Samples):
            check_same_grid(self, other)
            return Samples(self.grid, self.values * other.values)
        return Samples(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Samples":
        return Samples(self.grid, -self.values)

    def integral(self) -> float:
        """Cell-sum quadrature of the tabulated function over the grid."""
        return float(np.sum(self.values) * self.grid.spacing)

    def to_csv(self, path=None) -> str:
        return write_csv(self.grid.nodes, self.values, path)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with piecewise-constant density ``weights`` on a grid."""

    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        mass = float(np.sum(w) * self.grid.spacing)
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"total mass is {mass!r}, expected 1; use normalize()")
        object.__setattr__(self, "weights", w)

    @property
    def masses(self) -> np.ndarray:
        """Mass carried by each cell."""
        return self.weights * self.grid.spacing

    def density(self) -> Samples:
        return Samples(self.grid, self.weights)

    def to_csv(self, path=None) -> str:
        return write_csv(self.grid.nodes, self.weights, path)


def normalize(weights, grid: Grid) -> DiscreteMeasure:
    w = np.asarray(weights, dtype=float)
    if w.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = float(np.sum(w)) * grid.spacing
    if total <= 0:
        raise ValueError("weights must have positive total mass")
    if abs(total - 1.0) <= MASS_TOL:
        # already a probability measure; returning it unchanged keeps normalize idempotent
        return DiscreteMeasure(grid, w)
    return DiscreteMeasure(grid, w / total)


def check_same_grid(*items) -> Grid:
    grid = items[0].grid
    for item in items[1:]:
        if item.grid != grid:
            raise ValueError(f"grid mismatch: {grid} vs {item.grid}")
    return grid


def pad_zeros(f: Samples, fraction: float) -> tuple[Samples, slice]:
    """Extend ``f`` by zeros on ``fraction`` of its width at each side.

    Returns the padded samples and the slice selecting the original nodes.
    """
    k = int(math.ceil(fraction * f.grid.n))
    grid = f.grid.padded(k, k)
    values = np.zeros(grid.n)
    values[k : k + f.grid.n] = f.values
    return Samples(grid, values), slice(k, k + f.grid.n)


def write_csv(x, values, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "value"])
    for xi, vi in zip(x, values):
        writer.writerow([f"{xi:.17g}", f"{vi:.17g}"])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path) -> Samples:
    """Read ``x,value`` rows written on a uniform midpoint grid."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise ValueError(f"{path}: expected header 'x,value'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two rows")
    x, values = data[:, 0], data[:, 1]
    h = (x[-1] - x[0]) / (len(x) - 1)
    grid = Grid(x[0] - 0.5 * h, x[-1] + 0.5 * h, len(x))
    if not np.allclose(grid.nodes, x, rtol=0, atol=1e-9 * max(1.0, np.abs(x).max())):
        raise ValueError(f"{path}: nodes are not a uniform grid")
    return Samples(grid, values)
