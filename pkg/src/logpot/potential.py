"""Logarithmic potentials of discrete measures and the variational residuals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import matmul_toeplitz

from .fields import Field
from .grid import DiscreteMeasure, Samples
from .hilbert import hilbert_pv
from .support import interior_support_mask, support_mask

CHUNK = 2048


def _xlogx(s):
    s = np.abs(s)
    return np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)


def cell_log_average(left, right):
    """Average of ``ln(1/|x - t|)`` over a cell, with ``left = x - a``, ``right = b - x``.

    Valid for x inside ``[a, b]``, i.e. ``left, right >= 0``.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    width = left + right
    return 1.0 - (_xlogx(left) + _xlogx(right)) / width


def _log_antiderivative(s):
    """``G(s) = s ln|s| - s``, an antiderivative of ``ln|s|`` (G(0) = 0)."""
    return np.sign(s) * _xlogx(s) - s


def log_potential(mu: DiscreteMeasure, x):
    """``U(x) = int ln(1/|x - t|) dmu(t)`` for the piecewise-constant density of ``mu``.

    Every cell contributes its exact average of ``ln(1/|x - t|)``, so the
    singular cell is never point-sampled and neighbouring cells carry no
    first-order midpoint bias.
    """
    g = mu.grid
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(xs)):
        raise ValueError("potential needs finite evaluation points")
    edges = g.lo + np.arange(g.n + 1) * g.spacing
    masses = mu.masses
    out = np.empty(xs.size)
    for start in range(0, xs.size, CHUNK):
        chunk = xs[start : start + CHUNK]
        antider = _log_antiderivative(edges[None, :] - chunk[:, None])
        out[start : start + CHUNK] = -(np.diff(antider, axis=1) / g.spacing) @ masses
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def potential_at_nodes(mu: DiscreteMeasure) -> np.ndarray:
    """:func:`log_potential` at every node of ``mu``'s grid, via a Toeplitz product."""
    g = mu.grid
    h = g.spacing
    offsets = (np.arange(g.n + 1) - 0.5) * h
    offsets[0] = 0.0
    col = -np.diff(_log_antiderivative(offsets)) / h
    col[0] = 1.0 + math.log(2.0 / h)
    return matmul_toeplitz(col, mu.masses)


def _integrate_between(f: Samples, a: float, b: float) -> float:
    """Integral over ``[a, b]`` of the piecewise-linear interpolant of ``f``."""
    x = f.grid.nodes
    inner = (x > a) & (x < b)
    xs = np.concatenate([[a], x[inner], [b]])
    ys = np.interp(xs, x, f.values)
    return float(np.trapezoid(ys, xs))


def _cell_log_abs(f: Samples, a: float) -> np.ndarray:
    """Exact cell averages of ``ln|x - a|``.

    Midpoint sampling next to the singularity is only first order, so every
    cell uses the closed form ``G(s) = s ln|s| - s`` of the antiderivative.
    """
    g = f.grid
    edges = g.lo + np.arange(g.n + 1) * g.spacing - a
    return np.diff(_log_antiderivative(edges)) / g.spacing


def log_integral_diff(f: Samples, a: float, b: float, keep: float = 0.8) -> tuple[float, float]:
    """Both sides of ``(1/pi) int f ln|(x-a)/(x-b)| dx = -int_a^b Hf dx``."""
    if not a < b:
        raise ValueError(f"need a < b, got ({a}, {b})")
    g = f.grid
    mid, half = 0.5 * (g.lo + g.hi), 0.5 * keep * g.width
    if abs(a - mid) > half or abs(b - mid) > half:
        raise ValueError(f"[{a}, {b}] leaves the trusted interior window of the grid")
    factor = _cell_log_abs(f, a) - _cell_log_abs(f, b)
    lhs = float(np.sum(f.values * factor) * g.spacing / np.pi)
    rhs = -_integrate_between(hilbert_pv(f), a, b)
    return lhs, rhs


@dataclass(frozen=True)
class ResidualReport:
    eq_residual_max: float
    ineq_violation_max: float
    support_mask: np.ndarray

    @property
    def support_cells(self) -> list[int]:
        return np.nonzero(self.support_mask)[0].tolist()

    def to_dict(self) -> dict:
        return {
            "eq_residual_max": self.eq_residual_max,
            "ineq_violation_max": self.ineq_violation_max,
            "support_cells": self.support_cells,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, n: int) -> "ResidualReport":
        mask = np.zeros(n, dtype=bool)
        mask[np.asarray(data["support_cells"], dtype=int)] = True
        return cls(float(data["eq_residual_max"]), float(data["ineq_violation_max"]), mask)


def variational_residuals(mu: DiscreteMeasure, fld: Field, F: float,
                          threshold: float = 1e-8) -> ResidualReport:
    """Measure how far ``U + V`` is from ``F`` on the support and below it elsewhere."""
    if not math.isfinite(F):
        raise ValueError(f"F must be finite, got {F}")
    gap = potential_at_nodes(mu) + fld.V(mu.grid.nodes) - F
    mask = support_mask(mu, threshold)
    inner = interior_support_mask(mu, threshold)
    eq = float(np.max(np.abs(gap[inner]))) if inner.any() else 0.0
    ineq = float(np.max(np.maximum(-gap[~mask], 0.0))) if (~mask).any() else 0.0
    return ResidualReport(eq, ineq, mask)


def estimate_F(mu: DiscreteMeasure, fld: Field, threshold: float = 1e-8) -> float:
    inner = interior_support_mask(mu, threshold)
    if not inner.any():
        raise ValueError("measure has no support interior to estimate F from")
    total = potential_at_nodes(mu) + fld.V(mu.grid.nodes)
    return float(np.median(total[inner]))
