"""Discrete weighted-energy minimization for the equilibrium measure.

The unknown is the vector of cell masses ``p`` on the probability simplex.  The
energy ``p.K.p + 2 c.p`` discretizes ``I(mu) = iint ln(1/|x-t|) dmu dmu + 2 int V dmu``;
its stationarity conditions on the simplex are ``(K p + c)_i = F`` where
``p_i > 0`` and ``(K p + c)_i >= F`` elsewhere.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import matmul_toeplitz, toeplitz

from .fields import Field, parse_field
from .grid import DiscreteMeasure, Grid, Samples, make_grid, normalize
from .potential import ResidualReport, estimate_F, variational_residuals
from .support import extract_support

logger = logging.getLogger(__name__)

SELF_CELL = 1.5  # -iint_[0,1]^2 ln|x - y| dx dy


@dataclass(frozen=True)
class EnergyModel:
    grid: Grid
    kernel_column: np.ndarray
    c: np.ndarray

    @property
    def K(self) -> np.ndarray:
        return toeplitz(self.kernel_column)

    def matvec(self, p: np.ndarray) -> np.ndarray:
        return matmul_toeplitz(self.kernel_column, p)

    def energy(self, p: np.ndarray, Kp: np.ndarray | None = None) -> float:
        if Kp is None:
            Kp = self.matvec(p)
        return float(p @ Kp + 2.0 * self.c @ p)


def assemble_energy(grid: Grid, fld: Field) -> EnergyModel:
    c = np.asarray(fld.V(grid.nodes), dtype=float)
    if not np.all(np.isfinite(c)):
        raise ValueError(f"field {fld.name!r} is not finite on the grid")
    h = grid.spacing
    col = np.empty(grid.n)
    col[0] = math.log(1.0 / h) + SELF_CELL
    col[1:] = -np.log(np.arange(1, grid.n) * h)
    col.setflags(write=False)
    c.setflags(write=False)
    return EnergyModel(grid, col, c)


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 20000
    kkt_tol: float = 1e-6
    backtrack_factor: float = 2.0
    power_iters: int = 30
    support_threshold: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.kkt_tol > 0:
            raise ValueError("kkt_tol must be positive")
        if not self.backtrack_factor > 1:
            raise ValueError("backtrack_factor must exceed 1")
        if not 0 < self.support_threshold < 1:
            raise ValueError("support_threshold must lie in (0, 1)")


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{p >= 0, sum p = 1}`` by sorting."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(y - css[rho] / (rho + 1), 0.0)


def kkt_residual(model: EnergyModel, p: np.ndarray, Kp: np.ndarray | None = None) -> tuple[float, float]:
    """Relative violation of the discrete variational conditions and the implied ``F``."""
    if Kp is None:
        Kp = model.matvec(p)
    g = Kp + model.c
    F = float(p @ g)
    active = p > 0
    eq = np.max(np.abs(g[active] - F))
    ineq = np.max(np.maximum(F - g[~active], 0.0)) if (~active).any() else 0.0
    return float(max(eq, ineq) / (1.0 + abs(F))), F


def _lipschitz_estimate(model: EnergyModel, iters: int) -> float:
    # the energy is convex on the zero-sum tangent space only, so iterate there
    v = np.cos(np.linspace(0.0, 3.0 * np.pi, model.grid.n))
    lam = 1.0
    for _ in range(iters):
        v -= v.mean()
        w = model.matvec(v)
        w -= w.mean()
        lam = np.linalg.norm(w) / np.linalg.norm(v)
        v = w
    return 2.0 * lam


def minimize(model: EnergyModel, opts: SolverOptions | None = None,
             init: np.ndarray | None = None, history: list | None = None):
    """Monotone accelerated projected gradient on the mass simplex.

    Returns ``(measure, iterations, converged)``.  Each accepted iterate has
    energy no larger than the previous one; pass a list as ``history`` to
    record the energies.
    """
    opts = opts or SolverOptions()
    n = model.grid.n
    if init is None:
        x = np.full(n, 1.0 / n)
    else:
        x = project_simplex(np.asarray(init, dtype=float) * model.grid.spacing)
    Kx = model.matvec(x)
    Ex = model.energy(x, Kx)
    if history is not None:
        history.append(Ex)
    L = _lipschitz_estimate(model, opts.power_iters)
    y, Ky, t = x.copy(), Kx.copy(), 1.0
    res, _ = kkt_residual(model, x, Kx)
    converged = res <= opts.kkt_tol
    it = 0
    while not converged and it < opts.max_iters:
        it += 1
        grad = 2.0 * (Ky + model.c)
        Ey = model.energy(y, Ky)
        while True:
            z = project_simplex(y - grad / L)
            Kz = model.matvec(z)
            Ez = model.energy(z, Kz)
            d = z - y
            if Ez <= Ey + grad @ d + 0.5 * L * (d @ d) + 1e-13 * abs(Ey):
                break
            L *= opts.backtrack_factor
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if Ez <= Ex:
            # momentum step through the accepted point
            y = z + ((t - 1.0) / t_next) * (z - x)
            Ky = Kz + ((t - 1.0) / t_next) * (Kz - Kx)
            x, Kx, Ex = z, Kz, Ez
            t = t_next
        else:
            # restart from the incumbent when the extrapolation overshoots
            y, Ky, t = x.copy(), Kx.copy(), 1.0
        if history is not None:
            history.append(Ex)
        res, _ = kkt_residual(model, x, Kx)
        converged = res <= opts.kkt_tol
    logger.debug("minimize: %d iterations, relative KKT residual %.3g", it, res)
    if not converged:
        logger.warning("minimize stopped after %d iterations with KKT residual %.3g", it, res)
    return normalize(x / model.grid.spacing, model.grid), it, converged


@dataclass(frozen=True)
class EquilibriumResult:
    measure: DiscreteMeasure
    support: list
    F: float
    residuals: ResidualReport
    h_plus: Samples
    iterations: int
    converged: bool
    kkt_residual: float
    options: SolverOptions = field(default_factory=SolverOptions)
    field_spec: str = ""

    @property
    def grid(self) -> Grid:
        return self.measure.grid

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "field": self.field_spec,
            "weights": self.measure.weights.tolist(),
            "support": [list(iv) for iv in self.support],
            "F": self.F,
            "residuals": self.residuals.to_dict(),
            "h_plus": self.h_plus.values.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
            "options": asdict(self.options),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_dict(cls, data: dict) -> "EquilibriumResult":
        g = data["grid"]
        grid = make_grid(g["lo"], g["hi"], g["n"])
        measure = normalize(np.asarray(data["weights"], dtype=float), grid)
        return cls(
            measure=measure,
            support=[tuple(iv) for iv in data["support"]],
            F=float(data["F"]),
            residuals=ResidualReport.from_dict(data["residuals"], grid.n),
            h_plus=Samples(grid, data["h_plus"]),
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
            kkt_residual=float(data["kkt_residual"]),
            options=SolverOptions(**data.get("options", {})),
            field_spec=data.get("field", ""),
        )

    @classmethod
    def load(cls, path) -> "EquilibriumResult":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def field(self) -> Field:
        return parse_field(self.field_spec)


def solve_equilibrium(fld: Field, lo: float, hi: float, n: int,
                      opts: SolverOptions | None = None, init=None,
                      history: list | None = None) -> EquilibriumResult:
    opts = opts or SolverOptions()
    model = assemble_energy(make_grid(lo, hi, n), fld)
    mu, iterations, converged = minimize(model, opts, init=init, history=history)
    res, _ = kkt_residual(model, mu.masses)
    support = extract_support(mu, opts.support_threshold)
    F = estimate_F(mu, fld, opts.support_threshold)
    residuals = variational_residuals(mu, fld, F, opts.support_threshold)
    h_plus = Samples(mu.grid, (np.pi * mu.weights) ** 2)
    return EquilibriumResult(mu, support, F, residuals, h_plus, iterations, converged,
                             res, opts, fld.spec)


def random_start(n: int, seed: int = 0) -> np.ndarray:
    """Random feasible density (in units of 1/length before rescaling) for restarts."""
    w = np.random.default_rng(seed).random(n)
    return w / w.sum()


def uniqueness_gap(fld: Field, lo: float, hi: float, n: int,
                   opts: SolverOptions | None = None, seed: int = 0) -> float:
    """L1 distance between the densities reached from a uniform and a random start."""
    grid = make_grid(lo, hi, n)
    model = assemble_energy(grid, fld)
    a, _, _ = minimize(model, opts)
    b, _, _ = minimize(model, opts, init=random_start(n, seed) / grid.spacing)
    return float(np.sum(np.abs(a.weights - b.weights)) * grid.spacing)
