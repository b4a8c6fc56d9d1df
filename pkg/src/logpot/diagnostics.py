"""Identity checks applied to computed equilibrium measures, and truncation sweeps."""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .fields import Field
from .grid import Samples, pad_zeros
from .hilbert import check_decay, hilbert_pv, tricomi_defect
from .solver import EquilibriumResult, SolverOptions, solve_equilibrium
from .support import interior_support_mask

logger = logging.getLogger(__name__)

# zero padding on each side of a solver grid; the measure vanishes off the grid
RESULT_PAD = 0.5
TRUSTED_WINDOW = 0.8
CONVERGING_TOL = 0.05
DIVERGING_GROWTH = 0.15


class Verdict(str, enum.Enum):
    CONVERGING = "converging"
    DIVERGING = "diverging"
    INCONCLUSIVE = "inconclusive"


def sqrt_density(result: EquilibriumResult, pad: float = 0.0) -> Samples:
    """``f = sqrt(h+) = pi * density``, optionally extended by zeros beyond the grid."""
    f = Samples(result.grid, np.pi * result.measure.weights)
    if pad > 0:
        f, _ = pad_zeros(f, pad)
    return f


def l2_mass(f: Samples) -> float:
    """``int f^2``, i.e. ``int h+`` when ``f = sqrt(h+)``."""
    return float(np.sum(f.values**2) * f.grid.spacing)


def orthogonality_defect(f: Samples) -> float:
    check_decay(f)
    return (f * hilbert_pv(f)).integral()


def _check_window(result: EquilibriumResult) -> np.ndarray:
    mask = interior_support_mask(result.measure, result.options.support_threshold)
    return mask & result.grid.interior_mask(TRUSTED_WINDOW)


def gradient_identity_residual(result: EquilibriumResult, fld: Field) -> float:
    """Largest ``|V'(x) - Hf(x)|`` over the trusted part of the support interior."""
    mask = _check_window(result)
    if not mask.any():
        raise ValueError("result has no support interior inside the trusted window")
    f, inner = pad_zeros(sqrt_density(result), RESULT_PAD)
    ft = hilbert_pv(f).values[inner]
    x = result.grid.nodes
    return float(np.max(np.abs(fld.dV(x[mask]) - ft[mask])))


def result_tricomi(result: EquilibriumResult) -> tuple[float, float]:
    """Scalar and largest pointwise Tricomi defect for a solver result."""
    f, inner = pad_zeros(sqrt_density(result), RESULT_PAD)
    scalar, pointwise = tricomi_defect(f)
    mask = _check_window(result)
    return scalar, float(np.max(np.abs(pointwise.values[inner][mask]))) if mask.any() else 0.0


@dataclass(frozen=True)
class SweepRow:
    L: float
    n: int
    l2_mass: float
    F: float
    support_fraction: float
    orth_defect: float
    grad_identity_residual: float
    converged: bool


@dataclass(frozen=True)
class SweepReport:
    field_name: str
    rows: list
    verdict: Verdict

    def __post_init__(self):
        Ls = [r.L for r in self.rows]
        if any(b <= a for a, b in zip(Ls, Ls[1:])):
            raise ValueError("sweep L values must increase strictly")

    @property
    def l2_masses(self) -> list[float]:
        return [r.l2_mass for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "field": self.field_name,
            "verdict": self.verdict.value,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(SweepRow.__dataclass_fields__)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for row in self.rows:
            writer.writerow([getattr(row, k) for k in names])
        return buf.getvalue()

    def save(self, path, csv_path=None) -> None:
        Path(path).write_text(self.to_json())
        if csv_path is not None:
            Path(csv_path).write_text(self.to_csv())


def sweep_verdict(rows: list[SweepRow]) -> Verdict:
    if not all(r.converged for r in rows):
        return Verdict.INCONCLUSIVE
    m = [r.l2_mass for r in rows]
    if abs(m[-1] - m[-2]) < CONVERGING_TOL * abs(m[-2]):
        return Verdict.CONVERGING
    if all(b > (1.0 + DIVERGING_GROWTH) * a for a, b in zip(m, m[1:])):
        return Verdict.DIVERGING
    return Verdict.INCONCLUSIVE


def _sweep_row(fld: Field, L: float, spacing: float, opts: SolverOptions) -> SweepRow:
    n = int(round(2 * L / spacing))
    result = solve_equilibrium(fld, -L, L, n, opts)
    f_padded = sqrt_density(result, pad=RESULT_PAD)
    covered = sum(b - a for a, b in result.support)
    try:
        grad = gradient_identity_residual(result, fld)
    except ValueError:
        grad = float("nan")
    row = SweepRow(
        L=float(L),
        n=n,
        l2_mass=l2_mass(sqrt_density(result)),
        F=result.F,
        support_fraction=covered / (2 * L),
        orth_defect=orthogonality_defect(f_padded),
        grad_identity_residual=grad,
        converged=result.converged,
    )
    logger.info("sweep %s L=%g: l2_mass=%.6g F=%.6g", fld.name, L, row.l2_mass, row.F)
    return row


def truncation_sweep(fld: Field, Ls, spacing: float = 0.02,
                     opts: SolverOptions | None = None, jobs: int = 1) -> SweepReport:
    """Solve on ``(-L, L)`` for each ``L`` at fixed spacing and classify ``int h+``."""
    Ls = [float(L) for L in Ls]
    if len(Ls) < 3:
        raise ValueError(f"a sweep needs at least 3 values of L, got {len(Ls)}")
    if any(b <= a for a, b in zip(Ls, Ls[1:])) or Ls[0] <= 0:
        raise ValueError("L values must be positive and strictly increasing")
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    opts = opts or SolverOptions()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda L: _sweep_row(fld, L, spacing, opts), Ls))
    else:
        rows = [_sweep_row(fld, L, spacing, opts) for L in Ls]
    return SweepReport(fld.name, rows, sweep_verdict(rows))
