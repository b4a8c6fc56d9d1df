"""Equilibrium measures of the logarithmic potential with an external field on the line."""

from .diagnostics import (
    SweepReport,
    Verdict,
    gradient_identity_residual,
    l2_mass,
    orthogonality_defect,
    sqrt_density,
    truncation_sweep,
)
from .fields import (
    Admissibility,
    Field,
    SignProfile,
    admissibility_check,
    field_catalog,
    parse_field,
    sign_profile,
)
from .grid import DiscreteMeasure, Grid, Samples, make_grid, normalize
from .hilbert import (
    hilbert_cauchy,
    hilbert_indicator,
    hilbert_pv,
    pairing_defect,
    tricomi_defect,
)
from .potential import (
    ResidualReport,
    estimate_F,
    log_integral_diff,
    log_potential,
    variational_residuals,
)
from .solver import (
    EnergyModel,
    EquilibriumResult,
    SolverOptions,
    assemble_energy,
    minimize,
    solve_equilibrium,
)
from .support import extract_support

__version__ = "0.1.0"
