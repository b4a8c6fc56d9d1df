"""Catalog of analytic external fields and their qualitative checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .grid import Grid

SIGN_ZERO_TOL = 1e-12
PROBE_POINTS = (-7.3, -2.0, -1.0, -0.4, 0.0, 0.3, 1.0, 2.5, 6.1)


class Admissibility(str, enum.Enum):
    CONFINED = "confined"
    BORDERLINE = "borderline"
    NON_CONFINING = "non-confining"


class SignProfile(str, enum.Enum):
    NONNEGATIVE = "nonnegative"
    NONPOSITIVE = "nonpositive"
    MIXED = "mixed"


@dataclass(frozen=True)
class Field:
    name: str
    V: Callable[[np.ndarray], np.ndarray]
    dV: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    @property
    def spec(self) -> str:
        """String that :func:`parse_field` turns back into this field."""
        if self.name == "quadratic":
            return f"quadratic:t={self.params['t']!r}"
        if self.name == "polynomial":
            return "poly:" + ",".join(repr(c) for c in self.params["coeffs"])
        return self.name

    def shifted(self, c: float) -> "Field":
        return Field(self.name, lambda x: self.V(x) + c, self.dV, {**self.params, "shift": c})


def _cauchy_log() -> Field:
    return Field(
        "cauchy-log",
        lambda x: 0.5 * np.log1p(np.asarray(x, dtype=float) ** 2),
        lambda x: np.asarray(x, dtype=float) / (1.0 + np.asarray(x, dtype=float) ** 2),
    )


def _quadratic(t: float) -> Field:
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise ValueError(f"quadratic field needs t > 0, got {t}")
    return Field(
        "quadratic",
        lambda x: t * np.asarray(x, dtype=float) ** 2,
        lambda x: 2.0 * t * np.asarray(x, dtype=float),
        {"t": t},
    )


def _arctan() -> Field:
    return Field("arctan", np.arctan, lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2))


def _polynomial(coeffs) -> Field:
    coeffs = tuple(float(c) for c in coeffs)
    if not coeffs or not all(math.isfinite(c) for c in coeffs):
        raise ValueError("polynomial field needs finite coefficients c0, c1, ...")
    p = Polynomial(coeffs)
    dp = p.deriv()
    return Field(
        "polynomial",
        lambda x: p(np.asarray(x, dtype=float)),
        lambda x: dp(np.asarray(x, dtype=float)),
        {"coeffs": coeffs},
    )


def field_catalog(name: str, **params) -> Field:
    if name == "cauchy-log":
        return _cauchy_log()
    if name == "quadratic":
        return _quadratic(params.get("t", 1.0))
    if name == "arctan":
        return _arctan()
    if name in ("polynomial", "poly"):
        return _polynomial(params["coeffs"])
    raise ValueError(f"unknown field {name!r}; choose cauchy-log, quadratic, arctan or polynomial")


def parse_field(spec: str) -> Field:
    """Parse ``cauchy-log``, ``arctan``, ``quadratic:t=0.5`` or ``poly:c0,c1,...``."""
    name, _, rest = spec.strip().partition(":")
    if name in ("poly", "polynomial"):
        try:
            coeffs = [float(c) for c in rest.split(",") if c.strip()]
        except ValueError:
            raise ValueError(f"bad polynomial coefficients in {spec!r}") from None
        return field_catalog("polynomial", coeffs=coeffs)
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"expected key=value in field spec {spec!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ValueError(f"bad value for {key!r} in field spec {spec!r}") from None
    if name != "quadratic" and params:
        raise ValueError(f"field {name!r} takes no parameters")
    return field_catalog(name, **params)


def derivative_defect(fld: Field, probes=PROBE_POINTS, h: float = 1e-5) -> float:
    """Largest scaled mismatch between ``dV`` and a central difference of ``V``."""
    x = np.asarray(probes, dtype=float)
    fd = (fld.V(x + h) - fld.V(x - h)) / (2 * h)
    d = fld.dV(x)
    return float(np.max(np.abs(d - fd) / (1.0 + np.abs(d))))


def admissibility_check(fld: Field, lo: float, hi: float) -> Admissibility:
    if not hi > lo:
        raise ValueError(f"need hi > lo, got ({lo}, {hi})")
    ends = np.array([lo, hi], dtype=float)
    with np.errstate(divide="ignore"):
        margin = fld.V(ends) - np.log(np.abs(ends))
    if np.all(margin >= 5.0):
        return Admissibility.CONFINED
    if np.any(margin <= 0.0):
        return Admissibility.NON_CONFINING
    return Admissibility.BORDERLINE


def sign_profile(fld: Field, grid: Grid) -> SignProfile:
    d = fld.dV(grid.nodes)
    pos = np.any(d > SIGN_ZERO_TOL)
    neg = np.any(d < -SIGN_ZERO_TOL)
    if pos and neg:
        return SignProfile.MIXED
    return SignProfile.NONPOSITIVE if neg else SignProfile.NONNEGATIVE
