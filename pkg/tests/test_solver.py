import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from logpot import field_catalog, make_grid, solve_equilibrium
from logpot.grid import DiscreteMeasure
from logpot.solver import (
    EquilibriumResult,
    SolverOptions,
    assemble_energy,
    kkt_residual,
    minimize,
    project_simplex,
    uniqueness_gap,
)
from logpot.support import extract_support, support_mask
from oracles import galerkin_model, kkt_active_set
from conftest import sup_on


def test_assemble_two_cells():
    model = assemble_energy(make_grid(0.0, 1.0, 2), field_catalog("quadratic", t=1.0))
    K = model.K
    assert K[0, 0] == pytest.approx(math.log(2) + 1.5)
    assert K[0, 1] == pytest.approx(math.log(2))
    np.testing.assert_allclose(model.c, [0.0625, 0.5625])


def test_self_cell_constant():
    # -iint_[0,1]^2 ln|x-y| over the triangle y < x, doubled
    val, _ = integrate.dblquad(lambda u, x: math.log(x - u), 0, 1, 0, lambda x: x)
    assert -2 * val == pytest.approx(1.5, abs=1e-7)


def test_energy_matrix_symmetric_and_positive_on_zero_sum():
    model = assemble_energy(make_grid(-2, 2, 64), field_catalog("arctan"))
    K = model.K
    np.testing.assert_array_equal(K, K.T)
    P = np.eye(64) - 1.0 / 64
    assert np.linalg.eigvalsh(P @ K @ P)[1] > 0


def test_matvec_matches_dense():
    model = assemble_energy(make_grid(-3, 3, 50), field_catalog("cauchy-log"))
    p = np.random.default_rng(3).random(50)
    np.testing.assert_allclose(model.matvec(p), model.K @ p, rtol=1e-12, atol=1e-12)


def test_non_finite_field_rejected():
    bad = field_catalog("polynomial", coeffs=[0, 1]).__class__(
        "bad", lambda x: np.log(np.asarray(x)), lambda x: 1 / np.asarray(x), {})
    with np.errstate(invalid="ignore"), pytest.raises(ValueError):
        assemble_energy(make_grid(-1, 1, 10), bad)


@pytest.mark.parametrize("kwargs", [{"max_iters": 0}, {"kkt_tol": 0.0}, {"backtrack_factor": 1.0},
                                    {"support_threshold": 1.0}])
def test_options_validation(kwargs):
    with pytest.raises(ValueError):
        SolverOptions(**kwargs)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60))
def test_projection_lands_on_simplex(y):
    p = project_simplex(np.array(y))
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=30), st.integers(0, 1000))
def test_projection_is_nearest(y, seed):
    y = np.array(y)
    p = project_simplex(y)
    q = np.random.default_rng(seed).dirichlet(np.ones(y.size))
    assert np.sum((y - p) ** 2) <= np.sum((y - q) ** 2) + 1e-9
    # idempotent on the simplex
    np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)


@pytest.mark.parametrize("spec,lo,hi", [("quadratic", -2, 2), ("arctan", -4, 4), ("cauchy-log", -6, 6)])
def test_minimizer_matches_active_set_oracle(spec, lo, hi):
    params = {"t": 1.0} if spec == "quadratic" else {}
    fld = field_catalog(spec, **params)
    model = assemble_energy(make_grid(lo, hi, 48), fld)
    p_ref, F_ref = kkt_active_set(model.K, model.c)
    mu, _, converged = minimize(model, SolverOptions(kkt_tol=1e-7, max_iters=200000))
    assert converged
    np.testing.assert_allclose(mu.masses, p_ref, atol=1e-5)
    assert kkt_residual(model, mu.masses)[1] == pytest.approx(F_ref, abs=1e-6)


def test_arcsine_without_field():
    # V = 0 on [-1, 1]: density 1/(pi sqrt(1-x^2)) and F = ln 2
    zero = field_catalog("polynomial", coeffs=[0.0])
    res = solve_equilibrium(zero, -1, 1, 1024)
    x = res.grid.nodes
    inner = np.abs(x) < 0.8
    exact = 1 / (np.pi * np.sqrt(1 - x**2))
    assert sup_on(inner, res.measure.weights, exact) < 1e-2
    assert res.F == pytest.approx(math.log(2), abs=1e-3)


def test_cauchy_density(cauchy_result):
    x = cauchy_result.grid.nodes
    exact = 1 / (np.pi * (1 + x**2))
    assert cauchy_result.converged
    assert sup_on(np.abs(x) <= 5, cauchy_result.measure.weights, exact) <= 2e-2
    assert abs(cauchy_result.F) <= 5e-2


def test_cauchy_error_shrinks_with_resolution():
    fld = field_catalog("cauchy-log")
    errs = []
    for n in (512, 1024, 2048):
        res = solve_equilibrium(fld, -40, 40, n)
        x = res.grid.nodes
        errs.append(sup_on(np.abs(x) <= 5, res.measure.weights, 1 / (np.pi * (1 + x**2))))
    assert errs[0] / errs[1] >= 1.5 and errs[1] / errs[2] >= 1.5


def test_semicircle_unit_quadratic(semicircle_result):
    # V = x^2 gives density (2/pi) sqrt(1 - x^2) on [-1, 1] and F = 1/2 + ln 2
    res = semicircle_result
    assert len(res.support) == 1
    a, b = res.support[0]
    h = res.grid.spacing
    assert abs(a + 1) <= 2 * h and abs(b - 1) <= 2 * h
    x = res.grid.nodes
    exact = (2 / np.pi) * np.sqrt(np.clip(1 - x**2, 0, None))
    assert sup_on(np.abs(x) < 0.95, res.measure.weights, exact) <= 2e-2
    assert res.F == pytest.approx(0.5 + math.log(2), abs=5e-3)


def test_semicircle_half_quadratic():
    # V = x^2 / 2 gives density (1/pi) sqrt(2 - x^2) on [-sqrt 2, sqrt 2]
    res = solve_equilibrium(field_catalog("quadratic", t=0.5), -3, 3, 2048)
    assert len(res.support) == 1
    a, b = res.support[0]
    h = res.grid.spacing
    assert abs(a + math.sqrt(2)) <= 2 * h and abs(b - math.sqrt(2)) <= 2 * h
    x = res.grid.nodes
    exact = np.sqrt(np.clip(2 - x**2, 0, None)) / np.pi
    assert sup_on(np.abs(x) < 1.3, res.measure.weights, exact) <= 2e-2


def test_F_against_galerkin_oracle():
    fld = field_catalog("quadratic", t=1.0)
    K, c, _ = galerkin_model(fld.V, -2, 2, 64)
    _, F_ref = kkt_active_set(K, c)
    res = solve_equilibrium(fld, -2, 2, 64, SolverOptions(kkt_tol=1e-7, max_iters=200000))
    assert res.F == pytest.approx(F_ref, abs=2e-2)
    assert F_ref == pytest.approx(0.5 + math.log(2), abs=1e-2)


def test_extract_support_cases():
    g = make_grid(0, 10, 10)
    w = np.zeros(10)
    w[2:5] = 1
    w[7] = 1  # single cell run is dropped
    w[8] = 1
    mu = DiscreteMeasure(g, w / (w.sum() * g.spacing))
    assert extract_support(mu) == [(2.0, 5.0)]
    assert support_mask(mu).sum() == 3
    with pytest.raises(ValueError):
        extract_support(mu, threshold=0.0)


def test_arctan_support_at_left_edge(arctan_result):
    assert arctan_result.converged
    (a, b), = arctan_result.support
    assert a == pytest.approx(-10.0)
    assert b < 0


@pytest.mark.parametrize("spec,lo,hi", [("cauchy-log", -20, 20), ("quadratic:t=1", -3, 3), ("arctan", -10, 10)])
def test_energy_monotone(spec, lo, hi):
    from logpot import parse_field
    history = []
    solve_equilibrium(parse_field(spec), lo, hi, 512, history=history)
    h = np.array(history)
    assert len(h) > 2
    assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]))


def test_discrete_kkt_at_convergence(cauchy_result, semicircle_result, arctan_result):
    for res in (cauchy_result, semicircle_result, arctan_result):
        assert res.converged
        assert res.kkt_residual <= res.options.kkt_tol


def test_continuous_residuals_small(cauchy_result, semicircle_result, arctan_result):
    # measured against exact cell averages of the log kernel, a finer model than the solver's
    for res in (cauchy_result, semicircle_result, arctan_result):
        assert res.residuals.eq_residual_max <= 2e-2
        assert res.residuals.ineq_violation_max <= 1e-3


@pytest.mark.slow
@pytest.mark.parametrize("spec,lo,hi", [("cauchy-log", -40, 40), ("quadratic:t=1", -3, 3), ("arctan", -10, 10)])
def test_uniqueness_probe(spec, lo, hi):
    from logpot import parse_field
    assert uniqueness_gap(parse_field(spec), lo, hi, 2048, seed=7) <= 1e-3


def test_result_round_trip(tmp_path, semicircle_result):
    path = tmp_path / "r.json"
    semicircle_result.save(path)
    back = EquilibriumResult.load(path)
    np.testing.assert_array_equal(back.measure.weights, semicircle_result.measure.weights)
    assert back.F == semicircle_result.F
    assert back.support == semicircle_result.support
    assert back.field().spec == semicircle_result.field_spec
    assert json.loads(path.read_text())["grid"]["n"] == 2048


def test_h_plus_is_squared_scaled_density(semicircle_result):
    np.testing.assert_allclose(semicircle_result.h_plus.values,
                               (np.pi * semicircle_result.measure.weights) ** 2)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0))
def test_quadratic_support_scales(t):
    # V = t x^2 has support [-1/sqrt t, 1/sqrt t]
    r = 1 / math.sqrt(t)
    L = 1.6 * r
    res = solve_equilibrium(field_catalog("quadratic", t=t), -L, L, 512)
    (a, b), = res.support
    h = res.grid.spacing
    assert abs(b - r) <= 3 * h and abs(a + r) <= 3 * h
