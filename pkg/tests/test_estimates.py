import dataclasses
import math

import numpy as np
import pytest

from config import RunConfig
from estimates import (
    SweepError,
    SweepResult,
    Tolerances,
    bv_space_report,
    bv_time_report,
    regularize_data,
    run_reports,
    run_sweep,
    sign_identity,
    solver_config,
)
from grid_field import Domain1D, Grid, ScalarField, SpaceTimeField
from models import make_flux, make_initial_data, make_viscosity
from mollify import mollify_flux
from reports import EstimateReport, all_passed
from viscous_solver import solve

UNIT = Domain1D(0.0, 1.0)
E_NAMES = ["max_principle", "energy", "bv_space", "bv_time"]


def test_estimate_report_pass_rule():
    assert EstimateReport("x", 1.04, 1.0, 0.05, "p").passed
    assert not EstimateReport("x", 1.06, 1.0, 0.05, "p").passed
    assert not EstimateReport("x", math.nan, 1.0, 0.05, "p").passed
    assert not EstimateReport("x", 0.5, math.inf, 0.05, "p").passed
    # details на флаг не влияют
    assert EstimateReport("x", 0.5, 1.0, 0.0, "p", details={"anything": 1e9}).passed
    assert EstimateReport("x", 0.0, 0.0, 0.0, "p").ratio == 0.0
    assert all_passed([]) is True


def test_tolerances_follow_run_config():
    tol = Tolerances.from_config(RunConfig(tol_bv=0.2, tol_uniform=0.3))
    assert tol.bv == 0.2 and tol.uniform == 0.3 and tol.maxp == 1e-10


def test_solver_config_from_run_config():
    cfg = RunConfig(n_cells=64, T=0.3, cfl_safety=0.5, scheme="godunov_flux", store_every=5)
    sc = solver_config(cfg, 0.04)
    assert (sc.epsilon, sc.n_cells, sc.T, sc.cfl_safety, sc.scheme, sc.store_every) == (
        0.04, 64, 0.3, 0.5, "godunov_flux", 5
    )


def test_regularize_data_dispatches_on_hypothesis():
    grid = Grid(UNIT, 32)
    step = make_initial_data("step", UNIT)
    tent = make_initial_data("tent", UNIT)
    assert regularize_data(step, 0.05, grid).values.max() <= 1.0 + 1e-12
    assert regularize_data(tent, 0.05, grid).values.max() <= 0.95 + 1e-12


def test_sign_identity_matches_monotone_growth():
    grid = Grid(UNIT, 8)
    times = np.linspace(0.0, 0.5, 6)
    stf = SpaceTimeField.from_array(grid, times, np.outer(times, np.ones(8)))
    assert sign_identity(stf, ScalarField.zeros(grid)) == pytest.approx(0.5)


def _single_run(data_name, visc_name, eps=0.05, n_cells=128, T=0.1):
    data = make_initial_data(data_name, UNIT)
    flux = make_flux("burgers", data.interval)
    visc = make_viscosity(visc_name)
    grid = Grid(UNIT, n_cells)
    u0eps = regularize_data(data, eps, grid)
    cfg = RunConfig(n_cells=n_cells, T=T, eps=eps)
    result = solve(mollify_flux(flux, eps), visc, u0eps, solver_config(cfg, eps))
    return data, flux, visc, u0eps, result


def test_hypothesis_e_reports_pass():
    data, flux, visc, u0eps, result = _single_run("step", "rational")
    reports = run_reports(result, flux, visc, data, u0eps)
    assert [r.name for r in reports] == E_NAMES
    assert all_passed(reports), [(r.name, r.lhs, r.rhs) for r in reports]
    bv_time = reports[-1]
    for key in ("viscous_laplacian", "viscous_laplacian_bound", "tv_space_time", "sign_identity"):
        assert key in bv_time.details
    assert bv_time.details["viscous_laplacian"] <= bv_time.details["viscous_laplacian_bound"]
    assert bv_time.details["tv_space_time"] >= bv_time.lhs


def test_bv_reports_use_data_constants():
    data, flux, visc, u0eps, result = _single_run("step", "constant")
    space = bv_space_report(result, data)
    assert space.rhs == data.tv_bound
    assert space.details["space_bv_l1"] <= result.solution.T * data.tv_bound * 1.05
    time = bv_time_report(result, flux, visc, data)
    # B′ ≡ 0: правая часть 2·1·TV + 2·M·Vol
    assert time.rhs == pytest.approx(2.0 * 2.0 + 2.0 * 1.0)
    assert "sign_identity" not in time.details


def test_tightened_tolerance_fails_report():
    data, flux, visc, u0eps, result = _single_run("step", "constant")
    report = bv_space_report(result, data, tol=-0.9)
    assert not report.passed


def test_hypothesis_f_reports_use_a_and_c():
    data, flux, visc, u0eps, result = _single_run("tent", "rational")
    reports = run_reports(result, flux, visc, data, u0eps, C=3.0)
    assert [r.name for r in reports] == E_NAMES + ["w11_sup"]
    by_name = {r.name: r for r in reports}
    assert by_name["bv_space"].rhs == data.w11_seminorm
    assert by_name["bv_space"].lhs < by_name["bv_space"].rhs
    assert by_name["w11_sup"].rhs == data.A_bound
    assert by_name["energy"].rhs == pytest.approx(1.0 * 2.0**2 / 2.0)
    assert all_passed(reports), [(r.name, r.lhs, r.rhs) for r in reports]


def test_hypothesis_f_bv_space_compares_against_data():
    data, flux, visc, u0eps, result = _single_run("tent", "rational")
    # правая часть не зависит от самого решения: заниженная полунорма даёт провал
    report = bv_space_report(result, dataclasses.replace(data, w11_seminorm=0.5))
    assert report.rhs == 0.5
    assert report.lhs > 1.0
    assert not report.passed


@pytest.fixture(scope="module")
def e_sweep():
    data = make_initial_data("step", UNIT)
    flux = make_flux("burgers", data.interval)
    cfg = RunConfig(n_cells=128, T=0.1, eps_list=(0.1, 0.05, 0.025), workers=2)
    return run_sweep(flux, make_viscosity("constant"), data, cfg.eps_list, cfg)


def test_sweep_orders_levels_and_reports(e_sweep):
    assert e_sweep.eps_list == (0.1, 0.05, 0.025)
    assert [s.eps for s in e_sweep.summaries] == [0.1, 0.05, 0.025]
    assert len(e_sweep.cauchy_l1) == 2 and len(e_sweep.oracle_l1) == 3
    names = {r.name for r in e_sweep.reports}
    assert {"mollifier_sup", "mollifier_tv", "mollifier_laplacian", "tv_space_time"} <= names
    rows = e_sweep.report_rows()
    assert rows[0][0] == 0.1 and rows[-1][0] is None
    assert all(s.mollifier_row is not None for s in e_sweep.summaries)
    assert e_sweep.passed, [(eps, r.name, r.lhs, r.rhs) for eps, r in rows if not r.passed]


def test_sweep_converges_towards_reference(e_sweep):
    assert all(ratio < 1.0 for ratio in e_sweep.cauchy_ratios)
    assert e_sweep.oracle_l1[0] > e_sweep.oracle_l1[-1]
    assert e_sweep.oracle_rate() > 0


def test_sweep_needs_three_decreasing_levels():
    data = make_initial_data("step", UNIT)
    flux = make_flux("burgers", data.interval)
    cfg = RunConfig(n_cells=32, T=0.05)
    with pytest.raises(SweepError):
        run_sweep(flux, make_viscosity("constant"), data, (0.1, 0.05), cfg)
    with pytest.raises(SweepError):
        run_sweep(flux, make_viscosity("constant"), data, (0.05, 0.1, 0.2), cfg)


def test_failed_solves_abort_with_partial_result():
    data = make_initial_data("step", UNIT)
    flux = make_flux("burgers", data.interval)
    cfg = RunConfig(n_cells=128, T=0.1, anti_diffusion=0.15, workers=1)
    with pytest.raises(SweepError) as info:
        run_sweep(flux, make_viscosity("constant"), data, (0.1, 0.05, 0.025), cfg, with_oracle=False)
    partial = info.value.partial
    assert isinstance(partial, SweepResult)
    assert partial.partial and not partial.passed


def test_hypothesis_f_sweep_reports_uniform_constant():
    data = make_initial_data("tent", UNIT)
    flux = make_flux("burgers", data.interval)
    cfg = RunConfig(data="tent", n_cells=256, T=0.05, eps_list=(0.04, 0.02, 0.01))
    sweep = run_sweep(flux, make_viscosity("rational"), data, cfg.eps_list, cfg, with_oracle=False)
    by_name = {r.name: r for r in sweep.reports}
    assert {"bv_space_uniform", "w11_convergence", "tv_space_time"} <= set(by_name)
    assert by_name["bv_space_uniform"].passed
    assert by_name["w11_convergence"].passed
    errors = [s.w11_error for s in sweep.summaries]
    assert errors[0] > errors[1] > errors[2]
    assert sweep.oracle_l1 == ()
