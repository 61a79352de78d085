import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad

from bv_calculus import total_variation
from grid_field import Grid, norm_linf
from models import FluxModel, make_flux
from mollify import (
    MollifierBoundRow,
    MollifierKernel,
    MollifyError,
    _unit_mass,
    approximate_w11,
    mollify_data,
    mollify_flux,
    summarize_bounds,
    verify_mollifier_bounds,
    w11_error,
)
from viscous_solver import check_convex


@pytest.mark.parametrize("eps", [1.0, 0.1, 0.003])
def test_kernel_has_unit_mass_and_compact_support(eps):
    kernel = MollifierKernel(eps)
    assert kernel.mass() == pytest.approx(1.0, abs=1e-10)
    assert kernel.value(eps) == 0.0
    assert kernel.value(-1.01 * eps) == 0.0
    ys = np.linspace(-eps, eps, 11)
    np.testing.assert_allclose(kernel(ys), kernel(-ys))
    assert np.all(kernel(ys) >= 0.0)


def test_kernel_construction_is_warning_free():
    _unit_mass.cache_clear()
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        for eps in (1.0, 0.05, 0.003):
            assert MollifierKernel(eps).mass() == pytest.approx(1.0, abs=1e-10)


def test_kernel_rejects_non_positive_radius():
    with pytest.raises(MollifyError):
        MollifierKernel(0.0)


def test_mollified_step_keeps_sup_tv_and_mass(step_data):
    grid = Grid(step_data.domain, 128)
    smooth = mollify_data(step_data, 0.05, grid)
    assert norm_linf(smooth) <= 1.0 + 1e-12
    assert total_variation(smooth) <= 2.0 + 1e-10
    assert grid.h * smooth.values.sum() == pytest.approx(0.4, abs=1e-4)
    # носитель не дальше ε от [0.3, 0.7]
    outside = (grid.centers < 0.24) | (grid.centers > 0.76)
    assert np.all(smooth.values[outside] == 0.0)


def test_mollify_data_support_escape(step_data):
    grid = Grid(step_data.domain, 32)
    with pytest.raises(MollifyError, match="support escapes domain"):
        mollify_data(step_data, 0.3, grid)
    with pytest.raises(MollifyError):
        mollify_data(step_data, -0.1, grid)


def test_mollify_data_requires_hypothesis_e(tent_data):
    with pytest.raises(MollifyError):
        mollify_data(tent_data, 0.05, Grid(tent_data.domain, 32))


def test_bounds_for_step_with_stable_constant(step_data):
    grid = Grid(step_data.domain, 256)
    report = verify_mollifier_bounds(step_data, [0.1, 0.05], grid)
    assert [r.eps for r in report.rows] == [0.1, 0.05]
    assert all(r.sup_ratio <= 1.0 + 1e-8 for r in report.rows)
    assert all(r.tv_ratio <= 1.0 + 1e-8 for r in report.rows)
    assert report.c_constant > 0
    assert {r.name for r in report.reports} == {"mollifier_sup", "mollifier_tv", "mollifier_laplacian"}
    assert report.passed, [(r.name, r.lhs, r.rhs) for r in report.reports]


def test_bounds_for_hat_accept_shrinking_constant(hat_data):
    grid = Grid(hat_data.domain, 512)
    report = verify_mollifier_bounds(hat_data, [0.1, 0.05, 0.025], grid)
    c = [r.c_eps for r in report.rows]
    # у шапочки u₀″ конечная мера: c(ε) убывает примерно вдвое
    assert c[0] > c[1] > c[2] > 0
    by_name = {r.name: r for r in report.reports}
    assert by_name["mollifier_laplacian"].lhs < 1.0
    assert by_name["mollifier_laplacian"].details["c_constant"] == c[0]
    assert report.passed, [(r.name, r.lhs, r.rhs) for r in report.reports]


def test_summarize_flags_growing_constant():
    rows = [MollifierBoundRow(0.1, 1.0, 1.0, 0.1), MollifierBoundRow(0.05, 1.0, 1.0, 0.2)]
    report = summarize_bounds(rows, tol=1e-8, tol_uniform=0.1)
    by_name = {r.name: r for r in report.reports}
    assert by_name["mollifier_sup"].passed
    assert by_name["mollifier_laplacian"].lhs == pytest.approx(2.0)
    assert not by_name["mollifier_laplacian"].passed
    assert not report.passed
    with pytest.raises(MollifyError):
        summarize_bounds([])


def test_summarize_single_level_has_no_growth():
    report = summarize_bounds([MollifierBoundRow(0.1, 0.9, 0.8, 0.3)])
    assert report.passed
    assert report.c_constant == 0.3


def test_w11_approximation_vanishes_near_boundary(tent_data):
    grid = Grid(tent_data.domain, 128)
    approx = approximate_w11(tent_data, 0.05, grid)
    assert norm_linf(approx) <= 1.0 - 0.05 + 1e-12
    assert norm_linf(approx) <= tent_data.A_bound
    assert approx.values[0] == 0.0 and approx.values[-1] == 0.0


def test_w11_error_decreases_with_eps(tent_data):
    grid = Grid(tent_data.domain, 128)
    errors = [w11_error(approximate_w11(tent_data, eps, grid), tent_data) for eps in (0.1, 0.05, 0.025)]
    assert errors[0] > errors[1] > errors[2] > 0


def test_w11_approximation_requires_hypothesis_f(step_data):
    with pytest.raises(MollifyError):
        approximate_w11(step_data, 0.05, Grid(step_data.domain, 32))


def test_mollified_burgers_flux():
    flux = make_flux("burgers", (-1.0, 1.0))
    eps = 0.05
    smooth = mollify_flux(flux, eps)
    u = np.linspace(-0.9, 0.9, 37)
    # f_ε − f = (ε²/2)·∫s²ρ(s)ds ∈ (0, ε²/2)
    shift = smooth.f(u) - flux.f(u)
    assert np.all(shift > 0) and np.all(shift < eps * eps / 2)
    np.testing.assert_allclose(shift, shift[0], atol=1e-7)
    far = np.array([-3.0, 4.0])
    np.testing.assert_allclose(smooth.f(far), flux.f(far))
    assert smooth.lipschitz_bound == flux.lipschitz_bound
    assert check_convex(smooth, (-1.5, 1.5))


def test_mollified_flux_matches_direct_quadrature():
    flux = make_flux("burgers", (-1.0, 1.0))
    eps = 0.1
    smooth = mollify_flux(flux, eps)
    kernel = MollifierKernel(eps)
    for u in (-1.05, 0.0, 0.97):
        direct, _ = quad(
            lambda z: float(flux.f(u - z)) * kernel.value(z), -eps, eps,
            points=(0.0,), epsabs=1e-13, epsrel=1e-12, limit=200,
        )
        assert float(smooth.f(u)) == pytest.approx(direct, abs=1e-7)


def test_mollify_flux_requires_clamped_flux():
    raw = FluxModel("raw", lambda u: np.asarray(u), lambda u: np.ones_like(np.asarray(u)), 1.0)
    with pytest.raises(MollifyError):
        mollify_flux(raw, 0.1)
