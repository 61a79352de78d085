import math

import numpy as np
import pytest

from entropy_residual import (
    EntropyError,
    TestBump,
    boundary_residual,
    boundary_violations,
    bump_battery,
    certify_field,
    certify_limit,
    conservation_residual,
    entropy_tolerance,
    interior_residual,
    kruzhkov_levels,
    weak_entropy_residual,
)
from estimates import SweepResult
from grid_field import Domain1D, Grid, SpaceTimeField
from models import make_flux
from reference_oracle import godunov_reference

BURGERS = make_flux("burgers", (-1.0, 1.0))
CENTERED = Grid(Domain1D(-2.0, 2.0), 400)
TIMES = np.linspace(0.0, 2.0, 201)


def _stationary(profile):
    values = np.tile(profile(CENTERED.centers), (TIMES.size, 1))
    return SpaceTimeField.from_array(CENTERED, TIMES, values)


def test_bump_support_must_stay_inside():
    stf = _stationary(np.sign)
    TestBump(0.0, 1.0, 1.0, 1.0).check_support(stf)
    with pytest.raises(EntropyError):
        TestBump(1.5, 1.0, 1.0, 1.0).check_support(stf)
    with pytest.raises(EntropyError):
        TestBump(0.0, 0.5, 1.0, 1.0).check_support(stf)


def test_bump_battery_and_levels():
    stf = _stationary(np.sign)
    bumps = bump_battery(stf)
    assert len(bumps) == 12
    assert len({b.ident for b in bumps}) == 12
    for bump in bumps:
        bump.check_support(stf)
    levels = kruzhkov_levels((-1.0, 1.0), 0.75)
    assert len(levels) == 11
    assert levels[0] == -1.5 and levels[-1] == 1.5
    assert levels[1] == -1.0 and levels[5] == 0.0 and levels[9] == 1.0


def test_expansion_shock_is_rejected():
    expansion = _stationary(np.sign)
    bump = TestBump(0.0, 1.0, 1.0, 1.0)
    residual = weak_entropy_residual(expansion, BURGERS, 0.0, bump)
    # exp(−1)·∫ψ(t)dt ≈ 0.163
    assert residual == pytest.approx(0.163, abs=0.005)
    assert residual >= 0.1
    assert interior_residual(expansion, BURGERS, 0.0, bump_battery(expansion)) > 0.02


def test_entropy_shock_has_non_positive_residual():
    shock = _stationary(lambda x: -np.sign(x))
    bump = TestBump(0.0, 1.0, 1.0, 1.0)
    assert weak_entropy_residual(shock, BURGERS, 0.0, bump) == pytest.approx(-0.163, abs=0.005)
    assert interior_residual(shock, BURGERS, 0.0, [bump]) < 0
    with pytest.raises(EntropyError):
        interior_residual(shock, BURGERS, 0.0, [])


def test_stationary_weak_solution_conserves():
    expansion = _stationary(np.sign)
    bump = TestBump(0.0, 1.0, 1.0, 1.0)
    assert conservation_residual(expansion, BURGERS, bump) == pytest.approx(0.0, abs=1e-10)


def test_out_of_range_levels_reduce_to_conservation(step_data):
    stf = godunov_reference(BURGERS, step_data, 128, 0.5)
    # центр симметричен относительно узлов по x и моментов по t
    bump = TestBump(0.5, 0.25, 0.15, 0.1)
    cons = conservation_residual(stf, BURGERS, bump)
    assert weak_entropy_residual(stf, BURGERS, 2.0, bump) == pytest.approx(cons, abs=1e-12)
    assert weak_entropy_residual(stf, BURGERS, -2.0, bump) == pytest.approx(-cons, abs=1e-12)


def test_boundary_condition_uses_outward_normal():
    ones = _stationary(np.ones_like)
    violations = boundary_violations(ones, BURGERS)
    # вток через левую границу при нулевых данных недопустим
    assert np.max(violations["left"]) == pytest.approx(0.5)
    assert np.max(violations["right"]) <= 0.0
    assert boundary_residual(ones, BURGERS) == pytest.approx(0.5)
    # уровень k = 0.5: f(1) − f(0.5) = 0.375
    assert np.max(boundary_violations(ones, BURGERS, [0.5])["left"]) == pytest.approx(0.375)

    minus = _stationary(lambda x: -np.ones_like(x))
    assert np.max(boundary_violations(minus, BURGERS, [-0.5])["right"]) == pytest.approx(0.375)
    assert np.max(boundary_violations(minus, BURGERS)["left"]) <= 0.0
    # γu = −1 слева вытекает: при k = −0.5 невязка отрицательна
    assert np.max(boundary_violations(minus, BURGERS, [-0.5])["left"]) == pytest.approx(-0.375)


def test_zero_trace_gives_zero_boundary_residual():
    zero = _stationary(np.zeros_like)
    assert boundary_residual(zero, BURGERS) == 0.0


def test_godunov_reference_is_certified(step_data):
    stf = godunov_reference(BURGERS, step_data, 200, 0.5)
    report = certify_field(stf, BURGERS)
    assert report.test_function_count == 12
    assert len(report.kruzhkov_levels) == 11
    assert report.tolerance == pytest.approx(entropy_tolerance(stf))
    assert report.worst_interior_residual <= report.tolerance
    assert report.worst_boundary_residual <= report.tolerance
    assert report.passed
    kinds = {r.kind for r in report.rows}
    assert kinds == {"interior", "boundary"}
    assert any(math.isnan(r.k) for r in report.rows)


def test_entropy_tolerance_scales_with_mesh():
    stf = _stationary(np.sign)
    assert entropy_tolerance(stf, 5.0) == pytest.approx(5.0 * (0.01 + 0.01))


def _sweep(stf, cauchy, eps=(0.1, 0.05, 0.025)):
    return SweepResult(
        eps_list=eps, summaries=(), solutions=(stf,) * len(eps),
        cauchy_l1=cauchy, oracle_l1=(), reports=(),
    )


def test_certify_limit_requires_convergent_sequence(step_data):
    stf = godunov_reference(BURGERS, step_data, 100, 0.5)
    with pytest.raises(EntropyError, match="no convergent limit to certify"):
        certify_limit(_sweep(stf, (0.1, 0.2)), BURGERS)
    with pytest.raises(EntropyError):
        certify_limit(_sweep(stf, (0.1,), eps=(0.1, 0.05)), BURGERS)
    assert certify_limit(_sweep(stf, (0.2, 0.1)), BURGERS).passed
