import numpy as np
import pytest

from grid_field import Domain1D, Grid, GridError, l1_distance
from models import FluxModel, InitialData, make_flux
from reference_oracle import (
    OracleError,
    compose_riemann,
    godunov_reference,
    godunov_run,
    reference_on_grid,
    restrict,
    riemann_data,
    solve_riemann,
)

BURGERS = make_flux("burgers", (-1.0, 1.0))
UNIT = Domain1D(0.0, 1.0)


def _indicator(left, right):
    return InitialData(
        "box", UNIT, lambda x: ((x >= left) & (x <= right)).astype(np.float64), "E",
        linf_bound=1.0, tv_bound=2.0, support_margin=min(left, 1.0 - right), breakpoints=(left, right),
    )


def test_riemann_shock_moves_with_rankine_hugoniot_speed():
    wave = solve_riemann(BURGERS, 1.0, 0.0, x0=0.5)
    assert wave.wave == "shock"
    assert wave.speed == pytest.approx(0.5)
    np.testing.assert_array_equal(wave(np.array([0.65, 0.8]), 0.4), [1.0, 0.0])


def test_riemann_rarefaction_fan():
    wave = solve_riemann(BURGERS, -0.5, 1.0)
    assert wave.wave == "rarefaction"
    assert wave.fan == pytest.approx((-0.5, 1.0))
    values = wave(np.array([-1.0, 0.3, 2.0]), 1.0)
    np.testing.assert_allclose(values, [-0.5, 0.3, 1.0], atol=1e-12)
    assert wave(np.array([[0.1, 0.2]]), 1.0).shape == (1, 2)


def test_riemann_constant_and_initial_time():
    assert solve_riemann(BURGERS, 0.3, 0.3).wave == "constant"
    wave = solve_riemann(BURGERS, 0.0, 1.0, x0=0.2)
    np.testing.assert_array_equal(wave(np.array([0.1, 0.3]), 0.0), [0.0, 1.0])


def test_riemann_requires_convex_flux():
    concave = FluxModel("concave", lambda u: -0.5 * np.asarray(u) ** 2, lambda u: -np.asarray(u, dtype=float), 1.0)
    with pytest.raises(OracleError):
        solve_riemann(concave, 1.0, 0.0)


def test_riemann_data_from_breakpoints(step_data, hat_data):
    jumps, states = riemann_data(step_data)
    np.testing.assert_allclose(jumps, [0.3, 0.7])
    np.testing.assert_array_equal(states, [0.0, 1.0, 0.0])
    with pytest.raises(OracleError):
        riemann_data(hat_data)


def test_composite_detects_interaction():
    composite = compose_riemann(BURGERS, np.array([0.3, 0.7]), np.array([0.0, 1.0, 0.0]))
    composite(np.array([0.5]), 0.5)
    # голова разрежения догоняет ударную волну при t = 0.8
    with pytest.raises(OracleError):
        composite(np.array([0.5]), 0.9)
    with pytest.raises(OracleError):
        compose_riemann(BURGERS, np.array([0.3, 0.7]), np.array([0.0, 1.0]))


def test_godunov_agrees_with_composite_riemann_solution():
    data = _indicator(0.2, 0.5)
    T = 0.5
    jumps, states = riemann_data(data)
    composite = compose_riemann(BURGERS, jumps, states)
    grid = Grid(UNIT, 200)
    times = np.linspace(0.0, T, 11)
    exact = composite.space_time_field(grid, times)
    reference = reference_on_grid(BURGERS, data, grid, T, fine_factor=4, times=times)
    assert l1_distance(reference, exact) / T < 0.01
    final_error = grid.h * np.abs(reference.final.values - exact.final.values).sum()
    assert final_error < 0.02


def test_godunov_mass_ledger_with_outflow(step_data):
    run = godunov_run(BURGERS, step_data, 400, 1.0)
    masses = run.masses
    assert masses[0] == pytest.approx(0.4, abs=1e-10)
    np.testing.assert_allclose(masses + run.boundary_outflow, masses[0], atol=1e-11)
    # ударная волна выходит через x = 1 около t = 0.6
    assert run.boundary_outflow[-1] > 0.0
    assert np.all(np.diff(run.boundary_outflow) >= -1e-15)
    values = run.solution.as_array()
    assert values.min() >= -1e-12 and values.max() <= 1.0 + 1e-12


def test_godunov_output_times_are_exact(step_data):
    times = np.array([0.0, 0.013, 0.1, 0.25])
    stf = godunov_reference(BURGERS, step_data, 64, 0.25, times)
    np.testing.assert_array_equal(stf.times, times)
    default = godunov_reference(BURGERS, step_data, 64, 0.25)
    assert len(default.times) == 201


def test_godunov_input_validation(step_data):
    with pytest.raises(OracleError):
        godunov_run(BURGERS, step_data, 64, 0.25, cfl=1.5)
    with pytest.raises(OracleError):
        godunov_run(BURGERS, step_data, 64, 0.25, times=np.array([0.0, 0.2]))
    with pytest.raises(OracleError):
        reference_on_grid(BURGERS, step_data, Grid(Domain1D(0.0, 2.0), 16), 0.25)


def test_restrict_averages_blocks(step_data):
    stf = godunov_reference(BURGERS, step_data, 64, 0.1, np.array([0.0, 0.1]))
    coarse = restrict(stf, 8)
    assert coarse.grid.n_cells == 8
    assert coarse.grid.h * coarse.initial.values.sum() == pytest.approx(stf.grid.h * stf.initial.values.sum())
    with pytest.raises(GridError):
        restrict(stf, 7)


def test_zero_flux_reference_is_stationary(step_data):
    flux = make_flux("zero", step_data.interval)
    stf = godunov_reference(flux, step_data, 32, 1.0, np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(stf.final.values, stf.initial.values)
