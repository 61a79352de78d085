"""
Приёмочные проверки: принцип максимума, энергия, оценки сглаживания, BV, u_t, свип по ε,
энтропийная сертификация, эталон Годунова и детерминизм CSV.
Запуск из корня проекта: python scripts/check_acceptance.py
Артефакты пишутся во временную папку, out/ не трогается. Полный прогон занимает несколько минут.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

# Добавить корень проекта в path
root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(root))

import storage
from entropy_residual import TestBump, weak_entropy_residual
from estimates import bv_space_report, bv_time_report
from grid_field import Domain1D, Grid, SpaceTimeField
from main import main as cli_main
from models import FLUXES, VISCOSITIES, make_flux, make_initial_data, make_viscosity
from mollify import mollify_data, mollify_flux, verify_mollifier_bounds
from reference_oracle import compose_riemann, godunov_reference, riemann_data
from viscous_solver import SolverConfig, energy_estimate_check, max_principle_check, solve

UNIT = Domain1D(0.0, 1.0)
SWEEP_FILES = ("sweep_report.csv", "convergence.csv", "bounds.csv", "entropy.csv", "slices.csv", "meta.csv")


def check_battery() -> None:
    # 1) Принцип максимума, энергия, BV по пространству и u_t: все модели каталога, ступенька
    data = make_initial_data("step", UNIT)
    grid = Grid(UNIT, 512)
    eps = 0.02
    u0eps = mollify_data(data, eps, grid)
    for flux_name in FLUXES:
        flux = make_flux(flux_name, data.interval)
        for visc_name in VISCOSITIES:
            visc = make_viscosity(visc_name)
            result = solve(mollify_flux(flux, eps), visc, u0eps, SolverConfig(epsilon=eps, n_cells=512, T=0.5))
            reports = [
                max_principle_check(result, data),
                energy_estimate_check(result, visc, u0eps),
                bv_space_report(result, data),
                bv_time_report(result, flux, visc, data),
            ]
            failed = [(r.name, r.lhs, r.rhs) for r in reports if not r.passed]
            assert not failed, f"{flux_name}/{visc_name}: {failed}"
            if visc_name == "constant":
                assert reports[-1].details["viscosity_term"] == 0.0
    print("OK: оценки выполнены для", len(FLUXES) * len(VISCOSITIES), "комбинаций моделей")


def check_mollifier() -> None:
    # 2) Оценки сглаживания для ступеньки и шапочки
    grid = Grid(UNIT, 2048)
    for name in ("step", "hat"):
        report = verify_mollifier_bounds(make_initial_data(name, UNIT), [0.05, 0.025, 0.0125], grid)
        assert report.passed, [(r.name, r.lhs, r.rhs) for r in report.reports]
        print(f"OK: оценки сглаживания для {name}, c(ε) =", report.c_constant)


def check_expansion_shock() -> None:
    # 3) Чувствительность проверки: стационарная ударная волна разрежения нарушает энтропийное неравенство
    grid = Grid(Domain1D(-2.0, 2.0), 400)
    times = np.linspace(0.0, 2.0, 201)
    values = np.tile(np.sign(grid.centers), (times.size, 1))
    stf = SpaceTimeField.from_array(grid, times, values)
    residual = weak_entropy_residual(stf, make_flux("burgers", (-1.0, 1.0)), 0.0, TestBump(0.0, 1.0, 1.0, 1.0))
    assert residual >= 0.1, residual
    print("OK: невязка для ударной волны разрежения =", residual)


def check_oracle() -> None:
    # 4) Эталон Годунова против точного решения задачи Римана при удвоении сетки
    data = make_initial_data("step", UNIT)
    flux = make_flux("burgers", data.interval)
    composite = compose_riemann(flux, *riemann_data(data))
    T = 0.5
    errors = []
    for n_cells in (100, 200, 400):
        grid = Grid(UNIT, n_cells)
        stf = godunov_reference(flux, data, n_cells, T, np.array([0.0, T]))
        exact = composite.space_time_field(grid, np.array([0.0, T])).final.values
        errors.append(grid.h * float(np.abs(stf.final.values - exact).sum()))
    rates = [np.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert min(rates) >= 0.5, (errors, rates)
    print("OK: эталон сходится к решению Римана, порядки =", [round(r, 3) for r in rates])


def check_sweep(tmp: Path) -> None:
    # 5) Свип по ε: код 0, сходимость по Коши и к эталону, энтропийная сертификация предела
    config = root / "configs" / "burgers_step.cfg"
    first, second = tmp / "sweep_a", tmp / "sweep_b"
    assert cli_main(["sweep", "--config", str(config), "--out", str(first)]) == 0
    rows = storage.read_rows(first / "convergence.csv", storage.CONVERGENCE_HEADER)
    cauchy = [float(r["cauchy_l1"]) for r in rows if r["cauchy_l1"]]
    oracle = [float(r["oracle_l1"]) for r in rows]
    eps = [float(r["eps"]) for r in rows]
    ratios = [b / a for a, b in zip(cauchy, cauchy[1:])]
    assert all(r <= 0.9 for r in ratios), ratios
    assert all(b < a for a, b in zip(oracle, oracle[1:])), oracle
    rate = float(np.polyfit(np.log(eps), np.log(oracle), 1)[0])
    assert 0.3 <= rate <= 1.1, rate
    print("OK: свип сходится, отношения Коши =", [round(r, 3) for r in ratios], "порядок =", round(rate, 3))

    # 6) Повторный свип даёт побайтно те же CSV
    assert cli_main(["sweep", "--config", str(config), "--out", str(second)]) == 0
    for name in SWEEP_FILES:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    print("OK: повторный свип побайтно совпадает")


def main() -> None:
    check_battery()
    check_mollifier()
    check_expansion_shock()
    check_oracle()
    with tempfile.TemporaryDirectory() as tmp:
        check_sweep(Path(tmp))
    print("Все приёмочные проверки пройдены.")


if __name__ == "__main__":
    main()
