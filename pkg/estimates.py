"""
Отчёты об оценках для одного решения и свип по ε: BV в пространстве, L¹ производной по времени,
сходимость по Коши и расстояние до эталона Годунова.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from bv_calculus import space_bv_l1, sup_slice_tv, time_deriv_l1, total_variation, tv_space_time
from config import RunConfig
from grid_field import Grid, ScalarField, SpaceTimeField, l1_distance, norm_linf, resample_times
from models import FluxModel, InitialData, ViscosityModel, b_prime_sup, f_prime_sup
from mollify import (
    MollifierBoundRow,
    approximate_w11,
    mollifier_bound_row,
    mollify_data,
    mollify_flux,
    summarize_bounds,
    w11_error,
)
from reference_oracle import reference_on_grid
from reports import EstimateReport
from utils.logging_setup import context_str
from viscous_solver import SolveResult, SolverConfig, energy_estimate_check, max_principle_check, solve

logger = logging.getLogger(__name__)

# Общие моменты времени для разностей Коши и сравнения с эталоном
COMMON_SLICES = 201
MIN_SWEEP_LEVELS = 3


class SweepError(RuntimeError):
    """Свип прерван; partial содержит уже посчитанные уровни ε."""

    def __init__(self, message: str, partial: "SweepResult | None" = None) -> None:
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Tolerances:
    maxp: float = 1e-10
    energy: float = 0.05
    bv: float = 0.05
    time: float = 0.05
    mollifier: float = 1e-8
    uniform: float = 0.10

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "Tolerances":
        return cls(cfg.tol_maxp, cfg.tol_energy, cfg.tol_bv, cfg.tol_time, cfg.tol_mollifier, cfg.tol_uniform)


def _data_constants(u0: InitialData, C: float | None) -> tuple[float, float]:
    """(M, TV): ‖u₀‖∞ и TV(u₀) для гипотезы E; A и измеренная C для гипотезы F."""
    if u0.hypothesis == "F":
        A = u0.A_bound if u0.A_bound is not None else u0.linf_bound + 1.0
        return A, (C if C is not None else u0.tv_bound)
    return u0.linf_bound, u0.tv_bound


def bv_space_report(result: SolveResult, u0: InitialData, tol: float = 0.05) -> EstimateReport:
    """
    sup_t TV(u^ε(·,t)) ≤ TV(u₀); для гипотезы F справа ‖u₀′‖_{L¹} (монотонная схема не растит TV).
    Равномерность по ε проверяет bv_space_uniform свипа. Интеграл по Ω_T и T·TV(u₀) пишутся в details.
    """
    stf = result.solution
    lhs = sup_slice_tv(stf)
    if u0.hypothesis == "F":
        rhs = u0.w11_seminorm if u0.w11_seminorm is not None else u0.tv_bound
        provenance = "per-slice TV of viscous solution bounded by W11 seminorm of data"
    else:
        rhs = u0.tv_bound
        provenance = "per-slice TV of viscous solution bounded by TV of data"
    details = {
        "space_bv_l1": space_bv_l1(stf),
        "T_times_tv_data": stf.T * u0.tv_bound,
        "final_tv": total_variation(stf.final),
    }
    return EstimateReport("bv_space", lhs, rhs, tol, provenance, details=details)


def viscous_laplacian_l1(result: SolveResult, visc: ViscosityModel) -> float:
    """ε·∫∫ B(u)|u_xx| dx dt по вторым разностям с нулевыми фиктивными ячейками."""
    stf = result.solution
    samples = []
    for s in stf.slices:
        padded = np.concatenate(([0.0], s.values, [0.0]))
        uxx = np.abs(np.diff(padded, n=2)) / (s.grid.h * s.grid.h)
        samples.append(float(s.grid.h * np.sum(visc.B(s.values) * uxx)))
    return result.config.epsilon * float(trapezoid(samples, stf.times))


def sign_identity(stf: SpaceTimeField, u0eps: ScalarField) -> float:
    """∫_Ω (sg(u_t(·,T))·u(·,T) − sg(u_t(·,0))·u_{0ε}) dx по крайним парам срезов."""
    data = stf.as_array()
    if data.shape[0] < 2:
        return 0.0
    end = np.sign(data[-1] - data[-2]) * data[-1]
    start = np.sign(data[1] - data[0]) * u0eps.values
    return float(stf.grid.h * np.sum(end - start))


def bv_time_report(
    result: SolveResult,
    flux: FluxModel,
    visc: ViscosityModel,
    u0: InitialData,
    tol: float = 0.05,
    C: float | None = None,
    u0eps: ScalarField | None = None,
) -> EstimateReport:
    """
    ‖u_t‖_{L¹(Ω_T)} ≤ 2‖B′‖_{L∞(I)}·Vol(Ω)/(2r)·M² + 2·sup_I|f′|·TV + 2M·Vol(Ω),
    M = ‖u₀‖∞ и TV = TV(u₀) для гипотезы E; M = A и TV = C для гипотезы F.
    """
    stf = result.solution
    interval = u0.interval
    if u0.hypothesis == "F" and C is None:
        C = sup_slice_tv(stf)
    M, tv = _data_constants(u0, C)
    vol = stf.grid.domain.volume
    viscosity_term = 2.0 * b_prime_sup(visc, interval) * vol / (2.0 * visc.r_lower) * M * M
    advection_term = 2.0 * f_prime_sup(flux, interval) * tv
    data_term = 2.0 * M * vol
    rhs = viscosity_term + advection_term + data_term
    lhs = time_deriv_l1(stf)

    details = {
        "viscosity_term": viscosity_term,
        "advection_term": advection_term,
        "data_term": data_term,
        "viscous_laplacian": viscous_laplacian_l1(result, visc),
        "viscous_laplacian_bound": viscosity_term / 2.0 + advection_term / 2.0 + data_term,
        "tv_space_time": tv_space_time(stf),
    }
    if u0eps is not None:
        details["sign_identity"] = sign_identity(stf, u0eps)
    provenance = (
        "L1 time derivative bounded by viscosity, flux and data terms with A and C"
        if u0.hypothesis == "F"
        else "L1 time derivative bounded by viscosity, flux and data terms"
    )
    return EstimateReport("bv_time", lhs, rhs, tol, provenance, details=details)


def w11_sup_report(u0eps: ScalarField, u0: InitialData, tol: float = 1e-10) -> EstimateReport:
    """‖u_{0ε}‖∞ ≤ A для приближения гипотезы F."""
    A = u0.A_bound if u0.A_bound is not None else u0.linf_bound + 1.0
    return EstimateReport(
        "w11_sup", norm_linf(u0eps), A, tol,
        "sup of W11 approximation bounded by A",
    )


def run_reports(
    result: SolveResult,
    flux: FluxModel,
    visc: ViscosityModel,
    u0: InitialData,
    u0eps: ScalarField,
    tol: Tolerances = Tolerances(),
    C: float | None = None,
) -> list[EstimateReport]:
    """Набор отчётов одного решения: гипотеза E: принцип максимума, энергия, BV и u_t; F: то же с A, C и w11_sup."""
    if u0.hypothesis == "F":
        A, _ = _data_constants(u0, C)
        reports = [
            max_principle_check(result, u0, tol.maxp, bound=norm_linf(u0eps)),
            energy_estimate_check(result, visc, u0eps, tol.energy, A=A),
            bv_space_report(result, u0, tol.bv),
            bv_time_report(result, flux, visc, u0, tol.time, C=C, u0eps=u0eps),
            w11_sup_report(u0eps, u0, tol.maxp),
        ]
    else:
        reports = [
            max_principle_check(result, u0, tol.maxp),
            energy_estimate_check(result, visc, u0eps, tol.energy),
            bv_space_report(result, u0, tol.bv),
            bv_time_report(result, flux, visc, u0, tol.time, u0eps=u0eps),
        ]
    for r in reports:
        if not r.passed:
            logger.warning("Оценка не выполнена: %s", context_str(name=r.name, lhs=r.lhs, rhs=r.rhs, tol=r.tolerance))
    return reports


# {{{ свип по ε


def regularize_data(u0: InitialData, eps: float, grid: Grid) -> ScalarField:
    """u_{0ε}: свёртка для гипотезы E, усечение и свёртка для гипотезы F."""
    if u0.hypothesis == "E":
        return mollify_data(u0, eps, grid)
    return approximate_w11(u0, eps, grid)


def solver_config(cfg: RunConfig, eps: float) -> SolverConfig:
    return SolverConfig(
        epsilon=eps,
        n_cells=cfg.n_cells,
        T=cfg.T,
        cfl_safety=cfg.cfl_safety,
        store_every=cfg.store_every,
        scheme=cfg.scheme,
        anti_diffusion=cfg.anti_diffusion,
    )


@dataclass(frozen=True, eq=False)
class EpsRun:
    eps: float
    u0eps: ScalarField
    result: SolveResult


@dataclass(frozen=True, eq=False)
class EpsSummary:
    """Итог одного уровня ε: параметры шага, отчёты и измерения сглаживания."""

    eps: float
    steps: int
    dt_used: float
    max_abs: float
    slices: int
    reports: tuple[EstimateReport, ...]
    mollifier_row: MollifierBoundRow | None = None
    w11_error: float | None = None
    tv_space_time: float = 0.0


@dataclass(frozen=True, eq=False)
class SweepResult:
    eps_list: tuple[float, ...]
    summaries: tuple[EpsSummary, ...]
    solutions: tuple[SpaceTimeField, ...]
    cauchy_l1: tuple[float, ...]
    oracle_l1: tuple[float, ...]
    reports: tuple[EstimateReport, ...]
    hypothesis: str = "E"
    partial: bool = False
    runs: tuple[EpsRun, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        eps = self.eps_list
        if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise SweepError("eps_list должен строго убывать и быть положительным")

    def report_rows(self) -> list[tuple[float | None, EstimateReport]]:
        """Пары (ε, отчёт); для сводных отчётов свипа ε = None."""
        rows: list[tuple[float | None, EstimateReport]] = []
        for summary in self.summaries:
            rows.extend((summary.eps, r) for r in summary.reports)
        rows.extend((None, r) for r in self.reports)
        return rows

    @property
    def passed(self) -> bool:
        return not self.partial and all(r.passed for _, r in self.report_rows())

    @property
    def cauchy_ratios(self) -> tuple[float, ...]:
        d = self.cauchy_l1
        return tuple(b / a if a > 0 else 0.0 for a, b in zip(d, d[1:]))

    def oracle_rate(self) -> float:
        """Показатель p в ‖u^ε − u‖ ≈ K·ε^p (МНК в логарифмах); nan, если есть нулевые расстояния."""
        d = np.asarray(self.oracle_l1, dtype=np.float64)
        if d.size < 2 or np.any(d <= 0):
            return math.nan
        slope, _ = np.polyfit(np.log(np.asarray(self.eps_list[: d.size])), np.log(d), 1)
        return float(slope)


def _uniformity_report(name: str, values: list[float], tol: float, provenance: str) -> EstimateReport:
    return EstimateReport(name, max(values), min(values), tol, provenance, details={"sup_over_sweep": max(values)})


def run_sweep(
    flux: FluxModel,
    visc: ViscosityModel,
    u0: InitialData,
    eps_list: list[float] | tuple[float, ...],
    cfg: RunConfig,
    with_oracle: bool = True,
) -> SweepResult:
    """
    Решения для всех ε на общей сетке (параллельно по потокам), отчёты по каждому ε в порядке убывания ε,
    разности Коши и расстояния до эталона на общих моментах времени.
    """
    eps_list = tuple(float(e) for e in eps_list)
    if len(eps_list) < MIN_SWEEP_LEVELS:
        raise SweepError(f"Нужно не меньше {MIN_SWEEP_LEVELS} уровней ε, получено {len(eps_list)}")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or any(e <= 0 for e in eps_list):
        raise SweepError("eps_list должен строго убывать и быть положительным")
    grid = Grid(u0.domain, cfg.n_cells)
    if grid.h > eps_list[-1] / 4:
        logger.warning(
            "Сетка грубая для наименьшего ε: %s", context_str(h=grid.h, eps_min=eps_list[-1])
        )
    tol = Tolerances.from_config(cfg)

    def job(eps: float) -> EpsRun:
        u0eps = regularize_data(u0, eps, grid)
        result = solve(mollify_flux(flux, eps), visc, u0eps, solver_config(cfg, eps))
        logger.info("Уровень свипа готов: %s", context_str(eps=eps, steps=result.steps, max_abs=result.max_abs))
        return EpsRun(eps, u0eps, result)

    runs: dict[float, EpsRun] = {}
    failures: dict[float, str] = {}
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        futures = {eps: pool.submit(job, eps) for eps in eps_list}
        for eps in eps_list:
            try:
                runs[eps] = futures[eps].result()
            except Exception as e:
                logger.error("Решение для eps=%s прервано: %s", eps, e)
                failures[eps] = str(e)

    ordered = tuple(runs[eps] for eps in eps_list if eps in runs)
    if failures:
        partial = _assemble(ordered, flux, visc, u0, cfg, tol, with_oracle=False, partial=True)
        raise SweepError(
            "Свип прерван: " + "; ".join(f"eps={e}: {msg}" for e, msg in failures.items()), partial
        )
    return _assemble(ordered, flux, visc, u0, cfg, tol, with_oracle=with_oracle, partial=False)


def _assemble(
    runs: tuple[EpsRun, ...],
    flux: FluxModel,
    visc: ViscosityModel,
    u0: InitialData,
    cfg: RunConfig,
    tol: Tolerances,
    with_oracle: bool,
    partial: bool,
) -> SweepResult:
    """Упорядоченная по ε сборка отчётов; не зависит от порядка завершения потоков."""
    eps_list = tuple(r.eps for r in runs)
    sup_tvs = [sup_slice_tv(r.result.solution) for r in runs]
    C = max(sup_tvs) if (u0.hypothesis == "F" and sup_tvs) else None

    summaries = []
    for run, sup_tv in zip(runs, sup_tvs):
        reports = run_reports(run.result, flux, visc, u0, run.u0eps, tol, C=C)
        summaries.append(EpsSummary(
            eps=run.eps,
            steps=run.result.steps,
            dt_used=run.result.dt_used,
            max_abs=run.result.max_abs,
            slices=len(run.result.solution.times),
            reports=tuple(reports),
            mollifier_row=mollifier_bound_row(u0, run.eps, run.u0eps) if u0.hypothesis == "E" else None,
            w11_error=w11_error(run.u0eps, u0) if u0.hypothesis == "F" else None,
            tv_space_time=tv_space_time(run.result.solution),
        ))

    sweep_reports: list[EstimateReport] = []
    if summaries:
        if u0.hypothesis == "E":
            rows = [s.mollifier_row for s in summaries]
            sweep_reports.extend(summarize_bounds(rows, tol.mollifier, tol.uniform).reports)
        else:
            sweep_reports.append(_uniformity_report(
                "bv_space_uniform", sup_tvs, tol.uniform,
                "L1 gradient bound C stable under eps-halving",
            ))
            errors = [s.w11_error for s in summaries]
            ratios = [b / a for a, b in zip(errors, errors[1:]) if a > 0]
            sweep_reports.append(EstimateReport(
                "w11_convergence", max(ratios, default=0.0), 1.0, 0.0,
                "W11 error of data approximation decreases along eps-halving",
                details={f"w11_error_{e:g}": err for e, err in zip(eps_list, errors)},
            ))
        tv_bound = max(
            r.result.solution.T * (C if C is not None else u0.tv_bound)
            + next(rep.rhs for rep in s.reports if rep.name == "bv_time")
            for r, s in zip(runs, summaries)
        )
        sweep_reports.append(EstimateReport(
            "tv_space_time", max(s.tv_space_time for s in summaries), tv_bound, tol.bv,
            "space-time total variation bounded uniformly in eps",
        ))

    times = np.linspace(0.0, cfg.T, COMMON_SLICES)
    common = [resample_times(r.result.solution, times) for r in runs]
    cauchy = tuple(l1_distance(a, b) for a, b in zip(common, common[1:]))
    oracle: tuple[float, ...] = ()
    if with_oracle and runs:
        reference = reference_on_grid(flux, u0, runs[0].u0eps.grid, cfg.T, cfg.fine_factor, times)
        oracle = tuple(l1_distance(c, reference) for c in common)

    sweep = SweepResult(
        eps_list=eps_list,
        summaries=tuple(summaries),
        solutions=tuple(r.result.solution for r in runs),
        cauchy_l1=cauchy,
        oracle_l1=oracle,
        reports=tuple(sweep_reports),
        hypothesis=u0.hypothesis,
        partial=partial,
        runs=runs,
    )
    logger.info(
        "Свип собран: %s",
        context_str(levels=len(eps_list), passed=sweep.passed, rate=sweep.oracle_rate() if oracle else None),
    )
    return sweep


# }}}
