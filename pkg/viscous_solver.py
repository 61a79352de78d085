"""
Явная консервативная схема для u_t + f_ε(u)_x = ε (B(u) u_x)_x на Ω×(0,T),
u = 0 на ∂Ω (фиктивные ячейки со значением 0), u(·,0) = u_{0ε}.
Монотонный численный поток для адвекции, центральная дискретизация диффузии.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

import config
from grid_field import ScalarField, SpaceTimeField, norm_l2_sq, norm_linf
from models import FluxModel, InitialData, ViscosityModel
from reports import EstimateReport
from utils.logging_setup import context_str

logger = logging.getLogger(__name__)

# При cfl_safety выше 2/3 суммарное число Куранта λL + 2μB_sup может превысить 1
MONOTONE_CFL = 2.0 / 3.0
MIN_SLICES = 200
# Рост ‖u‖∞ во столько раз относительно начальных данных считается неустойчивостью
GROWTH_LIMIT = 1e6
CONVEXITY_SAMPLES = 4001


class SolverError(RuntimeError):
    """Решение прервано: неустойчивость, NaN/переполнение или недопустимая конфигурация."""

    def __init__(self, message: str, step: int | None = None) -> None:
        super().__init__(message if step is None else f"{message} (шаг {step})")
        self.step = step


@dataclass(frozen=True)
class SolverConfig:
    """Параметры явной схемы. store_every=None: автоматический шаг сохранения (не меньше 200 срезов)."""

    epsilon: float
    n_cells: int
    T: float
    cfl_safety: float = 0.6
    store_every: int | None = None
    scheme: str = "engquist_osher"
    # Тестовый крючок: добавка −anti_diffusion·u_xx (отрицательная вязкость)
    anti_diffusion: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise SolverError(f"epsilon должен быть положительным, получено {self.epsilon}")
        if self.n_cells < 1:
            raise SolverError("n_cells должен быть положительным")
        if not (math.isfinite(self.T) and self.T > 0):
            raise SolverError(f"T должен быть положительным, получено {self.T}")
        if not 0 < self.cfl_safety <= 1:
            raise SolverError(f"cfl_safety должен лежать в (0, 1], получено {self.cfl_safety}")
        if self.store_every is not None and self.store_every < 1:
            raise SolverError("store_every должен быть положительным")
        if self.scheme not in config.SCHEMES:
            raise SolverError(f"Неизвестная схема {self.scheme!r}: допустимо {', '.join(config.SCHEMES)}")
        if self.anti_diffusion < 0:
            raise SolverError("anti_diffusion должен быть неотрицательным")


@dataclass(frozen=True)
class StepRecord:
    """Масса h·Σu, ‖u‖∞ и накопленный с t = 0 поток массы через ∂Ω наружу: mass + outflow постоянна."""

    step: int
    t: float
    mass: float
    linf: float
    outflow: float = 0.0


@dataclass(frozen=True, eq=False)
class SolveResult:
    solution: SpaceTimeField
    dt_used: float
    steps: int
    max_abs: float
    diagnostics: tuple[StepRecord, ...]
    config: SolverConfig
    flux_name: str = ""
    visc_name: str = ""
    warnings: tuple[str, ...] = field(default_factory=tuple)


NumericalFlux = Callable[[np.ndarray, np.ndarray], np.ndarray]


# {{{ численные потоки


def _flux_range(flux: FluxModel, u0eps: ScalarField) -> tuple[float, float]:
    """Отрезок, на котором живут значения решения: рабочий интервал потока и данные с нулём."""
    m = max(norm_linf(u0eps), 0.0)
    lo, hi = -m, m
    if flux.interval is not None:
        lo, hi = min(lo, flux.interval[0]), max(hi, flux.interval[1])
    if lo == hi:
        lo, hi = -1.0, 1.0
    return lo, hi


def check_convex(flux: FluxModel, interval: tuple[float, float]) -> bool:
    """Выпуклость по выборке: f′ не убывает на интервале."""
    sample = np.linspace(interval[0], interval[1], CONVEXITY_SAMPLES)
    fp = np.asarray(flux.f_prime(sample), dtype=np.float64)
    scale = max(float(np.max(np.abs(fp))), 1.0)
    return bool(np.all(np.diff(fp) >= -1e-6 * scale))


def sonic_point(flux: FluxModel, interval: tuple[float, float]) -> float:
    """
    Точка минимума выпуклого f. Если f монотонна на интервале, возвращается конечный
    ограничитель за его пределами (ниже для возрастающей, выше для убывающей).
    """
    lo, hi = interval
    width = hi - lo
    fp_lo = float(flux.f_prime(np.float64(lo)))
    fp_hi = float(flux.f_prime(np.float64(hi)))
    if fp_lo >= 0:
        return lo - width
    if fp_hi <= 0:
        return hi + width
    return float(brentq(lambda u: float(flux.f_prime(np.float64(u))), lo, hi, xtol=1e-14))


def engquist_osher(flux: FluxModel, u_star: float) -> NumericalFlux:
    """F(uL, uR) = f(max(uL, u*)) + f(min(uR, u*)) − f(u*) для выпуклого f."""
    f_star = float(flux.f(np.float64(u_star)))

    def numerical(uL, uR):
        return flux.f(np.maximum(uL, u_star)) + flux.f(np.minimum(uR, u_star)) - f_star

    return numerical


def godunov_flux(flux: FluxModel, u_star: float) -> NumericalFlux:
    """F(uL, uR) = max(f(max(uL, u*)), f(min(uR, u*))) для выпуклого f."""

    def numerical(uL, uR):
        return np.maximum(flux.f(np.maximum(uL, u_star)), flux.f(np.minimum(uR, u_star)))

    return numerical


def lax_friedrichs(flux: FluxModel, alpha: float) -> NumericalFlux:
    """F(uL, uR) = (f(uL) + f(uR))/2 − α(uR − uL)/2 с глобальным α = sup|f′|."""

    def numerical(uL, uR):
        return 0.5 * (flux.f(uL) + flux.f(uR)) - 0.5 * alpha * (uR - uL)

    return numerical


def make_numerical_flux(scheme: str, flux: FluxModel, interval: tuple[float, float]) -> NumericalFlux:
    if scheme == "lax_friedrichs":
        return lax_friedrichs(flux, flux.lipschitz_bound)
    if not check_convex(flux, interval):
        raise SolverError(f"Схема {scheme} требует выпуклого потока, {flux.name!r} не выпукл на {interval}")
    u_star = sonic_point(flux, interval)
    if scheme == "engquist_osher":
        return engquist_osher(flux, u_star)
    if scheme == "godunov_flux":
        return godunov_flux(flux, u_star)
    raise SolverError(f"Неизвестная схема {scheme!r}")


# }}}


def time_step(h: float, epsilon: float, lipschitz: float, b_sup: float, cfl_safety: float) -> float:
    """dt = cfl_safety · min(h/(2L), h²/(2εB_sup))."""
    advective = h / (2.0 * lipschitz) if lipschitz > 0 else math.inf
    diffusive = h * h / (2.0 * epsilon * b_sup)
    return cfl_safety * min(advective, diffusive)


def _config_warnings(cfg: SolverConfig, h: float) -> list[str]:
    notes = []
    if cfg.cfl_safety > MONOTONE_CFL:
        notes.append(f"cfl_safety={cfg.cfl_safety:.3g} > 2/3: монотонность схемы не гарантирована")
    if h > cfg.epsilon / 4:
        notes.append(f"h={h:.3g} > ε/4={cfg.epsilon / 4:.3g}: пограничные слои не разрешены")
    return notes


def solve(flux: FluxModel, visc: ViscosityModel, u0eps: ScalarField, cfg: SolverConfig) -> SolveResult:
    """
    Явный шаг: u_i ← u_i − λ(F_{i+1/2} − F_{i−1/2}) + μ(B_{i+1/2}(u_{i+1} − u_i) − B_{i−1/2}(u_i − u_{i−1})),
    λ = dt/h, μ = ε·dt/h², B на полусумме соседних значений, u = 0 в фиктивных ячейках.
    """
    grid = u0eps.grid
    if grid.n_cells != cfg.n_cells:
        raise SolverError(f"Данные на {grid.n_cells} ячейках, конфигурация ждёт {cfg.n_cells}")
    h = grid.h
    notes = _config_warnings(cfg, h)
    for note in notes:
        logger.warning("Конфигурация решателя: %s", note)

    interval = _flux_range(flux, u0eps)
    numerical = make_numerical_flux(cfg.scheme, flux, interval)

    dt_max = time_step(h, cfg.epsilon, flux.lipschitz_bound, visc.B_sup, cfg.cfl_safety)
    n_steps = max(1, int(math.ceil(cfg.T / dt_max - 1e-12)))
    dt = cfg.T / n_steps
    store_every = cfg.store_every or max(1, n_steps // MIN_SLICES)
    lam = dt / h
    mu = cfg.epsilon * dt / (h * h)
    anti = cfg.anti_diffusion * dt / (h * h)
    debug = config.get_debug_mode()

    logger.info(
        "Старт решения: %s",
        context_str(
            flux=flux.name, visc=visc.name, scheme=cfg.scheme, eps=cfg.epsilon,
            n_cells=cfg.n_cells, T=cfg.T, dt=dt, steps=n_steps, store_every=store_every,
        ),
    )

    u = np.array(u0eps.values, dtype=np.float64)
    limit = GROWTH_LIMIT * max(norm_linf(u0eps), 1.0)
    times = [0.0]
    slices = [u.copy()]
    records = [StepRecord(0, 0.0, float(h * np.sum(u)), float(np.max(np.abs(u))))]
    padded = np.zeros(grid.n_cells + 2)
    outflow = 0.0

    with np.errstate(over="raise", invalid="raise"):
        for step in range(1, n_steps + 1):
            try:
                padded[1:-1] = u
                left, right = padded[:-1], padded[1:]
                F = numerical(left, right)
                grad = right - left
                B_face = visc.B(0.5 * (left + right))
                diffusive = B_face * grad
                u = (
                    u
                    - lam * (F[1:] - F[:-1])
                    + mu * (diffusive[1:] - diffusive[:-1])
                    - anti * (grad[1:] - grad[:-1])
                )
                # поток через граничные грани, правая минус левая
                outflow += h * (
                    lam * (F[-1] - F[0])
                    - mu * (diffusive[-1] - diffusive[0])
                    + anti * (grad[-1] - grad[0])
                )
            except FloatingPointError as e:
                raise SolverError(f"Переполнение или NaN: {e}", step=step) from e
            linf = float(np.max(np.abs(u)))
            if not np.all(np.isfinite(u)):
                raise SolverError("Решение содержит NaN или бесконечность", step=step)
            if linf > limit:
                raise SolverError(f"Неустойчивость: ‖u‖∞={linf:.3g} превысил предел {limit:.3g}", step=step)
            t = step * dt if step < n_steps else cfg.T
            records.append(StepRecord(step, t, float(h * np.sum(u)), linf, float(outflow)))
            if debug:
                logger.debug("Шаг: %s", context_str(step=step, t=t, mass=records[-1].mass, linf=linf))
            if step % store_every == 0 or step == n_steps:
                times.append(t)
                slices.append(u.copy())

    solution = SpaceTimeField.from_array(grid, np.array(times), np.array(slices))
    max_abs = max(r.linf for r in records)
    logger.info(
        "Решение завершено: %s",
        context_str(steps=n_steps, slices=len(times), max_abs=max_abs, mass=records[-1].mass),
    )
    return SolveResult(
        solution, dt, n_steps, max_abs, tuple(records), cfg, flux.name, visc.name, tuple(notes)
    )


def max_principle_check(
    result: SolveResult,
    u0: InitialData,
    tol: float = 1e-10,
    bound: float | None = None,
) -> EstimateReport:
    """sup по срезам ‖u^ε(·,t)‖∞ ≤ ‖u₀‖∞ (или заданная граница, например A для гипотезы F)."""
    rhs = u0.linf_bound if bound is None else bound
    lhs = max(norm_linf(s) for s in result.solution.slices)
    report = EstimateReport(
        "max_principle", lhs, rhs, tol,
        "sup of viscous solution bounded by sup of initial data",
        details={"margin": lhs - rhs},
    )
    if not report.passed:
        logger.warning("Нарушен принцип максимума: %s", context_str(lhs=lhs, rhs=rhs, margin=lhs - rhs))
    return report


def gradient_l2_sq(field_: ScalarField) -> float:
    """‖u_x‖²_{L²(Ω)} по центральным разностям с нулевыми фиктивными ячейками."""
    padded = np.concatenate(([0.0], field_.values, [0.0]))
    ux = (padded[2:] - padded[:-2]) / (2.0 * field_.grid.h)
    return float(field_.grid.h * np.sum(ux * ux))


def energy_estimate_check(
    result: SolveResult,
    visc: ViscosityModel,
    u0eps: ScalarField,
    tol: float = 0.05,
    A: float | None = None,
) -> EstimateReport:
    """
    ε·‖u_x‖²_{L²(Ω_T)} ≤ ‖u_{0ε}‖²_{L²}/(2r); при заданном A (гипотеза F) правая часть Vol(Ω)·A²/(2r).
    """
    stf = result.solution
    samples = np.array([gradient_l2_sq(s) for s in stf.slices])
    lhs = result.config.epsilon * float(trapezoid(samples, stf.times))
    if A is None:
        rhs = norm_l2_sq(u0eps) / (2.0 * visc.r_lower)
        provenance = "energy dissipation bounded by initial L2 energy over 2r"
    else:
        rhs = stf.grid.domain.volume * A * A / (2.0 * visc.r_lower)
        provenance = "energy dissipation bounded by Vol(Omega) A^2 over 2r"
    details = {"final_l2_sq": norm_l2_sq(stf.final), "initial_l2_sq": norm_l2_sq(u0eps)}
    return EstimateReport("energy", lhs, rhs, tol, provenance, details=details)
