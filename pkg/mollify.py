"""
Стандартный сглаживатель ρ_ε(y) = k_ε·exp(−1/(1 − (y/ε)²)) и регуляризация
начальных данных (гипотезы E и F) и потока свёрткой с ним.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from bv_calculus import laplacian_l1, total_variation
from grid_field import Domain1D, Grid, ScalarField, norm_l1, norm_linf
from models import FluxModel, InitialData
from reports import EstimateReport
from utils.logging_setup import context_str

logger = logging.getLogger(__name__)

# Свёртка считается на сетке в REFINE раз мельче, затем осредняется по ячейкам
REFINE = 4
MASS_TOL = 1e-10
# Шаг таблицы f_ε не крупнее ε/FLUX_NODES_PER_EPS
FLUX_NODES_PER_EPS = 16
FLUX_MIN_NODES = 1025
# Число точек для поиска носителя усечённых данных
SUPPORT_SAMPLES = 20_001


class MollifyError(ValueError):
    """Недопустимый радиус сглаживания или неподходящие данные."""


def _bump(s: float) -> float:
    if abs(s) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - s * s))


@lru_cache(maxsize=1)
def _unit_mass() -> float:
    # ∫_{−1}^{1} exp(−1/(1−s²)) ds ≈ 0.443994
    value, _ = quad(_bump, -1.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


@dataclass(frozen=True)
class MollifierKernel:
    """ρ_ε ≥ 0 с носителем [−ε, ε] и единичной массой; normalization = k_ε."""

    epsilon: float
    normalization: float = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise MollifyError(f"eps должен быть положительным, получено {self.epsilon}")
        object.__setattr__(self, "normalization", 1.0 / (self.epsilon * _unit_mass()))
        mass = self.mass()
        if abs(mass - 1.0) > MASS_TOL:
            raise MollifyError(f"Масса ядра {mass:.15g} отличается от 1 при eps={self.epsilon}")

    def value(self, y: float) -> float:
        return self.normalization * _bump(y / self.epsilon)

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        s = y / self.epsilon
        inside = np.abs(s) < 1.0
        out = np.zeros_like(s)
        out[inside] = self.normalization * np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return out

    def mass(self) -> float:
        value, _ = quad(self.value, -self.epsilon, self.epsilon, epsabs=1e-13, epsrel=1e-12, limit=200)
        return value


def _convolve_cells(
    func: Callable[[float], float],
    breakpoints: tuple[float, ...],
    domain: Domain1D,
    kernel: MollifierKernel,
    grid: Grid,
) -> ScalarField:
    """
    (func ∗ ρ_ε) в центрах ячеек сетки в REFINE раз мельче, затем средние по ячейкам grid.
    func считается равной нулю вне Ω; на каждом гладком куске окна своя адаптивная квадратура.
    """
    eps = kernel.epsilon
    fine = grid.refined(REFINE)
    cuts = sorted(p for p in breakpoints if domain.a < p < domain.b)
    values = np.empty(fine.n_cells)
    for i, x in enumerate(fine.centers):
        lo, hi = max(x - eps, domain.a), min(x + eps, domain.b)
        if lo >= hi:
            values[i] = 0.0
            continue
        edges = [lo] + [p for p in cuts if lo < p < hi] + [hi]
        total = 0.0
        for left, right in zip(edges, edges[1:]):
            piece, _ = quad(
                lambda y: func(y) * kernel.value(x - y), left, right,
                epsabs=1e-14, epsrel=1e-12, limit=200,
            )
            total += piece
        values[i] = total
    return ScalarField(fine, values).coarsened(REFINE)


def _profile_scalar(u0: InitialData) -> Callable[[float], float]:
    return lambda y: float(u0.profile(np.float64(y)))


def mollify_data(u0: InitialData, eps: float, grid: Grid) -> ScalarField:
    """u_{0ε} = u₀ ∗ ρ_ε для данных гипотезы E; носитель остаётся строго внутри Ω."""
    if u0.hypothesis != "E":
        raise MollifyError(f"mollify_data требует гипотезу E, данные {u0.name!r} под гипотезой {u0.hypothesis}")
    if not eps > 0:
        raise MollifyError(f"eps должен быть положительным, получено {eps}")
    if eps >= u0.support_margin:
        raise MollifyError(
            f"support escapes domain: eps={eps:.6g} ≥ support_margin={u0.support_margin:.6g}"
        )
    if grid.domain != u0.domain:
        raise MollifyError("Сетка и данные заданы на разных областях")
    kernel = MollifierKernel(eps)
    result = _convolve_cells(_profile_scalar(u0), u0.breakpoints, u0.domain, kernel, grid)
    logger.debug("Сглажены данные: %s", context_str(data=u0.name, eps=eps, n_cells=grid.n_cells))
    return result


@dataclass(frozen=True)
class MollifierBoundRow:
    eps: float
    sup_ratio: float
    tv_ratio: float
    c_eps: float


@dataclass(frozen=True)
class MollifierBoundsReport:
    """Построчные отношения по ε и три сводных отчёта: sup, TV и ε·‖u″‖ (устойчивость константы)."""

    rows: tuple[MollifierBoundRow, ...]
    reports: tuple[EstimateReport, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def c_constant(self) -> float:
        return max((r.c_eps for r in self.rows), default=0.0)


def _ratio(num: float, den: float) -> float:
    return 0.0 if den == 0 else num / den


def mollifier_bound_row(u0: InitialData, eps: float, smooth: ScalarField) -> MollifierBoundRow:
    """Отношения для одного ε по уже сглаженным данным."""
    row = MollifierBoundRow(
        float(eps),
        _ratio(norm_linf(smooth), u0.linf_bound),
        _ratio(total_variation(smooth), u0.tv_bound),
        _ratio(eps * laplacian_l1(smooth), u0.tv_bound),
    )
    logger.info(
        "Оценки сглаживания: %s",
        context_str(data=u0.name, eps=eps, sup_ratio=row.sup_ratio, tv_ratio=row.tv_ratio, c_eps=row.c_eps),
    )
    return row


def summarize_bounds(
    rows: list[MollifierBoundRow] | tuple[MollifierBoundRow, ...],
    tol: float = 1e-8,
    tol_uniform: float = 0.10,
) -> MollifierBoundsReport:
    """
    Сводные отчёты по строкам: sup и TV не растут, c(ε) не растёт при переходе к следующему ε.
    Убывание c(ε) допустимо (у шапочки u₀″ конечная мера, и c(ε) ~ ε); C = sup c(ε).
    """
    if not rows:
        raise MollifyError("Нет строк для сводки")
    c_values = [r.c_eps for r in rows]
    growth = [b / a for a, b in zip(c_values, c_values[1:]) if a > 0]
    reports = (
        EstimateReport(
            "mollifier_sup", max(r.sup_ratio for r in rows), 1.0, tol,
            "sup of mollified data bounded by sup of data",
        ),
        EstimateReport(
            "mollifier_tv", max(r.tv_ratio for r in rows), 1.0, tol,
            "L1 gradient of mollified data bounded by TV of data",
        ),
        EstimateReport(
            "mollifier_laplacian", max(growth, default=0.0), 1.0, tol_uniform,
            "eps times L1 Laplacian of mollified data bounded by C TV of data, C not growing as eps shrinks",
            details={"c_constant": max(c_values), "c_min": min(c_values)},
        ),
    )
    return MollifierBoundsReport(tuple(rows), reports)


def verify_mollifier_bounds(
    u0: InitialData,
    eps_list: list[float] | tuple[float, ...],
    grid: Grid,
    tol: float = 1e-8,
    tol_uniform: float = 0.10,
) -> MollifierBoundsReport:
    """
    Для каждого ε: ‖u_{0ε}‖∞/‖u₀‖∞ ≤ 1, ‖u_{0ε}′‖_{L¹}/TV(u₀) ≤ 1 и c(ε) = ε·‖u_{0ε}″‖_{L¹}/TV(u₀).
    Константа C = max c(ε); рост c(ε) между соседними ε должен укладываться в tol_uniform.
    """
    if not eps_list:
        raise MollifyError("eps_list пуст")
    rows = [mollifier_bound_row(u0, eps, mollify_data(u0, eps, grid)) for eps in eps_list]
    return summarize_bounds(rows, tol, tol_uniform)


def _outer_crossings(u0: InitialData, delta: float) -> tuple[float, float] | None:
    """Крайние точки, где |u₀| пересекает уровень δ; None, если |u₀| ≤ δ всюду."""
    a, b = u0.domain.a, u0.domain.b
    xs = np.linspace(a, b, SUPPORT_SAMPLES)
    excess = np.abs(u0(xs)) - delta
    above = np.flatnonzero(excess > 0)
    if above.size == 0:
        return None

    def level(x: float) -> float:
        return abs(float(u0(np.float64(x)))) - delta

    first, last = int(above[0]), int(above[-1])
    # u₀ = 0 на ∂Ω, поэтому соседняя слева (справа) точка выборки лежит ниже уровня
    left = brentq(level, xs[first - 1], xs[first], xtol=1e-14) if excess[first - 1] < 0 else xs[first - 1]
    right = brentq(level, xs[last], xs[last + 1], xtol=1e-14) if excess[last + 1] < 0 else xs[last + 1]
    return float(left), float(right)


def approximate_w11(u0: InitialData, eps: float, grid: Grid) -> ScalarField:
    """
    Приближение данных гипотезы F: усечение u_δ = sg(u₀)·max(|u₀| − δ, 0) с δ = ε·‖u₀‖∞
    (носитель отходит от ∂Ω), затем свёртка с ρ_η, η = min(ε, отступ/2).
    ‖результат‖∞ ≤ ‖u₀‖∞ − δ ≤ A.
    """
    if u0.hypothesis != "F":
        raise MollifyError(f"approximate_w11 требует гипотезу F, данные {u0.name!r} под гипотезой {u0.hypothesis}")
    if not eps > 0:
        raise MollifyError(f"eps должен быть положительным, получено {eps}")
    if grid.domain != u0.domain:
        raise MollifyError("Сетка и данные заданы на разных областях")

    delta = eps * u0.linf_bound
    crossings = _outer_crossings(u0, delta) if delta > 0 else None
    if crossings is None:
        return ScalarField.zeros(grid)
    left, right = crossings
    margin = min(left - u0.domain.a, u0.domain.b - right)
    if margin <= 0:
        raise MollifyError(f"Усечённые данные {u0.name!r} не отделены от границы")
    radius = min(eps, margin / 2)

    def truncated(y: float) -> float:
        v = float(u0.profile(np.float64(y)))
        return math.copysign(max(abs(v) - delta, 0.0), v)

    result = _convolve_cells(
        truncated, tuple(u0.breakpoints) + (left, right), u0.domain, MollifierKernel(radius), grid
    )
    logger.debug(
        "W^{1,1}-приближение: %s",
        context_str(data=u0.name, eps=eps, delta=delta, radius=radius, margin=margin),
    )
    return result


def w11_error(approx: ScalarField, u0: InitialData) -> float:
    """Дискретная ‖v − u₀‖_{W^{1,1}} = ‖v − u₀‖_{L¹} + TV(v − u₀) против средних u₀ по ячейкам."""
    diff = approx.with_values(approx.values - u0.cell_averages(approx.grid).values)
    return norm_l1(diff) + total_variation(diff)


def mollify_flux(flux: FluxModel, eps: float) -> FluxModel:
    """
    f_ε = f ∗ ρ_ε. Вне [lo − ε, hi + ε] продолженный поток аффинен, и свёртка с симметричным
    ядром его не меняет; внутри таблица квадратур и кубический сплайн с заданными наклонами на концах.
    """
    if not eps > 0:
        raise MollifyError(f"eps должен быть положительным, получено {eps}")
    if flux.interval is None:
        raise MollifyError(f"Поток {flux.name!r} не продолжен линейно вне рабочего интервала")
    kernel = MollifierKernel(eps)
    lo, hi = flux.interval
    start, stop = lo - eps, hi + eps
    n_nodes = max(FLUX_MIN_NODES, int(math.ceil((stop - start) / (eps / FLUX_NODES_PER_EPS))) + 1)
    nodes = np.linspace(start, stop, n_nodes)

    table, _ = quad_vec(
        lambda z: np.asarray(flux.f(nodes - z), dtype=np.float64) * kernel.value(z),
        -eps, eps, epsabs=1e-13, epsrel=1e-12, limit=10_000, points=(0.0,),
    )
    slope_start = float(flux.f_prime(np.float64(start)))
    slope_stop = float(flux.f_prime(np.float64(stop)))
    spline = CubicSpline(nodes, table, bc_type=((1, slope_start), (1, slope_stop)))
    spline_prime = spline.derivative()

    def f_eps(u):
        u = np.asarray(u, dtype=np.float64)
        inside = (u >= start) & (u <= stop)
        return np.where(inside, spline(np.clip(u, start, stop)), flux.f(u))

    def f_eps_prime(u):
        u = np.asarray(u, dtype=np.float64)
        inside = (u >= start) & (u <= stop)
        return np.where(inside, spline_prime(np.clip(u, start, stop)), flux.f_prime(u))

    logger.debug("Сглажен поток: %s", context_str(flux=flux.name, eps=eps, nodes=n_nodes))
    return FluxModel(flux.name, f_eps, f_eps_prime, flux.lipschitz_bound, flux.interval)
