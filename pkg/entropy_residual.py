"""
Проверка энтропийного решения на ограниченной области: слабые невязки Кружкова
против гладких шапочек внутри Ω_T и граничное неравенство для следов при нулевых данных Дирихле.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np
from scipy.integrate import trapezoid

from bv_calculus import sg_eval
from grid_field import SpaceTimeField
from models import FluxModel
from utils.logging_setup import context_str

if TYPE_CHECKING:
    from estimates import SweepResult

logger = logging.getLogger(__name__)

# Центры и масштабы батареи шапочек в долях длины области и T
BUMP_X_CENTERS = (0.2, 0.4, 0.6, 0.8)
BUMP_T_CENTERS = (0.25, 0.5, 0.75)
BUMP_X_SCALE = 0.15
BUMP_T_SCALE = 0.2
KRUZHKOV_LEVELS = 9
DEFAULT_C_TOL = 5.0
# Допуск нулевой разницы Коши (нулевые данные)
CAUCHY_FLOOR = 1e-14


class EntropyError(ValueError):
    """Пробная функция выходит за Ω_T или предел нельзя сертифицировать."""


def _psi(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _psi_prime(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si**2)) * (-2.0 * si / (1.0 - si**2) ** 2)
    return out


@dataclass(frozen=True)
class TestBump:
    """φ(x, t) = ψ((x − x_c)/s_x)·ψ((t − t_c)/s_t), ψ(s) = exp(−1/(1 − s²)) при |s| < 1."""

    __test__ = False

    x_center: float
    t_center: float
    x_scale: float
    t_scale: float
    ident: str = ""

    def check_support(self, stf: SpaceTimeField) -> None:
        a, b = stf.grid.domain.a, stf.grid.domain.b
        inside = (
            self.x_center - self.x_scale >= a
            and self.x_center + self.x_scale <= b
            and self.t_center - self.t_scale >= 0.0
            and self.t_center + self.t_scale <= stf.T
        )
        if not inside or self.x_scale <= 0 or self.t_scale <= 0:
            raise EntropyError(f"Носитель пробной функции {self.ident or self} выходит за Ω_T")

    def derivatives(self, stf: SpaceTimeField) -> tuple[np.ndarray, np.ndarray]:
        """(φ_t, φ_x) в центрах ячеек на сохранённых моментах времени, форма (n_times, n_cells)."""
        sx = (stf.grid.centers - self.x_center) / self.x_scale
        st = (stf.times - self.t_center) / self.t_scale
        px, dpx = _psi(sx), _psi_prime(sx) / self.x_scale
        pt, dpt = _psi(st), _psi_prime(st) / self.t_scale
        return np.outer(dpt, px), np.outer(pt, dpx)


def bump_battery(stf: SpaceTimeField) -> tuple[TestBump, ...]:
    """12 шапочек: 4 центра по x на 3 центра по t."""
    a, L, T = stf.grid.domain.a, stf.grid.domain.volume, stf.T
    bumps = []
    for i, fx in enumerate(BUMP_X_CENTERS):
        for j, ft in enumerate(BUMP_T_CENTERS):
            bumps.append(TestBump(a + fx * L, ft * T, BUMP_X_SCALE * L, BUMP_T_SCALE * T, f"bump_x{i}_t{j}"))
    return tuple(bumps)


def kruzhkov_levels(interval: tuple[float, float], linf: float) -> tuple[float, ...]:
    """9 равноотстоящих уровней на I и два уровня ±2‖u‖∞ вне диапазона решения."""
    lo, hi = interval
    sentinel = 2.0 * (linf if linf > 0 else max(abs(lo), abs(hi)))
    levels = [float(k) for k in np.linspace(lo, hi, KRUZHKOV_LEVELS)]
    return tuple([-sentinel] + levels + [sentinel])


def _space_time_integral(stf: SpaceTimeField, integrand: np.ndarray) -> float:
    # середины ячеек по x, трапеции по сохранённым моментам времени
    return float(trapezoid(integrand.sum(axis=1) * stf.grid.h, stf.times))


def weak_entropy_residual(stf: SpaceTimeField, flux: FluxModel, k: float, bump: TestBump) -> float:
    """−∫∫(|u − k|φ_t + sg(u − k)(f(u) − f(k))φ_x) dx dt для одной пробной функции."""
    bump.check_support(stf)
    u = stf.as_array()
    phi_t, phi_x = bump.derivatives(stf)
    eta = np.abs(u - k)
    q = sg_eval(u - k) * (flux.f(u) - float(flux.f(np.float64(k))))
    return -_space_time_integral(stf, eta * phi_t + q * phi_x)


def interior_residual(
    stf: SpaceTimeField,
    flux: FluxModel,
    k: float,
    testfns: Iterable[TestBump],
) -> float:
    """Максимум слабой невязки Кружкова по пробным функциям; энтропийное решение даёт значение ≤ tol."""
    values = [weak_entropy_residual(stf, flux, k, bump) for bump in testfns]
    if not values:
        raise EntropyError("Нет пробных функций")
    return max(values)


def conservation_residual(stf: SpaceTimeField, flux: FluxModel, bump: TestBump) -> float:
    """∫∫(u φ_t + f(u) φ_x) dx dt: ноль для слабого решения."""
    bump.check_support(stf)
    u = stf.as_array()
    phi_t, phi_x = bump.derivatives(stf)
    return _space_time_integral(stf, u * phi_t + flux.f(u) * phi_x)


def _trace_violation(flux: FluxModel, trace: np.ndarray, k: np.ndarray, normal: float) -> np.ndarray:
    # −sg(γu)(f(γu) − f(k))·ν с внешней нормалью ν; k между 0 и γu
    # с входящей нормалью знак невязки противоположный: γu = −1 слева у Бюргерса это вытекание, невязка < 0
    return -sg_eval(trace) * (flux.f(trace) - flux.f(k)) * normal


def boundary_violations(
    stf: SpaceTimeField,
    flux: FluxModel,
    levels: Iterable[float] | None = None,
) -> dict[str, np.ndarray]:
    """
    Граничные невязки по моментам времени для каждой стороны; след берётся из крайней ячейки.
    Без levels берутся 9 уровней между 0 и следом; с levels только уровни, лежащие между 0 и следом.
    """
    u = stf.as_array()
    out = {}
    for side, column, normal in (("left", 0, -1.0), ("right", -1, 1.0)):
        trace = u[:, column]
        if levels is None:
            ks = np.linspace(0.0, 1.0, KRUZHKOV_LEVELS)[None, :] * trace[:, None]
        else:
            ks = np.asarray(list(levels), dtype=np.float64)[None, :].repeat(trace.size, axis=0)
        admissible = (ks >= np.minimum(trace, 0.0)[:, None]) & (ks <= np.maximum(trace, 0.0)[:, None])
        values = _trace_violation(flux, trace[:, None], ks, normal)
        out[side] = np.where(admissible, values, -math.inf)
    return out


def boundary_residual(
    stf: SpaceTimeField,
    flux: FluxModel,
    levels: Iterable[float] | None = None,
) -> float:
    """Максимум граничной невязки по сторонам, моментам и уровням; ≤ 0 при выполненном граничном условии."""
    values = boundary_violations(stf, flux, levels)
    worst = max(float(np.max(v)) for v in values.values())
    # след 0 на всех моментах: допустимый уровень только k = 0, невязка 0
    return 0.0 if not math.isfinite(worst) else worst


@dataclass(frozen=True)
class ResidualRow:
    kind: str
    k: float
    testfn_id: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance


@dataclass(frozen=True)
class EntropyReport:
    kruzhkov_levels: tuple[float, ...]
    worst_interior_residual: float
    worst_boundary_residual: float
    test_function_count: int
    tolerance: float
    rows: tuple[ResidualRow, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def entropy_tolerance(stf: SpaceTimeField, c_tol: float = DEFAULT_C_TOL) -> float:
    """tol = C_tol·(h + Δt), где Δt: наибольший шаг между сохранёнными срезами."""
    dt = float(np.max(np.diff(stf.times))) if len(stf.times) > 1 else 0.0
    return c_tol * (stf.grid.h + dt)


def certify_field(
    stf: SpaceTimeField,
    flux: FluxModel,
    interval: tuple[float, float] | None = None,
    c_tol: float = DEFAULT_C_TOL,
) -> EntropyReport:
    """Невязки Кружкова по 11 уровням и 12 шапочкам плюс граничная невязка по тем же уровням."""
    linf = float(np.max(np.abs(stf.as_array())))
    if interval is None:
        interval = flux.interval or (-max(linf, 1.0), max(linf, 1.0))
    levels = kruzhkov_levels(interval, linf)
    bumps = bump_battery(stf)
    tol = entropy_tolerance(stf, c_tol)

    rows = []
    for k in levels:
        for bump in bumps:
            rows.append(ResidualRow("interior", k, bump.ident, weak_entropy_residual(stf, flux, k, bump), tol))
    violations = boundary_violations(stf, flux, levels)
    for side, values in violations.items():
        for j, k in enumerate(levels):
            worst = float(np.max(values[:, j]))
            rows.append(ResidualRow("boundary", k, side, worst if math.isfinite(worst) else 0.0, tol))
    free = boundary_residual(stf, flux)
    rows.append(ResidualRow("boundary", math.nan, "trace_levels", free, tol))

    interior = max(r.residual for r in rows if r.kind == "interior")
    boundary = max(r.residual for r in rows if r.kind == "boundary")
    report = EntropyReport(levels, interior, boundary, len(bumps), tol, tuple(rows))
    logger.info(
        "Энтропийная проверка: %s",
        context_str(interior=interior, boundary=boundary, tol=tol, passed=report.passed),
    )
    return report


def certify_limit(sweep: "SweepResult", flux: FluxModel, c_tol: float = DEFAULT_C_TOL) -> EntropyReport:
    """Сертифицировать решение с наименьшим ε, если последовательность по ε сходится в L¹."""
    if len(sweep.eps_list) < 3:
        raise EntropyError("Для сертификации нужно не меньше трёх уровней ε")
    diffs = list(sweep.cauchy_l1)
    for prev, nxt in zip(diffs, diffs[1:]):
        if prev > CAUCHY_FLOOR and nxt >= prev:
            raise EntropyError(
                f"no convergent limit to certify: разности Коши {prev:.6g} → {nxt:.6g} не убывают"
            )
    return certify_field(sweep.solutions[-1], flux, flux.interval, c_tol)
