"""
Каталог потоков f, коэффициентов вязкости B и начальных данных u₀ (гипотезы E и F)
с их сертифицированными константами, а также проверка гипотез выборкой.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad

from grid_field import Domain1D, Grid, ScalarField

logger = logging.getLogger(__name__)

RealFunc = Callable[[np.ndarray], np.ndarray]

HYPOTHESES = ("E", "F")
SAMPLE_POINTS = 10_000
SAMPLE_EXPANSION = 0.10
# Относительный допуск сравнений «выборка против сертификата»
SAMPLE_RTOL = 1e-9


class ModelError(ValueError):
    """Некорректная модель или неизвестное имя в каталоге."""


@dataclass(frozen=True, eq=False)
class FluxModel:
    """
    Поток f с производной и границей Липшица sup|f′| на рабочем интервале.
    interval: отрезок, где f совпадает с исходным потоком (после clamp_flux), вне его f линейна.
    """

    name: str
    f: RealFunc
    f_prime: RealFunc
    lipschitz_bound: float
    interval: tuple[float, float] | None = None


@dataclass(frozen=True, eq=False)
class ViscosityModel:
    """Коэффициент вязкости B с производной, нижней границей r и sup|B|."""

    name: str
    B: RealFunc
    B_prime: RealFunc
    r_lower: float
    B_sup: float


@dataclass(frozen=True, eq=False)
class InitialData:
    """
    Начальные данные u₀ на области. profile векторизован и равен нулю вне Ω.
    breakpoints: точки негладкости profile (разрывы, изломы), нужны квадратурам.
    """

    name: str
    domain: Domain1D
    profile: RealFunc
    hypothesis: str
    linf_bound: float
    tv_bound: float
    support_margin: float = 0.0
    w11_seminorm: float | None = None
    A_bound: float | None = None
    breakpoints: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.hypothesis not in HYPOTHESES:
            raise ModelError(f"hypothesis должна быть E или F, получено {self.hypothesis!r}")

    @property
    def interval(self) -> tuple[float, float]:
        """I := [−‖u₀‖∞, ‖u₀‖∞] для E и [−A, A] для F (для нулевых данных [−1, 1])."""
        bound = self.A_bound if self.hypothesis == "F" and self.A_bound is not None else self.linf_bound
        if bound <= 0:
            bound = 1.0
        return (-bound, bound)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x > self.domain.a) & (x < self.domain.b)
        return np.where(inside, self.profile(x), 0.0)

    def cell_averages(self, grid: Grid) -> ScalarField:
        """Средние по ячейкам сетки (адаптивная квадратура с учётом точек негладкости)."""
        faces = grid.faces
        values = np.empty(grid.n_cells)
        for i in range(grid.n_cells):
            lo, hi = faces[i], faces[i + 1]
            inner = [p for p in self.breakpoints if lo < p < hi]
            integral, _ = quad(
                lambda y: float(self(y)), lo, hi, points=inner or None, limit=200,
                epsabs=1e-13, epsrel=1e-12,
            )
            values[i] = integral / grid.h
        return ScalarField(grid, values)


@dataclass(frozen=True)
class ClauseResult:
    passed: bool
    message: str
    value: float = float("nan")


@dataclass(frozen=True)
class HypothesisReport:
    """Результат проверки гипотезы E или F по пунктам."""

    hypothesis: str
    clauses: dict[str, ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    @property
    def failures(self) -> list[str]:
        return [f"{name}: {c.message}" for name, c in self.clauses.items() if not c.passed]


# {{{ потоки


def clamp_flux(raw: FluxModel, interval: tuple[float, float]) -> FluxModel:
    """
    Продолжить f линейно вне I = [lo, hi]: результат совпадает с raw на I,
    глобально липшицев с константой sup_I|f′| и C¹ в точках стыка.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise ModelError(f"Вырожденный интервал [{lo}, {hi}]")

    f_lo, f_hi = float(raw.f(lo)), float(raw.f(hi))
    d_lo, d_hi = float(raw.f_prime(lo)), float(raw.f_prime(hi))

    def f(u):
        u = np.asarray(u, dtype=np.float64)
        inner = raw.f(np.clip(u, lo, hi))
        return np.where(u < lo, f_lo + d_lo * (u - lo), np.where(u > hi, f_hi + d_hi * (u - hi), inner))

    def f_prime(u):
        return np.asarray(raw.f_prime(np.clip(np.asarray(u, dtype=np.float64), lo, hi)), dtype=np.float64)

    sample = np.linspace(lo, hi, SAMPLE_POINTS)
    lipschitz = float(np.max(np.abs(raw.f_prime(sample))))
    return FluxModel(raw.name, f, f_prime, lipschitz, (lo, hi))


def _zero_flux() -> FluxModel:
    return FluxModel(
        "zero",
        lambda u: np.zeros_like(np.asarray(u, dtype=np.float64)),
        lambda u: np.zeros_like(np.asarray(u, dtype=np.float64)),
        0.0,
    )


def _linear_flux(speed: float) -> FluxModel:
    # f(u) = c·u, глобально липшицев: clamp_flux его не меняет
    return FluxModel(
        "linear",
        lambda u: speed * np.asarray(u, dtype=np.float64),
        lambda u: np.full_like(np.asarray(u, dtype=np.float64), speed),
        abs(speed),
    )


def _burgers_flux() -> FluxModel:
    # f(u) = u²/2; f′ не ограничена на ℝ, поэтому в каталоге всегда после clamp_flux
    return FluxModel(
        "burgers",
        lambda u: 0.5 * np.asarray(u, dtype=np.float64) ** 2,
        lambda u: np.asarray(u, dtype=np.float64),
        float("inf"),
    )


FLUXES = ("zero", "linear", "burgers")


def make_flux(name: str, interval: tuple[float, float], speed: float = 1.0) -> FluxModel:
    """Поток из каталога, продолженный линейно вне рабочего интервала I."""
    if name == "zero":
        raw = _zero_flux()
    elif name == "linear":
        raw = _linear_flux(speed)
    elif name == "burgers":
        raw = _burgers_flux()
    else:
        raise ModelError(f"Неизвестный поток {name!r}: допустимо {', '.join(FLUXES)}")
    return clamp_flux(raw, interval)


# }}}


# {{{ вязкость


def _constant_viscosity() -> ViscosityModel:
    # B ≡ 1 (искусственная вязкость): r = 1, sup B = 1, B′ ≡ 0
    return ViscosityModel(
        "constant",
        lambda u: np.ones_like(np.asarray(u, dtype=np.float64)),
        lambda u: np.zeros_like(np.asarray(u, dtype=np.float64)),
        1.0,
        1.0,
    )


def _rational_viscosity() -> ViscosityModel:
    # B(u) = 1 + 1/(1+u²): inf B = 1 при |u|→∞, sup B = 2 при u = 0
    return ViscosityModel(
        "rational",
        lambda u: 1.0 + 1.0 / (1.0 + np.asarray(u, dtype=np.float64) ** 2),
        lambda u: -2.0 * np.asarray(u, dtype=np.float64) / (1.0 + np.asarray(u, dtype=np.float64) ** 2) ** 2,
        1.0,
        2.0,
    )


VISCOSITIES = ("constant", "rational")


def make_viscosity(name: str) -> ViscosityModel:
    if name == "constant":
        return _constant_viscosity()
    if name == "rational":
        return _rational_viscosity()
    raise ModelError(f"Неизвестная вязкость {name!r}: допустимо {', '.join(VISCOSITIES)}")


def b_prime_sup(visc: ViscosityModel, interval: tuple[float, float]) -> float:
    """‖B′‖_{L∞(I)} по плотной выборке."""
    sample = np.linspace(interval[0], interval[1], SAMPLE_POINTS)
    return float(np.max(np.abs(visc.B_prime(sample))))


def f_prime_sup(flux: FluxModel, interval: tuple[float, float]) -> float:
    """sup_I |f′| по плотной выборке."""
    sample = np.linspace(interval[0], interval[1], SAMPLE_POINTS)
    return float(np.max(np.abs(flux.f_prime(sample))))


# }}}


# {{{ начальные данные


def _zero_data(domain: Domain1D) -> InitialData:
    return InitialData(
        "zero", domain, lambda x: np.zeros_like(x), "E",
        linf_bound=0.0, tv_bound=0.0, support_margin=domain.volume / 2,
    )


def _step_data(domain: Domain1D) -> InitialData:
    # индикатор [a+0.3L, a+0.7L]: ‖u₀‖∞ = 1, TV = 2, отступ носителя 0.3L
    L = domain.volume
    left, right = domain.a + 0.3 * L, domain.a + 0.7 * L
    return InitialData(
        "step", domain,
        lambda x: ((x >= left) & (x <= right)).astype(np.float64),
        "E", linf_bound=1.0, tv_bound=2.0, support_margin=0.3 * L,
        breakpoints=(left, right),
    )


def _hat_data(domain: Domain1D) -> InitialData:
    # шапочка на [a+0.2L, a+0.8L] с вершиной 1 в середине: TV = 2, отступ 0.2L
    L = domain.volume
    mid, half = domain.a + 0.5 * L, 0.3 * L
    return InitialData(
        "hat", domain,
        lambda x: np.maximum(0.0, 1.0 - np.abs(x - mid) / half),
        "E", linf_bound=1.0, tv_bound=2.0, support_margin=0.2 * L,
        breakpoints=(mid - half, mid, mid + half),
    )


def _tent_data(domain: Domain1D) -> InitialData:
    # шапочка на всей области, u₀ = 0 на ∂Ω: W^{1,1}-полунорма 2, A = ‖u₀‖∞ + 1
    L = domain.volume
    mid = domain.a + 0.5 * L
    return InitialData(
        "tent", domain,
        lambda x: np.maximum(0.0, 1.0 - np.abs(x - mid) / (0.5 * L)),
        "F", linf_bound=1.0, tv_bound=2.0, w11_seminorm=2.0, A_bound=2.0,
        breakpoints=(mid,),
    )


def _sqrt_data(domain: Domain1D) -> InitialData:
    # u₀ = 2√((x−a)(b−x))/L: непрерывна, 0 на ∂Ω, u₀′ ~ x^{-1/2} у границы (W^{1,1}, но не W^{1,∞})
    a, b, L = domain.a, domain.b, domain.volume
    return InitialData(
        "sqrt_profile", domain,
        lambda x: 2.0 * np.sqrt(np.clip((x - a) * (b - x), 0.0, None)) / L,
        "F", linf_bound=1.0, tv_bound=2.0, w11_seminorm=2.0, A_bound=2.0,
    )


DATA = ("zero", "step", "hat", "tent", "sqrt_profile")


def make_initial_data(name: str, domain: Domain1D) -> InitialData:
    builders = {
        "zero": _zero_data,
        "step": _step_data,
        "hat": _hat_data,
        "tent": _tent_data,
        "sqrt_profile": _sqrt_data,
    }
    if name not in builders:
        raise ModelError(f"Неизвестные начальные данные {name!r}: допустимо {', '.join(DATA)} или csv")
    return builders[name](domain)


def piecewise_linear_data(domain: Domain1D, xs: np.ndarray, vs: np.ndarray, name: str = "csv") -> InitialData:
    """
    Кусочно-линейные данные по точкам излома; вне [xs[0], xs[-1]] ноль.
    Носитель строго внутри Ω → гипотеза E, иначе F (тогда нужны нули на ∂Ω).
    """
    xs = np.asarray(xs, dtype=np.float64)
    vs = np.asarray(vs, dtype=np.float64)
    if xs.ndim != 1 or xs.size < 2 or xs.shape != vs.shape:
        raise ModelError("Нужно не меньше двух точек излома одинаковой длины x и value")
    if np.any(np.diff(xs) <= 0):
        raise ModelError("Точки излома должны строго возрастать")
    if xs[0] < domain.a or xs[-1] > domain.b:
        raise ModelError("Точки излома выходят за область")

    def profile(x):
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= xs[0]) & (x <= xs[-1])
        return np.where(inside, np.interp(x, xs, vs), 0.0)

    tv = float(abs(vs[0]) + np.sum(np.abs(np.diff(vs))) + abs(vs[-1]))
    linf = float(np.max(np.abs(vs)))
    margin = float(min(xs[0] - domain.a, domain.b - xs[-1]))
    if margin > 0:
        return InitialData(
            name, domain, profile, "E", linf_bound=linf, tv_bound=tv,
            support_margin=margin, breakpoints=tuple(xs),
        )
    return InitialData(
        name, domain, profile, "F", linf_bound=linf, tv_bound=tv,
        w11_seminorm=float(np.sum(np.abs(np.diff(vs)))), A_bound=linf + 1.0,
        breakpoints=tuple(xs),
    )


def load_breakpoints_csv(path: Path, domain: Domain1D) -> InitialData:
    """Прочитать CSV точек излома (заголовок x,value) и построить кусочно-линейные данные."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"CSV точек излома не найден: {path}")
    xs, vs = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "value"} <= set(reader.fieldnames):
            raise ModelError(f"{path}: ожидался заголовок x,value")
        for row in reader:
            try:
                xs.append(float(row["x"]))
                vs.append(float(row["value"]))
            except ValueError as e:
                raise ModelError(f"{path}: не удалось разобрать строку {row}: {e}") from e
    return piecewise_linear_data(domain, np.array(xs), np.array(vs), name=path.stem)


# }}}


def _sample_interval(interval: tuple[float, float]) -> np.ndarray:
    lo, hi = interval
    pad = SAMPLE_EXPANSION * (hi - lo) / 2
    return np.linspace(lo - pad, hi + pad, SAMPLE_POINTS)


def validate_hypothesis(flux: FluxModel, visc: ViscosityModel, data: InitialData) -> HypothesisReport:
    """
    Проверить гипотезу E или F выборкой (10⁴ точек на I, расширенном на 10%).
    Не бросает исключений: нарушения попадают в отчёт.
    """
    clauses: dict[str, ClauseResult] = {}
    ys = _sample_interval(data.interval)

    fp = np.abs(np.asarray(flux.f_prime(ys), dtype=np.float64))
    sup_fp = float(np.max(fp)) if fp.size else 0.0
    ok = np.isfinite(flux.lipschitz_bound) and sup_fp <= flux.lipschitz_bound * (1 + SAMPLE_RTOL) + 1e-14
    clauses["flux_lipschitz"] = ClauseResult(
        bool(ok), "ok" if ok else f"sup|f′|={sup_fp:.6g} > lipschitz_bound={flux.lipschitz_bound:.6g}", sup_fp
    )
    fv = np.asarray(flux.f(ys), dtype=np.float64)
    jumps = np.abs(np.diff(fv))
    allowed = sup_fp * np.diff(ys) * (1 + 1e-6) + 1e-12
    ok = bool(np.all(np.isfinite(fv)) and np.all(jumps <= allowed))
    clauses["flux_continuity"] = ClauseResult(ok, "ok" if ok else "f разрывна на выборке", float(np.max(jumps)))

    bv = np.asarray(visc.B(ys), dtype=np.float64)
    b_min = float(np.min(bv))
    ok = visc.r_lower > 0 and b_min >= visc.r_lower * (1 - SAMPLE_RTOL)
    clauses["viscosity_lower_bound"] = ClauseResult(
        bool(ok), "ok" if ok else f"B ≥ r violated: min B={b_min:.6g}, r={visc.r_lower:.6g}", b_min
    )
    b_max = float(np.max(np.abs(bv)))
    ok = b_max <= visc.B_sup * (1 + SAMPLE_RTOL)
    clauses["viscosity_sup"] = ClauseResult(
        bool(ok), "ok" if ok else f"|B|={b_max:.6g} > B_sup={visc.B_sup:.6g}", b_max
    )

    xs = np.linspace(data.domain.a, data.domain.b, SAMPLE_POINTS)
    u = data(xs)
    u_max = float(np.max(np.abs(u)))
    ok = u_max <= data.linf_bound * (1 + SAMPLE_RTOL) + 1e-14
    clauses["data_linf"] = ClauseResult(
        bool(ok), "ok" if ok else f"‖u₀‖∞={u_max:.6g} > linf_bound={data.linf_bound:.6g}", u_max
    )

    if data.hypothesis == "E":
        margin = data.support_margin
        near = (xs <= data.domain.a + margin * (1 - 1e-9)) | (xs >= data.domain.b - margin * (1 - 1e-9))
        ok = margin > 0 and not np.any(u[near] != 0.0)
        clauses["data_support"] = ClauseResult(
            bool(ok), "ok" if ok else f"носитель u₀ не отделён от ∂Ω (margin={margin:.6g})", margin
        )
        tv = float(np.sum(np.abs(np.diff(np.concatenate([[0.0], u, [0.0]])))))
        ok = tv <= data.tv_bound * (1 + SAMPLE_RTOL) + 1e-12
        clauses["data_tv"] = ClauseResult(
            bool(ok), "ok" if ok else f"TV(u₀)={tv:.6g} > tv_bound={data.tv_bound:.6g}", tv
        )
    else:
        edge = float(max(abs(float(data.profile(np.array([data.domain.a]))[0])),
                         abs(float(data.profile(np.array([data.domain.b]))[0]))))
        ok = edge <= 1e-12
        clauses["data_boundary_zero"] = ClauseResult(
            bool(ok), "ok" if ok else f"u₀ ≠ 0 на ∂Ω: {edge:.6g}", edge
        )
        semi = data.w11_seminorm
        ok = semi is not None and np.isfinite(semi)
        clauses["data_w11"] = ClauseResult(bool(ok), "ok" if ok else "W^{1,1}-полунорма не задана", semi or float("nan"))
        a_bound = data.A_bound
        ok = a_bound is not None and u_max <= a_bound
        clauses["data_A_bound"] = ClauseResult(
            bool(ok), "ok" if ok else f"‖u₀‖∞ > A={a_bound}", a_bound or float("nan")
        )

    report = HypothesisReport(data.hypothesis, clauses)
    if report.passed:
        logger.debug("Гипотеза %s выполнена: flux=%s visc=%s data=%s", data.hypothesis, flux.name, visc.name, data.name)
    else:
        logger.warning("Гипотеза %s нарушена: %s", data.hypothesis, "; ".join(report.failures))
    return report
