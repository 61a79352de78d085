"""
Независимые эталоны энтропийного решения u_t + f(u)_x = 0 на ограниченной области:
точные задачи Римана для выпуклого потока и схема Годунова на мелкой сетке
с нулевыми фиктивными состояниями на границе.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from grid_field import Grid, GridError, SpaceTimeField
from models import FluxModel, InitialData
from utils.logging_setup import context_str
from viscous_solver import check_convex, godunov_flux, sonic_point

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_SLICES = 201
# Подточек на ячейку при осреднении точного решения
SUBSAMPLES = 8


class OracleError(RuntimeError):
    """Эталон не может быть построен: невыпуклый поток, взаимодействие волн или нарушение CFL."""


@dataclass(frozen=True, eq=False)
class RiemannSolution:
    """
    Автомодельное решение задачи Римана с разрывом в точке x0 при t = 0.
    Для ударной волны speed: скорость Ранкина–Гюгонио; для волны разрежения fan = (f′(uL), f′(uR)).
    """

    flux: FluxModel
    u_left: float
    u_right: float
    wave: str
    x0: float = 0.0
    speed: float = 0.0
    fan: tuple[float, float] = (0.0, 0.0)

    @property
    def zone(self) -> tuple[float, float]:
        """Границы возмущённой зоны по скорости x/t."""
        if self.wave == "rarefaction":
            return self.fan
        return (self.speed, self.speed)

    def _inverse_speed(self, xi: float) -> float:
        # f′(u) = xi на [uL, uR]; f′ возрастает (выпуклый поток)
        return float(brentq(
            lambda u: float(self.flux.f_prime(np.float64(u))) - xi,
            self.u_left, self.u_right, xtol=1e-14,
        ))

    def __call__(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        shape = x.shape
        x = x.reshape(-1)
        if t <= 0:
            return np.where(x < self.x0, self.u_left, self.u_right).reshape(shape)
        xi = (x - self.x0) / t
        if self.wave == "constant":
            out = np.full_like(x, self.u_left)
        elif self.wave == "shock":
            out = np.where(xi < self.speed, self.u_left, self.u_right)
        else:
            lo, hi = self.fan
            out = np.where(xi <= lo, self.u_left, self.u_right)
            inside = (xi > lo) & (xi < hi)
            out[inside] = [self._inverse_speed(v) for v in xi[inside]]
        return out.reshape(shape)


def solve_riemann(flux: FluxModel, uL: float, uR: float, x0: float = 0.0) -> RiemannSolution:
    """Ударная волна при uL > uR, волна разрежения при uL < uR, константа при равенстве."""
    uL, uR = float(uL), float(uR)
    if uL == uR:
        return RiemannSolution(flux, uL, uR, "constant", x0, float(flux.f_prime(np.float64(uL))))
    lo, hi = min(uL, uR), max(uL, uR)
    if not check_convex(flux, (lo, hi)):
        raise OracleError(f"Поток {flux.name!r} не выпукл на [{lo}, {hi}]")
    if uL > uR:
        speed = (float(flux.f(np.float64(uL))) - float(flux.f(np.float64(uR)))) / (uL - uR)
        return RiemannSolution(flux, uL, uR, "shock", x0, speed)
    fan = (float(flux.f_prime(np.float64(uL))), float(flux.f_prime(np.float64(uR))))
    return RiemannSolution(flux, uL, uR, "rarefaction", x0, fan=fan)


@dataclass(frozen=True, eq=False)
class RiemannComposite:
    """Несколько невзаимодействующих задач Римана из кусочно-постоянных данных (x0 по возрастанию)."""

    waves: tuple[RiemannSolution, ...]
    left_state: float

    def check_separated(self, t: float) -> None:
        for prev, nxt in zip(self.waves, self.waves[1:]):
            if prev.x0 + prev.zone[1] * t > nxt.x0 + nxt.zone[0] * t:
                raise OracleError(
                    f"Волны из x0={prev.x0:.6g} и x0={nxt.x0:.6g} взаимодействуют к моменту t={t:.6g}"
                )

    def __call__(self, x, t: float) -> np.ndarray:
        self.check_separated(t)
        x = np.asarray(x, dtype=np.float64)
        out = np.full_like(x, self.left_state)
        for wave in self.waves:
            # правее левой границы зоны значение задаёт эта волна (или её правое состояние)
            reach = x >= wave.x0 + wave.zone[0] * max(t, 0.0)
            out = np.where(reach, wave(x, t), out)
        return out

    def cell_averages(self, grid: Grid, t: float) -> np.ndarray:
        """Средние по ячейкам через SUBSAMPLES равномерных подточек."""
        offsets = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES - 0.5
        points = grid.centers[:, None] + offsets[None, :] * grid.h
        return self(points, t).mean(axis=1)

    def space_time_field(self, grid: Grid, times: np.ndarray) -> SpaceTimeField:
        times = np.asarray(times, dtype=np.float64)
        return SpaceTimeField.from_array(grid, times, np.array([self.cell_averages(grid, t) for t in times]))


def compose_riemann(flux: FluxModel, jumps: np.ndarray, states: np.ndarray) -> RiemannComposite:
    """
    Точное решение для кусочно-постоянных данных: states[j]: значение между jumps[j−1] и jumps[j]
    (states[0] левее первого скачка). Действительно, пока волны соседних скачков не пересеклись.
    """
    jumps = np.asarray(jumps, dtype=np.float64)
    states = np.asarray(states, dtype=np.float64)
    if states.size != jumps.size + 1:
        raise OracleError(f"Нужно {jumps.size + 1} состояний для {jumps.size} скачков, получено {states.size}")
    if np.any(np.diff(jumps) <= 0):
        raise OracleError("Точки скачков должны строго возрастать")
    waves = tuple(
        solve_riemann(flux, states[j], states[j + 1], x0=float(jumps[j])) for j in range(jumps.size)
    )
    return RiemannComposite(waves, float(states[0]))


def riemann_data(u0: InitialData) -> tuple[np.ndarray, np.ndarray]:
    """Скачки и состояния кусочно-постоянных данных по их точкам негладкости."""
    a, b = u0.domain.a, u0.domain.b
    jumps = np.array(sorted(p for p in u0.breakpoints if a < p < b), dtype=np.float64)
    edges = np.concatenate(([a], jumps, [b]))
    states = []
    for left, right in zip(edges, edges[1:]):
        sample = u0(np.linspace(left, right, 9)[1:-1])
        if np.ptp(sample) > 0:
            raise OracleError(f"Данные {u0.name!r} не кусочно-постоянны на ({left:.6g}, {right:.6g})")
        states.append(float(sample[0]))
    return jumps, np.array(states)


# {{{ схема Годунова


@dataclass(frozen=True, eq=False)
class GodunovRun:
    """Эталонное решение и накопленный поток массы через границу к каждому сохранённому моменту."""

    solution: SpaceTimeField
    boundary_outflow: np.ndarray
    steps: int

    @property
    def masses(self) -> np.ndarray:
        return self.solution.as_array().sum(axis=1) * self.solution.grid.h


def godunov_run(
    flux: FluxModel,
    u0: InitialData,
    fine_cells: int,
    T: float,
    times: np.ndarray | None = None,
    cfl: float = 0.9,
) -> GodunovRun:
    """
    Схема Годунова первого порядка для u_t + f(u)_x = 0 на fine_cells ячейках,
    фиктивные состояния 0 и поток Годунова на граничных гранях. Шаг подгоняется под моменты вывода.
    """
    if not 0 < cfl <= 1:
        raise OracleError(f"Нарушено условие CFL: cfl={cfl} вне (0, 1]")
    if T <= 0:
        raise OracleError(f"T должен быть положительным, получено {T}")
    grid = Grid(u0.domain, fine_cells)
    if times is None:
        times = np.linspace(0.0, T, DEFAULT_OUTPUT_SLICES)
    times = np.asarray(times, dtype=np.float64)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0) or abs(times[-1] - T) > 1e-12 * max(T, 1.0):
        raise OracleError("Моменты вывода должны начинаться с 0, строго возрастать и заканчиваться на T")

    interval = u0.interval
    if flux.interval is not None:
        interval = (min(interval[0], flux.interval[0]), max(interval[1], flux.interval[1]))
    if not check_convex(flux, interval):
        raise OracleError(f"Эталон Годунова требует выпуклого потока, {flux.name!r} не выпукл")
    numerical = godunov_flux(flux, sonic_point(flux, interval))
    h = grid.h
    dt_max = cfl * h / flux.lipschitz_bound if flux.lipschitz_bound > 0 else T

    u = np.array(u0.cell_averages(grid).values)
    padded = np.zeros(fine_cells + 2)
    slices = [u.copy()]
    outflow = [0.0]
    cumulative = 0.0
    t = 0.0
    steps = 0
    for target in times[1:]:
        while t < target:
            dt = min(dt_max, target - t)
            padded[1:-1] = u
            F = numerical(padded[:-1], padded[1:])
            u = u - (dt / h) * (F[1:] - F[:-1])
            # масса уходит через правую грань и входит через левую
            cumulative += dt * (F[-1] - F[0])
            t = target if target - t <= dt else t + dt
            steps += 1
        slices.append(u.copy())
        outflow.append(cumulative)

    solution = SpaceTimeField.from_array(grid, times, np.array(slices))
    logger.info(
        "Эталон Годунова: %s",
        context_str(flux=flux.name, data=u0.name, fine_cells=fine_cells, T=T, steps=steps),
    )
    return GodunovRun(solution, np.array(outflow), steps)


def godunov_reference(
    flux: FluxModel,
    u0: InitialData,
    fine_cells: int,
    T: float,
    times: np.ndarray | None = None,
) -> SpaceTimeField:
    """Эталонное энтропийное решение на мелкой сетке (вязкость не учитывается)."""
    return godunov_run(flux, u0, fine_cells, T, times).solution


def restrict(stf: SpaceTimeField, factor: int) -> SpaceTimeField:
    """Осреднить каждый срез по блокам из factor ячеек."""
    if factor < 1 or stf.grid.n_cells % factor:
        raise GridError(f"n_cells={stf.grid.n_cells} не делится на {factor}")
    coarse = Grid(stf.grid.domain, stf.grid.n_cells // factor)
    data = stf.as_array().reshape(len(stf.times), coarse.n_cells, factor).mean(axis=2)
    return SpaceTimeField.from_array(coarse, stf.times, data)


def reference_on_grid(
    flux: FluxModel,
    u0: InitialData,
    grid: Grid,
    T: float,
    fine_factor: int = 8,
    times: np.ndarray | None = None,
) -> SpaceTimeField:
    """Эталон на сетке в fine_factor раз мельче, осреднённый обратно на grid."""
    if fine_factor < 8:
        logger.warning("fine_factor=%d < 8: эталон может не быть заметно точнее решателя", fine_factor)
    if grid.domain != u0.domain:
        raise OracleError("Сетка и данные заданы на разных областях")
    fine = godunov_reference(flux, u0, grid.n_cells * fine_factor, T, times)
    return restrict(fine, fine_factor)


# }}}
