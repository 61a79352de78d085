"""Ограниченные области, равномерные сетки, сеточные функции и дискретные нормы на Ω и Ω_T."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid


class GridError(ValueError):
    """Нарушен инвариант области, сетки или сеточной функции."""


@dataclass(frozen=True)
class Domain1D:
    """Интервал Ω = (a, b)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise GridError(f"Нужно a < b, получено a={self.a}, b={self.b}")

    @property
    def volume(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class Grid:
    """Равномерная сетка из n_cells ячеек на области."""

    domain: Domain1D
    n_cells: int

    def __post_init__(self) -> None:
        if self.n_cells < 1:
            raise GridError(f"n_cells должен быть положительным, получено {self.n_cells}")

    @property
    def h(self) -> float:
        return self.domain.volume / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.domain.a + (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return self.domain.a + np.arange(self.n_cells + 1) * self.h

    def refined(self, factor: int) -> "Grid":
        """Сетка в factor раз мельче на той же области."""
        if factor < 1:
            raise GridError(f"factor должен быть положительным, получено {factor}")
        return Grid(self.domain, self.n_cells * factor)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Средние по ячейкам значения u на сетке."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.n_cells,):
            raise GridError(
                f"Ожидалось {self.grid.n_cells} значений, получено {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("Сеточная функция содержит нечисловые значения")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.n_cells))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> "ScalarField":
        """Поточечная выборка func в центрах ячеек."""
        return cls(grid, np.asarray(func(grid.centers), dtype=np.float64))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def coarsened(self, factor: int) -> "ScalarField":
        """Осреднение по блокам из factor ячеек (обратная операция к Grid.refined)."""
        if factor < 1 or self.grid.n_cells % factor:
            raise GridError(f"n_cells={self.grid.n_cells} не делится на {factor}")
        coarse = Grid(self.grid.domain, self.grid.n_cells // factor)
        return ScalarField(coarse, self.values.reshape(-1, factor).mean(axis=1))


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Срезы u(·, t_k) на общей сетке; times[0] = 0, times[-1] = T."""

    grid: Grid
    times: np.ndarray
    slices: tuple[ScalarField, ...]

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        if times.ndim != 1 or times.size == 0:
            raise GridError("times должен быть непустым вектором")
        if times[0] != 0.0:
            raise GridError(f"times[0] должен быть 0, получено {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise GridError("times должен строго возрастать")
        if len(self.slices) != times.size:
            raise GridError(f"Срезов {len(self.slices)}, моментов времени {times.size}")
        for s in self.slices:
            if s.grid != self.grid:
                raise GridError("Все срезы должны лежать на общей сетке")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "slices", tuple(self.slices))

    @classmethod
    def from_array(cls, grid: Grid, times: np.ndarray, values: np.ndarray) -> "SpaceTimeField":
        """values: массив формы (len(times), n_cells)."""
        values = np.asarray(values, dtype=np.float64)
        return cls(grid, times, tuple(ScalarField(grid, row) for row in values))

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def as_array(self) -> np.ndarray:
        return np.stack([s.values for s in self.slices])

    @property
    def initial(self) -> ScalarField:
        return self.slices[0]

    @property
    def final(self) -> ScalarField:
        return self.slices[-1]


def norm_l1(field: ScalarField) -> float:
    """‖u‖_{L¹(Ω)} = h·Σ|u_i|."""
    return float(field.grid.h * np.sum(np.abs(field.values)))


def norm_l2_sq(field: ScalarField) -> float:
    """‖u‖²_{L²(Ω)} = h·Σu_i²."""
    return float(field.grid.h * np.sum(field.values**2))


def norm_linf(field: ScalarField) -> float:
    """‖u‖_{L∞(Ω)} = max|u_i|."""
    return float(np.max(np.abs(field.values)))


def integrate_time(stf: SpaceTimeField, slice_functional: Callable[[ScalarField], float]) -> float:
    """Интеграл по времени (трапеции) от функционала, вычисленного на каждом срезе."""
    if len(stf.slices) < 2:
        raise GridError("Для интегрирования по времени нужно не меньше двух срезов")
    samples = np.array([slice_functional(s) for s in stf.slices], dtype=np.float64)
    return float(trapezoid(samples, stf.times))


def l1_distance(stf_a: SpaceTimeField, stf_b: SpaceTimeField) -> float:
    """‖u − v‖_{L¹(Ω_T)} для двух полей на одной сетке с одинаковыми моментами времени."""
    if stf_a.grid != stf_b.grid or not np.array_equal(stf_a.times, stf_b.times):
        raise GridError("Поля должны иметь общую сетку и общие моменты времени")
    diff = np.abs(stf_a.as_array() - stf_b.as_array()).sum(axis=1) * stf_a.grid.h
    return float(trapezoid(diff, stf_a.times))


def resample_times(stf: SpaceTimeField, times: np.ndarray) -> SpaceTimeField:
    """Линейная интерполяция срезов по времени на заданные моменты внутри [0, T]."""
    times = np.asarray(times, dtype=np.float64)
    if times[0] < 0 or times[-1] > stf.T * (1 + 1e-12):
        raise GridError("Моменты времени выходят за [0, T]")
    data = stf.as_array()
    idx = np.clip(np.searchsorted(stf.times, times, side="right") - 1, 0, len(stf.times) - 2)
    t0 = stf.times[idx]
    t1 = stf.times[idx + 1]
    w = np.clip((times - t0) / (t1 - t0), 0.0, 1.0)[:, None]
    values = (1 - w) * data[idx] + w * data[idx + 1]
    return SpaceTimeField.from_array(stf.grid, times, values)
