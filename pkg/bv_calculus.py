"""
Дискретная полная вариация, семейство приближённых сигнумов sg_n
и BV-функционалы на Ω_T для проверки оценок.
"""

from dataclasses import dataclass

import numpy as np

from grid_field import GridError, ScalarField, SpaceTimeField, integrate_time


@dataclass(frozen=True)
class SgApprox:
    """sg_n(s) = clip(n·s, −1, 1): нечётная, неубывающая, n-липшицева."""

    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n должен быть натуральным, получено {self.n}")

    def __call__(self, s):
        return sg_n_eval(self.n, s)


def sg_n_eval(n: int, s):
    """1 при s > 1/n, n·s при |s| ≤ 1/n, −1 при s < −1/n."""
    out = np.clip(n * np.asarray(s, dtype=np.float64), -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sg_eval(s):
    """Сигнум со значением 0 в нуле."""
    out = np.sign(np.asarray(s, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def _padded(field: ScalarField) -> np.ndarray:
    # нулевое внешнее продолжение (однородные данные Дирихле)
    return np.concatenate(([0.0], field.values, [0.0]))


def total_variation(field: ScalarField) -> float:
    """Σ|u_{i+1} − u_i| плюс скачки |u_0| и |u_{n−1}| на границе против нулевого продолжения."""
    return float(np.sum(np.abs(np.diff(_padded(field)))))


def laplacian_l1(field: ScalarField) -> float:
    """Дискретная ‖u″‖_{L¹(Ω)} = Σ|u_{i+1} − 2u_i + u_{i−1}|/h с нулевыми фиктивными ячейками."""
    return float(np.sum(np.abs(np.diff(_padded(field), n=2))) / field.grid.h)


def space_bv_l1(stf: SpaceTimeField) -> float:
    """‖u_x‖_{L¹(Ω_T)}: интеграл по времени (трапеции) от TV срезов."""
    return integrate_time(stf, total_variation)


def time_deriv_l1(stf: SpaceTimeField) -> float:
    """‖u_t‖_{L¹(Ω_T)} по первым разностям между сохранёнными срезами: h·Σ_i Σ_k |u_{i,k+1} − u_{i,k}|."""
    if len(stf.slices) < 2:
        raise GridError("Для производной по времени нужно не меньше двух срезов")
    return float(stf.grid.h * np.sum(np.abs(np.diff(stf.as_array(), axis=0))))


def tv_space_time(stf: SpaceTimeField) -> float:
    """TV_{Ω_T}(u) = ‖u_t‖_{L¹(Ω_T)} + ‖u_x‖_{L¹(Ω_T)}."""
    return time_deriv_l1(stf) + space_bv_l1(stf)


def sup_slice_tv(stf: SpaceTimeField) -> float:
    """sup_t TV(u(·, t)) по сохранённым срезам."""
    return max(total_variation(s) for s in stf.slices)
