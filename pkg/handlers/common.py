"""Общие функции обработчиков: сборка моделей из конфигурации, проверка гипотез, запись артефактов."""

import logging
from dataclasses import dataclass
from pathlib import Path

import storage
from config import ConfigError, RunConfig
from grid_field import Domain1D, Grid, SpaceTimeField
from models import (
    FluxModel,
    HypothesisReport,
    InitialData,
    ViscosityModel,
    load_breakpoints_csv,
    make_flux,
    make_initial_data,
    make_viscosity,
    validate_hypothesis,
)
from utils.logging_setup import context_str

logger = logging.getLogger(__name__)

# Коды выхода CLI
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ESTIMATE_FAILED = 2

# Имена файлов артефактов в папке вывода
FIELD_CSV = "field.csv"
SLICES_CSV = "slices.csv"
DIAGNOSTICS_CSV = "diagnostics.csv"
REPORTS_CSV = "reports.csv"
DETAILS_CSV = "details.csv"
BOUNDS_CSV = "bounds.csv"
W11_CSV = "w11.csv"
META_CSV = "meta.csv"
SWEEP_REPORT_CSV = "sweep_report.csv"
CONVERGENCE_CSV = "convergence.csv"
ENTROPY_CSV = "entropy.csv"


@dataclass(frozen=True, eq=False)
class Problem:
    """Модель задачи, собранная из конфигурации запуска."""

    cfg: RunConfig
    domain: Domain1D
    data: InitialData
    flux: FluxModel
    visc: ViscosityModel

    @property
    def grid(self) -> Grid:
        return Grid(self.domain, self.cfg.n_cells)


def build_data(cfg: RunConfig, domain: Domain1D) -> InitialData:
    """Данные из каталога по имени или из CSV точек излома (data = csv, data_csv = путь)."""
    if cfg.data == "csv":
        if cfg.data_csv is None:
            raise ConfigError("data = csv требует ключ data_csv")
        return load_breakpoints_csv(cfg.data_csv, domain)
    return make_initial_data(cfg.data, domain)


def build_problem(cfg: RunConfig) -> Problem:
    domain = Domain1D(cfg.domain_a, cfg.domain_b)
    data = build_data(cfg, domain)
    flux = make_flux(cfg.flux, data.interval, cfg.flux_speed)
    visc = make_viscosity(cfg.viscosity)
    return Problem(cfg, domain, data, flux, visc)


def require_hypothesis(problem: Problem) -> HypothesisReport:
    """Проверить гипотезу E/F; при нарушении ConfigError со списком нарушенных пунктов."""
    report = validate_hypothesis(problem.flux, problem.visc, problem.data)
    if not report.passed:
        raise ConfigError(f"Гипотеза {report.hypothesis} не выполнена: " + "; ".join(report.failures))
    return report


def output_dir(cfg: RunConfig, override: Path | None = None) -> Path:
    out = Path(override) if override is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_meta(problem: Problem, **extra: object) -> dict[str, object]:
    """Метаданные, по которым verify восстанавливает поток и область."""
    cfg = problem.cfg
    lo, hi = problem.data.interval
    meta: dict[str, object] = {
        "flux": cfg.flux,
        "flux_speed": cfg.flux_speed,
        "viscosity": cfg.viscosity,
        "data": problem.data.name,
        "hypothesis": problem.data.hypothesis,
        "domain_a": cfg.domain_a,
        "domain_b": cfg.domain_b,
        "n_cells": cfg.n_cells,
        "T": cfg.T,
        "interval_lo": lo,
        "interval_hi": hi,
        "c_tol": cfg.c_tol,
    }
    meta.update(extra)
    return meta


def write_solution(out: Path, stf: SpaceTimeField, meta: dict[str, object]) -> None:
    storage.write_slices_csv(out / SLICES_CSV, stf)
    storage.write_field_csv(out / FIELD_CSV, stf.final)
    storage.write_meta_csv(out / META_CSV, meta)


def load_solution(in_dir: Path) -> tuple[SpaceTimeField, FluxModel, dict[str, str]]:
    """Прочитать срезы и восстановить поток по meta.csv."""
    in_dir = Path(in_dir)
    meta = storage.read_meta_csv(in_dir / META_CSV)
    try:
        domain = Domain1D(float(meta["domain_a"]), float(meta["domain_b"]))
        interval = (float(meta["interval_lo"]), float(meta["interval_hi"]))
        flux = make_flux(meta["flux"], interval, float(meta.get("flux_speed") or 1.0))
    except (KeyError, ValueError) as e:
        raise ConfigError(f"{in_dir / META_CSV}: неполные метаданные: {e}") from e
    stf = storage.read_slices_csv(in_dir / SLICES_CSV, domain)
    logger.info("Загружено решение: %s", context_str(dir=in_dir, slices=len(stf.times), n_cells=stf.grid.n_cells))
    return stf, flux, meta


def exit_code(passed: bool) -> int:
    return EXIT_OK if passed else EXIT_ESTIMATE_FAILED
