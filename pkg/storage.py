"""Работа с CSV-артефактами: поля, срезы, диагностика шагов, отчёты об оценках и метаданные запуска."""

import csv
import logging
from pathlib import Path
from typing import Iterable

import numpy as np

from grid_field import Domain1D, Grid, ScalarField, SpaceTimeField

logger = logging.getLogger(__name__)

# Все числа пишутся с полной точностью, чтобы повторные запуски давали побайтно одинаковые файлы
FLOAT_FORMAT = "%.17g"

FIELD_HEADER = ("x", "value")
SLICES_HEADER = ("t", "x", "value")
DIAGNOSTICS_HEADER = ("step", "t", "mass", "linf")
REPORT_HEADER = ("eps", "estimate", "lhs", "rhs", "tol", "pass")
DETAILS_HEADER = ("eps", "estimate", "key", "value")
BOUNDS_HEADER = ("eps", "sup_ratio", "tv_ratio", "c_eps")
CONVERGENCE_HEADER = ("eps", "cauchy_l1", "oracle_l1")
ENTROPY_HEADER = ("kind", "k", "testfn_id", "residual", "tolerance", "pass")
W11_HEADER = ("eps", "linf", "A", "w11_error")
META_HEADER = ("key", "value")


class StorageError(ValueError):
    """Файл артефакта отсутствует или имеет неожиданный формат."""


def fmt(value: float | int | str | None) -> str:
    """Число с полной точностью; None даёт пустую ячейку."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_rows(path: Path, header: Iterable[str], rows: Iterable[Iterable[object]]) -> Path:
    """Записать CSV с заголовком; создаёт папку при необходимости."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            count += 1
    logger.debug("Записан %s (%d строк)", path, count)
    return path


def read_rows(path: Path, header: Iterable[str]) -> list[dict[str, str]]:
    """Прочитать CSV и проверить, что в заголовке есть все нужные колонки."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Файл не найден: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(header) - set(reader.fieldnames or ())
        if missing:
            raise StorageError(f"{path}: нет колонок {', '.join(sorted(missing))}")
        return list(reader)


# {{{ поля


def write_field_csv(path: Path, field: ScalarField) -> Path:
    return write_rows(path, FIELD_HEADER, zip(field.grid.centers, field.values))


def _grid_from_centers(xs: np.ndarray, domain: Domain1D | None) -> Grid:
    if domain is not None:
        return Grid(domain, xs.size)
    if xs.size < 2:
        raise StorageError("Без области нужно не меньше двух ячеек, чтобы восстановить сетку")
    h = float(xs[1] - xs[0])
    return Grid(Domain1D(float(xs[0] - h / 2), float(xs[-1] + h / 2)), xs.size)


def read_field_csv(path: Path, domain: Domain1D | None = None) -> ScalarField:
    rows = read_rows(path, FIELD_HEADER)
    try:
        xs = np.array([float(r["x"]) for r in rows])
        values = np.array([float(r["value"]) for r in rows])
    except ValueError as e:
        raise StorageError(f"{path}: не удалось разобрать число: {e}") from e
    return ScalarField(_grid_from_centers(xs, domain), values)


def write_slices_csv(path: Path, stf: SpaceTimeField) -> Path:
    """Срезы в длинном формате t,x,value."""
    xs = stf.grid.centers

    def rows():
        for t, s in zip(stf.times, stf.slices):
            for x, v in zip(xs, s.values):
                yield (t, x, v)

    return write_rows(path, SLICES_HEADER, rows())


def read_slices_csv(path: Path, domain: Domain1D | None = None) -> SpaceTimeField:
    rows = read_rows(path, SLICES_HEADER)
    try:
        data = np.array([[float(r["t"]), float(r["x"]), float(r["value"])] for r in rows])
    except ValueError as e:
        raise StorageError(f"{path}: не удалось разобрать число: {e}") from e
    if data.size == 0:
        raise StorageError(f"{path}: нет срезов")
    times, first = np.unique(data[:, 0], return_index=True)
    n_cells = data.shape[0] // times.size
    if n_cells * times.size != data.shape[0]:
        raise StorageError(f"{path}: срезы разной длины")
    order = np.argsort(first)
    if not np.all(np.diff(first[order]) == n_cells):
        raise StorageError(f"{path}: строки одного среза должны идти подряд")
    xs = data[:n_cells, 1]
    grid = _grid_from_centers(xs, domain)
    values = data[:, 2].reshape(times.size, n_cells)
    return SpaceTimeField.from_array(grid, data[::n_cells, 0], values)


# }}}


# {{{ отчёты


def write_diagnostics_csv(path: Path, records) -> Path:
    return write_rows(path, DIAGNOSTICS_HEADER, ((r.step, r.t, r.mass, r.linf) for r in records))


def write_reports_csv(path: Path, rows) -> Path:
    """rows: пары (ε или None, EstimateReport); None пишется как all (сводные отчёты свипа)."""
    return write_rows(
        path,
        REPORT_HEADER,
        (("all" if eps is None else eps, r.name, r.lhs, r.rhs, r.tolerance, r.passed) for eps, r in rows),
    )


def write_details_csv(path: Path, rows) -> Path:
    """Информационные измерения из EstimateReport.details, ключи по алфавиту."""

    def flat():
        for eps, r in rows:
            for key in sorted(r.details):
                yield ("all" if eps is None else eps, r.name, key, r.details[key])

    return write_rows(path, DETAILS_HEADER, flat())


def write_bounds_csv(path: Path, rows) -> Path:
    return write_rows(path, BOUNDS_HEADER, ((r.eps, r.sup_ratio, r.tv_ratio, r.c_eps) for r in rows))


def write_convergence_csv(path: Path, sweep) -> Path:
    """Строка на каждый ε: разность Коши с следующим ε (у последнего пусто) и расстояние до эталона."""

    def rows():
        for j, eps in enumerate(sweep.eps_list):
            cauchy = sweep.cauchy_l1[j] if j < len(sweep.cauchy_l1) else None
            oracle = sweep.oracle_l1[j] if j < len(sweep.oracle_l1) else None
            yield (eps, cauchy, oracle)

    return write_rows(path, CONVERGENCE_HEADER, rows())


def write_entropy_csv(path: Path, report) -> Path:
    return write_rows(
        path,
        ENTROPY_HEADER,
        ((r.kind, None if np.isnan(r.k) else r.k, r.testfn_id, r.residual, r.tolerance, r.passed) for r in report.rows),
    )


def write_w11_csv(path: Path, rows: Iterable[tuple[float, float, float, float]]) -> Path:
    return write_rows(path, W11_HEADER, rows)


# }}}


def write_meta_csv(path: Path, meta: dict[str, object]) -> Path:
    """Метаданные запуска key,value; по ним verify восстанавливает модель."""
    return write_rows(path, META_HEADER, sorted(meta.items()))


def read_meta_csv(path: Path) -> dict[str, str]:
    return {r["key"]: r["value"] for r in read_rows(path, META_HEADER)}
