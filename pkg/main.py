"""Точка входа: CLI viscoflow (prepare, solve, reference, sweep, verify)."""

import argparse
import logging
import sys
from typing import Callable, Sequence

from config import ConfigError
from entropy_residual import EntropyError
from estimates import SweepError
from grid_field import GridError
from handlers.commands import (
    prepare_command,
    reference_command,
    solve_command,
    sweep_command,
    verify_command,
)
from handlers.common import EXIT_ESTIMATE_FAILED, EXIT_USAGE
from models import ModelError
from mollify import MollifyError
from reference_oracle import OracleError
from storage import StorageError
from utils.logging_setup import setup_logging
from version import __version__
from viscous_solver import SolverError

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Ошибка разбора аргументов командной строки."""


class _Parser(argparse.ArgumentParser):
    """argparse без sys.exit(2): ошибки использования дают код 1."""

    def error(self, message: str) -> None:
        raise UsageError(message)


def _add_config(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--config", required=required, help="файл конфигурации запуска (key = value)")
    p.add_argument("--out", default=None, help="папка для CSV-артефактов")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="viscoflow", description="Вязкие приближения скалярных законов сохранения")
    parser.add_argument("--version", action="version", version=f"viscoflow {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("prepare", help="сгладить начальные данные и проверить оценки сглаживания")
    _add_config(p, required=False)
    p.add_argument("--hypothesis", choices=("E", "F"), default=None)
    p.add_argument("--data", default=None, help="имя данных из каталога или csv")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-cells", dest="n_cells", type=int, default=None)
    p.set_defaults(handler=prepare_command)

    p = sub.add_parser("solve", help="вязкое решение при одном ε и отчёты об оценках")
    _add_config(p, required=True)
    p.set_defaults(handler=solve_command)

    p = sub.add_parser("reference", help="эталонное энтропийное решение схемой Годунова")
    _add_config(p, required=True)
    p.set_defaults(handler=reference_command)

    p = sub.add_parser("sweep", help="свип по eps_list: оценки, сходимость, энтропийная проверка")
    _add_config(p, required=True)
    p.set_defaults(handler=sweep_command)

    p = sub.add_parser("verify", help="энтропийная проверка сохранённого решения")
    p.add_argument("--in", dest="in_dir", required=True, help="папка с slices.csv и meta.csv")
    p.add_argument("--report", default=None, help="куда писать entropy.csv (относительно --in)")
    p.add_argument("--c-tol", dest="c_tol", type=float, default=None)
    p.set_defaults(handler=verify_command)
    return parser


# Ошибки входных данных и прерванные расчёты: код 1
_USAGE_ERRORS = (
    ConfigError,
    FileNotFoundError,
    StorageError,
    GridError,
    ModelError,
    MollifyError,
    OracleError,
    SolverError,
    SweepError,
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"viscoflow: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging()
    handler: Callable[[argparse.Namespace], int] = args.handler
    logger.info("viscoflow %s: команда %s", __version__, args.command)
    try:
        return handler(args)
    except EntropyError as e:
        # Предел не сертифицируется (например, нет сходимости по Коши)
        logger.error("Энтропийная проверка не пройдена: %s", e)
        print(f"viscoflow: {e}", file=sys.stderr)
        return EXIT_ESTIMATE_FAILED
    except _USAGE_ERRORS as e:
        logger.error("Команда %s прервана: %s", args.command, e)
        print(f"viscoflow: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
