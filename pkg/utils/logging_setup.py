"""
Настройка логирования: консоль + файл с ротацией по дням.
Без внешних зависимостей, только стандартный logging.
"""

import logging
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

import config

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
LOG_FILE_NAME = "viscoflow.log"


def setup_logging(log_dir: Path | None = None) -> None:
    """
    Настраивает root logger: консоль + файл с ротацией по дням.
    Создаёт папку логов при необходимости (по умолчанию logs/ в корне проекта,
    переопределяется VISCOFLOW_LOG_DIR). Файл можно отключить: VISCOFLOW_LOG_FILE=0.
    Уровень: INFO по умолчанию, DEBUG если задан env LOG_LEVEL=DEBUG.
    """
    level_name = config.get_log_level()
    level = getattr(logging, level_name, logging.INFO)

    root = logging.getLogger()
    root.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT)

    # Очищаем существующие handlers, чтобы не дублировать при повторном вызове
    root.handlers.clear()

    # Консоль
    console = logging.StreamHandler()
    console.setLevel(level)
    console.setFormatter(formatter)
    root.addHandler(console)

    if not config.get_log_to_file():
        return

    target_dir = log_dir or config.get_log_dir()
    target_dir.mkdir(parents=True, exist_ok=True)

    # Файл с ротацией по полуночи, хранить 14 дней
    file_handler = TimedRotatingFileHandler(
        filename=str(target_dir / LOG_FILE_NAME),
        when="midnight",
        interval=1,
        backupCount=14,
        encoding="utf-8",
        utc=False,
    )
    file_handler.suffix = "%Y-%m-%d"
    file_handler.setLevel(level)
    file_handler.setFormatter(formatter)
    root.addHandler(file_handler)


def context_str(**fields: object) -> str:
    """Строка контекста для логов: key=value | key=value (поля со значением None пропускаются)."""
    parts = []
    for key, value in fields.items():
        if value is None:
            continue
        if isinstance(value, float):
            parts.append(f"{key}={value:.6g}")
        else:
            parts.append(f"{key}={value}")
    return " | ".join(parts)
