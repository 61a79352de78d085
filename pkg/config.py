"""Загрузка переменных окружения из .env и разбор файлов конфигурации запусков."""

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

# Загрузка .env из корня проекта
PROJECT_ROOT = Path(__file__).resolve().parent
env_path = PROJECT_ROOT / ".env"
load_dotenv(dotenv_path=env_path)

SCHEMES = ("engquist_osher", "godunov_flux", "lax_friedrichs")


class ConfigError(ValueError):
    """Некорректный или неполный файл конфигурации запуска."""


def _env_flag(name: str, default: str) -> bool:
    raw = os.getenv(name, default).strip()
    return raw in ("1", "true", "yes", "on")


def get_log_level() -> str:
    """Уровень логирования из LOG_LEVEL. По умолчанию INFO."""
    return (os.getenv("LOG_LEVEL") or "INFO").strip().upper()


def get_debug_mode() -> bool:
    """Включён ли режим отладки (DEBUG_MODE=1): пошаговые DEBUG-логи решателя. По умолчанию 0."""
    return _env_flag("DEBUG_MODE", "0")


def get_log_dir() -> Path:
    """Папка для файлов логов (VISCOFLOW_LOG_DIR). По умолчанию logs/ в корне проекта."""
    raw = (os.getenv("VISCOFLOW_LOG_DIR") or "").strip()
    return Path(raw) if raw else PROJECT_ROOT / "logs"


def get_log_to_file() -> bool:
    """Писать ли лог в файл (VISCOFLOW_LOG_FILE). По умолчанию 1."""
    return _env_flag("VISCOFLOW_LOG_FILE", "1")


def get_default_workers() -> int:
    """Число потоков для параллельных решений в свипе (VISCOFLOW_WORKERS). По умолчанию 1."""
    raw = (os.getenv("VISCOFLOW_WORKERS") or "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def get_output_root() -> Path:
    """Каталог по умолчанию для артефактов (VISCOFLOW_OUT). По умолчанию out/ в текущей папке."""
    raw = (os.getenv("VISCOFLOW_OUT") or "").strip()
    return Path(raw) if raw else Path("out")


@dataclass(frozen=True)
class RunConfig:
    """
    Конфигурация одного запуска (solve/reference/prepare) или свипа по ε.
    Файл: плоский текст `key = value`, комментарии через `#`.
    """

    flux: str = "burgers"
    flux_speed: float = 1.0
    viscosity: str = "constant"
    data: str = "step"
    data_csv: Path | None = None
    domain_a: float = 0.0
    domain_b: float = 1.0
    eps: float = 0.02
    eps_list: tuple[float, ...] = ()
    n_cells: int = 512
    T: float = 0.5
    cfl_safety: float = 0.6
    store_every: int | None = None
    scheme: str = "engquist_osher"
    fine_factor: int = 8
    tol_maxp: float = 1e-10
    tol_energy: float = 0.05
    tol_bv: float = 0.05
    tol_time: float = 0.05
    tol_mollifier: float = 1e-8
    tol_uniform: float = 0.10
    c_tol: float = 5.0
    anti_diffusion: float = 0.0
    workers: int = field(default_factory=get_default_workers)
    out_dir: Path = field(default_factory=get_output_root)

    def __post_init__(self) -> None:
        if not self.domain_a < self.domain_b:
            raise ConfigError(f"domain_a={self.domain_a} должен быть меньше domain_b={self.domain_b}")
        if self.n_cells < 1:
            raise ConfigError("n_cells должен быть положительным")
        if self.T <= 0:
            raise ConfigError("T должен быть положительным")
        if self.eps <= 0:
            raise ConfigError("eps должен быть положительным")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError("cfl_safety должен лежать в (0, 1]")
        if self.store_every is not None and self.store_every < 1:
            raise ConfigError("store_every должен быть положительным")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme={self.scheme!r}: допустимо {', '.join(SCHEMES)}")
        if self.fine_factor < 1:
            raise ConfigError("fine_factor должен быть положительным")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps_list: все значения должны быть положительными")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ConfigError("eps_list должен строго убывать")
        for name in ("tol_maxp", "tol_energy", "tol_bv", "tol_time", "tol_mollifier", "tol_uniform"):
            if getattr(self, name) <= -1:
                raise ConfigError(f"{name} должен быть больше -1")


_INT_KEYS = {"n_cells", "store_every", "fine_factor", "workers"}
_STR_KEYS = {"flux", "viscosity", "data", "scheme"}
_PATH_KEYS = {"data_csv", "out_dir"}


def _parse_value(key: str, raw: str, base_dir: Path) -> object:
    if key in _STR_KEYS:
        return raw.strip().lower()
    if key in _PATH_KEYS:
        path = Path(raw.strip())
        return path if path.is_absolute() or key == "out_dir" else base_dir / path
    if key == "eps_list":
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        return tuple(float(p) for p in parts)
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def parse_run_config(values: dict[str, str | None], base_dir: Path | None = None) -> RunConfig:
    """Построить RunConfig из словаря key -> value (значения-строки как в файле)."""
    known = {f.name for f in fields(RunConfig)}
    kwargs: dict[str, object] = {}
    for key, raw in values.items():
        key = key.strip()
        if key not in known:
            raise ConfigError(f"Неизвестный ключ конфигурации: {key}")
        if raw is None or not raw.strip():
            raise ConfigError(f"Пустое значение для ключа {key}")
        try:
            kwargs[key] = _parse_value(key, raw, base_dir or Path("."))
        except ValueError as e:
            raise ConfigError(f"Не удалось разобрать {key}={raw!r}: {e}") from e
    return RunConfig(**kwargs)


def load_run_config(path: Path, **overrides: object) -> RunConfig:
    """
    Прочитать файл конфигурации запуска.
    Относительный data_csv считается от папки файла; overrides (например out_dir из CLI) перекрывают файл.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Файл конфигурации не найден: {path}")
    values = dotenv_values(dotenv_path=path)
    cfg = parse_run_config(values, base_dir=path.resolve().parent)
    if overrides:
        data = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
        data.update({k: v for k, v in overrides.items() if v is not None})
        cfg = RunConfig(**data)
    return cfg
