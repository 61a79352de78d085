"""Общие фикстуры тестов: плоские модули проекта импортируются из корня."""

import logging
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from grid_field import Domain1D, Grid  # noqa: E402
from models import make_flux, make_initial_data, make_viscosity  # noqa: E402


@pytest.fixture(autouse=True)
def _quiet_env(monkeypatch, tmp_path):
    # Логи тестов не попадают в logs/ проекта
    monkeypatch.setenv("VISCOFLOW_LOG_FILE", "0")
    monkeypatch.setenv("VISCOFLOW_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("DEBUG_MODE", raising=False)
    # main() вешает на root logger свои handlers; после теста снимаем их
    root = logging.getLogger()
    level = root.level
    yield
    for handler in list(root.handlers):
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)
    root.setLevel(level)


@pytest.fixture
def unit_domain():
    return Domain1D(0.0, 1.0)


@pytest.fixture
def unit_grid(unit_domain):
    return Grid(unit_domain, 64)


@pytest.fixture
def step_data(unit_domain):
    return make_initial_data("step", unit_domain)


@pytest.fixture
def hat_data(unit_domain):
    return make_initial_data("hat", unit_domain)


@pytest.fixture
def tent_data(unit_domain):
    return make_initial_data("tent", unit_domain)


@pytest.fixture
def burgers(step_data):
    return make_flux("burgers", step_data.interval)


@pytest.fixture
def constant_visc():
    return make_viscosity("constant")
