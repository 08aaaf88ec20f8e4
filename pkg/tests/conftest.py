"""Конфигурация pytest и общие фикстуры."""

import sys
from pathlib import Path

import pytest

# Добавляем корень проекта в PYTHONPATH
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.levy.rng import RngStream  # noqa: E402
from src.schemas.process import BridgeSpec, StableParams  # noqa: E402

TEST_SEED = 12345


@pytest.fixture
def rng():
    """Поток случайных чисел с фиксированным seed."""
    return RngStream(TEST_SEED, 0)


@pytest.fixture
def cauchy():
    """Процесс Коши σ = 1."""
    return StableParams(alpha=1.0, sigma=1.0)


@pytest.fixture
def gaussian():
    """Гауссов предел α = 2, σ = 1."""
    return StableParams(alpha=2.0, sigma=1.0)


@pytest.fixture
def stable15():
    """Промежуточный индекс α = 1.5."""
    return StableParams(alpha=1.5, sigma=1.0)


@pytest.fixture
def cauchy_bridge(cauchy):
    """Мост Коши с L = 2 за T = 1 (выше L_b = 1)."""
    return BridgeSpec(params=cauchy, T=1.0, L=2.0)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Выходы каждого теста во временной директории, логи только в консоль."""
    monkeypatch.setenv("LEVY_OUTPUT_DIR", str(tmp_path / "outputs"))
    monkeypatch.delenv("LEVY_LOG_DIR", raising=False)
    monkeypatch.delenv("LEVY_N_WORKERS", raising=False)
