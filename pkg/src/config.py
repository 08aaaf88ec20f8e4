"""Конфигурация проекта: пути, численные допуски и настройки окружения."""

from pathlib import Path

from dotenv import load_dotenv
from loguru import logger
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file if it exists
load_dotenv()

# Paths
PROJ_ROOT = Path(__file__).resolve().parents[1]
CONF_DIR = PROJ_ROOT / "conf"


class Settings(BaseSettings):
    """Настройки окружения (префикс LEVY_)."""

    model_config = SettingsConfigDict(env_prefix="LEVY_", extra="ignore")

    output_dir: Path = Field(
        default=PROJ_ROOT / "outputs",
        description="Директория для CSV/JSON артефактов по умолчанию",
    )
    log_dir: Path | None = Field(
        default=None,
        description="Директория файловых логов (None = только консоль)",
    )
    log_level: str = Field(default="INFO", description="Уровень консольного лога")
    n_workers: int = Field(
        default=1,
        ge=1,
        description="Число потоков для Monte Carlo батчей",
    )


def get_settings() -> Settings:
    """Читает настройки из окружения при каждом вызове."""
    return Settings()


# ═══════════════════════════════════════════════════════════════════════════════
# Численные допуски
# ═══════════════════════════════════════════════════════════════════════════════

# Абсолютная точность плотности (масштаб t=1) и её производных
EPS_DENSITY = 1e-9
EPS_DERIV = 1e-7

# Выше этого α плотность считается моделью "гаусс + хвост Нагаева"
NEAR_GAUSSIAN_ALPHA = 1.9999

# Масса хвоста за краем таблицы CDF (квантиль 1 - 1e-8)
TABLE_TAIL_MASS = 1e-8

# Шаг таблицы в координате u = asinh(z / w), w ширина ядра
TABLE_STEP = 0.01

# Область применимости асимптотики L_b при δ -> 0
LB_ASYMPTOTE_MAX_DELTA = 0.05

# Monte Carlo
DEFAULT_MAX_ATTEMPTS = 10**6
DEFAULT_BATCH_SIZE = 1024
DEFAULT_SEED = 20180815

# If tqdm is installed, configure loguru with tqdm.write
# https://github.com/Delgan/loguru/issues/135
try:
    from tqdm import tqdm

    logger.remove()
    logger.add(lambda msg: tqdm.write(msg, end=""), colorize=True, level="INFO")
except ModuleNotFoundError:
    pass
