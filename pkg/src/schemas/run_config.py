"""Конфигурации запусков CLI, манифесты и пресеты фигур (Hydra)."""

import math
from typing import Any, Literal

from omegaconf import DictConfig, OmegaConf
from pydantic import ConfigDict, Field

from src.config import DEFAULT_BATCH_SIZE, DEFAULT_SEED
from src.schemas.base import BaseConfig


class RunConfig(BaseConfig):
    """
    Полная конфигурация одного вызова CLI.

    Сериализуется в каждый манифест; повтор по манифесту воспроизводит
    артефакты побайтно.
    """

    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    command: str = Field(..., description="Имя подкоманды")
    args: dict[str, Any] = Field(
        default_factory=dict,
        description="Параметры подкоманды в том виде, в каком они переданы",
    )
    resolved: dict[str, float] = Field(
        default_factory=dict,
        description="Длины в абсолютных единицах и в единицах L_b",
    )


class RunManifest(BaseConfig):
    """JSON манифест рядом с каждым выходным файлом."""

    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    config: RunConfig
    version: str
    outputs: list[str] = Field(default_factory=list)
    status: Literal["success", "partial", "failed"] = "success"
    crossing_rule: str = "strict (x > d) at sampled times, no sub-step correction"
    wall_time_seconds: float = 0.0


class ScaleConfig(BaseConfig):
    """Масштаб Monte Carlo: desk (приёмка, минуты) или paper (полный, 10^7 траекторий)."""

    name: Literal["desk", "paper"] = "desk"
    n_paths: int = Field(default=100_000, ge=1)
    depth: int = Field(default=10, ge=0, le=24)
    dt: float = Field(default=1e-4, gt=0)
    n_bins: int = Field(default=20, ge=2)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)


class FigureConfig(BaseConfig):
    """
    Пресет одной фигуры (fig1..fig6).

    Поля, не нужные конкретной фигуре, остаются значениями по умолчанию.
    """

    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    name: Literal["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"]
    description: str = ""
    scale: ScaleConfig = Field(default_factory=ScaleConfig)
    sigma: float = Field(default=1.0, gt=0)
    T: float = Field(default=1.0, gt=0)
    seed: int = Field(default=DEFAULT_SEED, ge=0)

    alphas: list[float] = Field(default_factory=lambda: [1.0])
    # Длины L в единицах σ T^{1/α} для диаграмм
    L_min: float = Field(default=0.05, gt=0)
    L_max: float = Field(default=6.0, gt=0)
    n_L: int = Field(default=120, ge=2)
    # Сетка плотностей
    n_x: int = Field(default=401, ge=3)
    # Кратности L_b (fig1 шаг, fig5 пути, fig6 прибытия)
    L_factors: list[float] = Field(default_factory=list)
    # Пороги отбраковки в единицах L_b (fig5), по убыванию
    thresholds: list[float] = Field(default_factory=list)
    # Сетка α для кривых L_b (fig4)
    alpha_min: float = Field(default=1.0, gt=0)
    alpha_max: float = Field(default=1.999, lt=2)
    n_alpha: int = Field(default=40, ge=2)
    n_steps_path: int = Field(default=500, ge=1)
    # Образцы мостов (fig5): α и число траекторий
    path_alpha: float = Field(default=1.9, gt=0, le=2)
    n_sample_paths: int = Field(default=5, ge=1)

    @classmethod
    def from_hydra(cls, cfg: DictConfig) -> "FigureConfig":
        """
        Создаёт FigureConfig из Hydra DictConfig.

        Args:
            cfg: Композиция conf/config.yaml + scale + figure

        Returns:
            Валидированный FigureConfig
        """
        config_dict = OmegaConf.to_container(cfg, resolve=True)
        figure = dict(config_dict.pop("figure", {}))
        figure["scale"] = config_dict.pop("scale", {})
        for key in ("sigma", "T", "seed"):
            if key in config_dict:
                figure.setdefault(key, config_dict[key])
        figure["thresholds"] = [float(v) for v in figure.get("thresholds", [])]
        return cls(**figure)

    def threshold_grid(self) -> list[float]:
        """Пороги по убыванию; inf допустим."""
        return sorted(self.thresholds, key=lambda v: -v if math.isfinite(v) else -math.inf)
