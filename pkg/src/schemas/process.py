"""Параметры устойчивого процесса и спецификация моста."""

import math

from pydantic import Field, field_validator

from src.schemas.base import FrozenConfig


class StableParams(FrozenConfig):
    """
    Пара (α, σ) симметричного α-устойчивого процесса.

    Характеристическая функция приращения за время t: exp(-t σ^α |k|^α).
    """

    alpha: float = Field(..., gt=0, le=2, description="Индекс устойчивости, 0 < α ≤ 2")
    sigma: float = Field(default=1.0, gt=0, description="Масштаб ширины σ > 0")

    @field_validator("alpha", "sigma")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"ожидалось конечное число, получено: {v}")
        return v

    def scale(self, t: float) -> float:
        """Масштаб c = σ t^{1/α} распределения x(t)."""
        return self.sigma * t ** (1.0 / self.alpha)

    @property
    def delta(self) -> float:
        """Отклонение от гауссова предела δ = 2 - α."""
        return 2.0 - self.alpha


class BridgeSpec(FrozenConfig):
    """Мост Леви: x(0) = 0, x(T) = L."""

    params: StableParams
    T: float = Field(default=1.0, gt=0, description="Время прибытия T > 0")
    L: float = Field(default=0.0, description="Точка прибытия x(T) = L")

    @field_validator("T", "L")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"ожидалось конечное число, получено: {v}")
        return v

    @property
    def half_scale(self) -> float:
        """Масштаб c распределения x(T/2) без условия."""
        return self.params.scale(self.T / 2.0)
