"""Pydantic схемы Monte Carlo экспериментов: семплеры и пересечение границы."""

import math
from typing import Annotated, Literal

from pydantic import ConfigDict, Field, model_validator

from src.config import DEFAULT_BATCH_SIZE, DEFAULT_MAX_ATTEMPTS, DEFAULT_SEED
from src.schemas.base import BaseConfig, FrozenConfig
from src.schemas.process import BridgeSpec, StableParams


class RecursiveSampler(FrozenConfig):
    """Точный мост рекурсивным делением пополам до глубины depth."""

    kind: Literal["recursive"] = "recursive"
    depth: int = Field(default=10, ge=0, le=24, description="Число делений пополам")

    def n_steps(self, T: float) -> int:
        return 2**self.depth


class StretchedSampler(FrozenConfig):
    """Растянутый мост W(t) + (t/T)(L - W(T)) с порогом отбраковки."""

    model_config = ConfigDict(extra="forbid", frozen=True, ser_json_inf_nan="constants")

    kind: Literal["stretched"] = "stretched"
    dt: float = Field(..., gt=0, description="Шаг по времени")
    L_thresh: float = Field(
        default=math.inf,
        gt=0,
        description="Порог |x(T) - L| для принятия траектории (inf = без отбраковки)",
    )
    max_attempts: int = Field(
        default=DEFAULT_MAX_ATTEMPTS,
        ge=1,
        description="Лимит попыток на одну принятую траекторию",
    )

    def n_steps(self, T: float) -> int:
        return round(T / self.dt)


class UnconditionedSampler(FrozenConfig):
    """Процесс без условия на конечную точку (сумма приращений CMS)."""

    kind: Literal["unconditioned"] = "unconditioned"
    dt: float = Field(..., gt=0, description="Шаг по времени")

    def n_steps(self, T: float) -> int:
        return round(T / self.dt)


SamplerConfig = Annotated[
    RecursiveSampler | StretchedSampler | UnconditionedSampler,
    Field(discriminator="kind"),
]


class CrossingExperiment(BaseConfig):
    """
    Эксперимент по пересечению границы d.

    Пересечение: первый индекс, где позиция строго больше d.
    """

    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    params: StableParams
    T: float = Field(default=1.0, gt=0, description="Время T")
    L: float = Field(default=0.0, description="Точка прибытия (игнорируется без условия)")
    d: float = Field(..., gt=0, description="Граница d > 0")
    sampler: SamplerConfig = Field(default_factory=RecursiveSampler)
    n_paths: int = Field(default=100_000, ge=1, description="Число траекторий")
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64, description="Master seed")
    batch_size: int = Field(
        default=DEFAULT_BATCH_SIZE,
        ge=1,
        description="Траекторий в батче; батч b использует поток b",
    )

    @model_validator(mode="after")
    def validate_time_step(self) -> "CrossingExperiment":
        """Шаг dt должен укладываться в T целое число раз."""
        if isinstance(self.sampler, StretchedSampler | UnconditionedSampler):
            n = self.sampler.n_steps(self.T)
            if n < 1 or abs(n * self.sampler.dt - self.T) > 1e-9 * self.T:
                raise ValueError(
                    f"dt={self.sampler.dt} не делит T={self.T} нацело"
                )
        return self

    @property
    def conditioned(self) -> bool:
        return self.sampler.kind != "unconditioned"

    @property
    def spec(self) -> BridgeSpec:
        return BridgeSpec(params=self.params, T=self.T, L=self.L)

    @property
    def n_steps(self) -> int:
        return self.sampler.n_steps(self.T)

    def with_sampler(self, sampler: RecursiveSampler | StretchedSampler | UnconditionedSampler):
        """Копия эксперимента с другим семплером (общие случайные числа)."""
        return self.model_copy(update={"sampler": sampler})
