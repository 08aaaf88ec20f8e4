"""Pydantic схемы параметров процессов, экспериментов и запусков."""

from src.schemas.base import BaseConfig, FrozenConfig
from src.schemas.experiment import (
    CrossingExperiment,
    RecursiveSampler,
    SamplerConfig,
    StretchedSampler,
    UnconditionedSampler,
)
from src.schemas.process import BridgeSpec, StableParams
from src.schemas.run_config import FigureConfig, RunConfig, RunManifest, ScaleConfig

__all__ = [
    # Base
    "BaseConfig",
    "FrozenConfig",
    # Process
    "StableParams",
    "BridgeSpec",
    # Experiments
    "RecursiveSampler",
    "StretchedSampler",
    "UnconditionedSampler",
    "SamplerConfig",
    "CrossingExperiment",
    # Runs
    "RunConfig",
    "RunManifest",
    "ScaleConfig",
    "FigureConfig",
]
