"""Воспроизводимые потоки случайных чисел и генератор Chambers-Mallows-Stuck."""

from __future__ import annotations

import numpy as np

from src.errors import DomainError


class RngStream:
    """
    Независимый поток случайных чисел, заданный парой (seed, stream).

    Одинаковые (seed, stream) дают одинаковые последовательности; разные
    stream дают статистически независимые подпотоки. Поток принадлежит
    одному владельцу и не разделяется между потоками выполнения.
    """

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0 or seed >= 2**64:
            raise DomainError(f"seed должен быть 64-битным неотрицательным: {seed}")
        if stream < 0:
            raise DomainError(f"stream должен быть неотрицательным: {stream}")
        self.seed = int(seed)
        self.stream = int(stream)
        self.generator = np.random.default_rng(np.random.SeedSequence([self.seed, self.stream]))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def uniform_angle(self, size: int | tuple[int, ...] | None = None) -> np.ndarray:
        """Угол U ~ U(-π/2, π/2)."""
        return self.generator.uniform(-np.pi / 2, np.pi / 2, size)

    def exponential(self, size: int | tuple[int, ...] | None = None) -> np.ndarray:
        """W ~ Exp(1)."""
        return self.generator.standard_exponential(size)


def cms_transform(alpha: float, U: np.ndarray, W: np.ndarray) -> np.ndarray:
    """
    Симметричная формула Chambers-Mallows-Stuck.

    X = sin(αU) / cos(U)^{1/α} · (cos((1-α)U) / W)^{(1-α)/α}
    имеет характеристическую функцию exp(-|k|^α).

    Args:
        alpha: Индекс устойчивости
        U: Углы из U(-π/2, π/2)
        W: Экспоненциальные величины Exp(1)

    Returns:
        Стандартные симметричные α-устойчивые величины
    """
    U = np.asarray(U, dtype=float)
    W = np.asarray(W, dtype=float)
    if alpha == 1.0:
        return np.tan(U)
    if alpha == 2.0:
        return 2.0 * np.sqrt(W) * np.sin(U)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        X = (
            np.sin(alpha * U)
            / np.cos(U) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * U) / W) ** ((1.0 - alpha) / alpha)
        )
    # U = 0 даёт ровно 0 при любом W
    return np.where(U == 0.0, 0.0, X)


def cms_standard(alpha: float, size: int | tuple[int, ...], rng: RngStream) -> np.ndarray:
    """Стандартные (σ = t = 1) симметричные устойчивые величины методом CMS."""
    U = rng.uniform_angle(size)
    W = rng.exponential(size)
    return cms_transform(alpha, U, W)
