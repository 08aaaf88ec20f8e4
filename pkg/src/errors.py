"""Иерархия исключений и коды возврата CLI."""

from typing import Any


class LevyError(Exception):
    """Базовое исключение проекта."""

    exit_code: int = 1


class DomainError(LevyError, ValueError):
    """Аргументы вне области определения операции."""

    exit_code = 3


class DivergenceError(DomainError):
    """Величина расходится (например, L_b при α = 2)."""


class AccuracyError(LevyError, ArithmeticError):
    """Не достигнута заданная точность вычисления."""

    exit_code = 4

    def __init__(self, message: str, achieved_error: float | None = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class RejectionExhaustedError(LevyError, RuntimeError):
    """Исчерпан лимит попыток rejection-семплера."""

    exit_code = 5

    def __init__(
        self,
        message: str,
        attempts: int,
        accepted: int,
        partial: Any = None,
    ):
        super().__init__(message)
        self.attempts = attempts
        self.accepted = accepted
        self.partial = partial

    @property
    def acceptance_rate(self) -> float:
        """Эмпирическая доля принятых траекторий."""
        return self.accepted / self.attempts if self.attempts else 0.0


class ArtifactIOError(LevyError, OSError):
    """Ошибка чтения или записи артефакта."""

    exit_code = 6


class ConvergenceError(LevyError, RuntimeError):
    """Нелинейный решатель не сошёлся."""

    exit_code = 7

    def __init__(self, message: str, last_iterate: Any = None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ResolutionError(LevyError, RuntimeError):
    """Корни не разрешены после максимального измельчения сетки."""

    exit_code = 7

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} (интервал [{interval[0]:.6g}, {interval[1]:.6g}])")
        self.interval = interval


PARTIAL_BUNDLE_EXIT_CODE = 8
