"""Логирование запусков: консоль, файлы с ротацией, JSON и отдельный файл ошибок."""

import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any

from loguru import logger


class MonitoringLogger:
    """
    Логгер компонента (cli, figures, passage).

    Консольный вывод всегда; файловые обработчики только при заданном
    log_dir, директория создаётся при первой настройке.
    """

    def __init__(
        self,
        component: str,
        log_dir: Path | None = None,
        level: str = "INFO",
        rotation: str = "10 MB",
        retention: str = "7 days",
        json_logs: bool = False,
    ):
        """
        Args:
            component: Название компонента
            log_dir: Директория для логов (None = только консоль)
            level: Уровень консольного вывода
            rotation: Условие ротации логов
            retention: Срок хранения логов
            json_logs: Включить JSON-логирование
        """
        self.component = component
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.level = level.upper()

        self._configure_handlers(rotation, retention, json_logs)

    def _configure_handlers(self, rotation: str, retention: str, json_logs: bool) -> None:
        logger.remove()

        logger.add(
            sys.stderr,
            format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
            "<level>{level: <8}</level> | "
            f"<cyan>{self.component}</cyan> | "
            "<level>{message}</level>",
            level=self.level,
            colorize=True,
        )

        if self.log_dir is None:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)

        logger.add(
            self.log_dir / f"{self.component}.log",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {message}",
            level="DEBUG",
            rotation=rotation,
            retention=retention,
            compression="zip",
        )

        if json_logs:
            logger.add(
                self.log_dir / f"{self.component}.json",
                format="{message}",
                level="INFO",
                rotation=rotation,
                retention=retention,
                serialize=True,
            )

        logger.add(
            self.log_dir / "errors.log",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | "
            f"{self.component} | {{message}}",
            level="ERROR",
            rotation=rotation,
            retention=retention,
        )

    def log_event(self, event_type: str, event_data: dict[str, Any], level: str = "info") -> None:
        """
        Структурированное событие: EVENT: <type> | {json}.

        Args:
            event_type: Тип события
            event_data: Данные события
            level: Уровень логирования
        """
        event = {
            "timestamp": datetime.now().isoformat(),
            "component": self.component,
            "event_type": event_type,
            **event_data,
        }
        log_func = getattr(logger, level, logger.info)
        log_func(f"EVENT: {event_type} | {json.dumps(event, ensure_ascii=False, default=str)}")

    def log_metrics(self, metrics: dict[str, float], prefix: str = "") -> None:
        """Метрики строками METRIC: name = value."""
        for name, value in metrics.items():
            metric_name = f"{prefix}_{name}" if prefix else name
            logger.info(f"METRIC: {metric_name} = {value:.6g}")


def configure_logging(
    component: str = "levy",
    log_dir: Path | str | None = None,
    level: str = "INFO",
    json_logs: bool = False,
) -> MonitoringLogger:
    """
    Конфигурация логирования для компонента.

    Returns:
        Настроенный MonitoringLogger
    """
    return MonitoringLogger(
        component=component,
        log_dir=Path(log_dir) if log_dir else None,
        level=level,
        json_logs=json_logs,
    )
