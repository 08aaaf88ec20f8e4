"""Логирование и мониторинг сборки наборов данных."""

from src.monitoring.logger import MonitoringLogger, configure_logging
from src.monitoring.run_monitor import BundleRun, PanelContext, PanelStatus, RunMonitor

__all__ = [
    # Logger
    "MonitoringLogger",
    "configure_logging",
    # Run monitor
    "RunMonitor",
    "BundleRun",
    "PanelStatus",
    "PanelContext",
]
