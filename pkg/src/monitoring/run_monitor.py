"""Мониторинг сборки наборов данных: панели, тайминги и файл status.json."""

import json
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

from loguru import logger

from src.errors import ArtifactIOError


@dataclass
class PanelStatus:
    """Состояние одной панели набора."""

    name: str
    start_time: float
    end_time: float | None = None
    status: str = "running"
    outputs: list[str] = field(default_factory=list)
    metrics: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def duration_seconds(self) -> float:
        if self.end_time is None:
            return time.time() - self.start_time
        return self.end_time - self.start_time

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "duration_seconds": round(self.duration_seconds, 3),
            "outputs": self.outputs,
            "metrics": self.metrics,
            "error": self.error,
        }


@dataclass
class BundleRun:
    """Запуск сборки одного набора (fig1..fig6)."""

    bundle: str
    start_time: float
    panels: list[PanelStatus] = field(default_factory=list)
    end_time: float | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def duration_seconds(self) -> float:
        if self.end_time is None:
            return time.time() - self.start_time
        return self.end_time - self.start_time

    @property
    def failed(self) -> list[PanelStatus]:
        return [p for p in self.panels if p.status == "failed"]

    @property
    def status(self) -> str:
        """success, partial (часть панелей упала) или failed (все)."""
        if not self.panels or len(self.failed) == len(self.panels):
            return "failed"
        return "partial" if self.failed else "success"

    def to_dict(self) -> dict[str, Any]:
        return {
            "bundle": self.bundle,
            "status": self.status,
            "start_time": datetime.fromtimestamp(self.start_time).isoformat(),
            "duration_seconds": round(self.duration_seconds, 3),
            "panels": [p.to_dict() for p in self.panels],
            "metadata": self.metadata,
        }


class RunMonitor:
    """
    Монитор сборки набора данных.

    Ошибка одной панели записывается в её статус и не прерывает набор;
    итог пишется в status.json в директории набора.
    """

    def __init__(self, bundle: str, output_dir: Path | str, metadata: dict[str, Any] | None = None):
        self.output_dir = Path(output_dir)
        self.run = BundleRun(bundle=bundle, start_time=time.time(), metadata=metadata or {})
        logger.info(f"Сборка набора {bundle} -> {self.output_dir}")

    def panel(self, name: str) -> "PanelContext":
        """Контекстный менеджер панели."""
        return PanelContext(self, name)

    def finish(self) -> BundleRun:
        """Завершение набора и запись status.json."""
        self.run.end_time = time.time()
        ok = sum(1 for p in self.run.panels if p.status == "success")
        logger.info(
            f"Набор {self.run.bundle}: {ok}/{len(self.run.panels)} панелей, "
            f"{self.run.duration_seconds:.2f} с, статус {self.run.status}"
        )
        self.write_status()
        return self.run

    @property
    def status_path(self) -> Path:
        return self.output_dir / "status.json"

    def write_status(self) -> Path:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            with open(self.status_path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(self.run.to_dict(), f, indent=2, ensure_ascii=False)
                f.write("\n")
        except OSError as exc:
            raise ArtifactIOError(f"не удалось записать {self.status_path}: {exc}") from exc
        return self.status_path


class PanelContext:
    """Контекстный менеджер панели: ловит ошибку и помечает панель failed."""

    def __init__(self, monitor: RunMonitor, name: str):
        self.monitor = monitor
        self.status = PanelStatus(name=name, start_time=time.time())

    def __enter__(self) -> PanelStatus:
        logger.info(f"  ▶ панель {self.status.name}")
        return self.status

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        self.status.end_time = time.time()
        if exc_type is None:
            self.status.status = "success"
            logger.info(f"  ✓ {self.status.name} ({self.status.duration_seconds:.2f} с)")
        elif issubclass(exc_type, Exception):
            self.status.status = "failed"
            self.status.error = f"{exc_type.__name__}: {exc_val}"
            logger.error(f"  ✗ {self.status.name}: {self.status.error}")
        self.monitor.run.panels.append(self.status)
        return exc_type is not None and issubclass(exc_type, Exception)
