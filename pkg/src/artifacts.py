"""
Запись и чтение артефактов: CSV, JSON манифесты, ансамбли траекторий.

CSV пишутся в UTF-8 с заголовком и окончаниями строк LF; JSON с
фиксированным порядком полей. Ошибки файловой системы поднимаются как
ArtifactIOError.
"""

import json
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from src.errors import ArtifactIOError
from src.levy.bridge_kernel import Path
from src.schemas.run_config import RunManifest

MANIFEST_SUFFIX = ".manifest.json"
ENSEMBLE_FORMAT = "levy-bridges/ensemble-v1"


def _ensure_parent(path: FilePath) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"не удалось создать директорию {path.parent}: {exc}") from exc


def write_csv(frame: pd.DataFrame, path: FilePath | str) -> FilePath:
    """CSV без индекса, LF."""
    path = FilePath(path)
    _ensure_parent(path)
    try:
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"не удалось записать {path}: {exc}") from exc
    logger.debug(f"CSV: {path} ({len(frame)} строк)")
    return path


def read_csv(path: FilePath | str) -> pd.DataFrame:
    path = FilePath(path)
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as exc:
        raise ArtifactIOError(f"не удалось прочитать {path}: {exc}") from exc


def write_json(data: dict[str, Any], path: FilePath | str) -> FilePath:
    """JSON с отступом 2; inf/nan как Infinity/NaN."""
    path = FilePath(path)
    _ensure_parent(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, indent=2, ensure_ascii=False, default=_json_default)
            f.write("\n")
    except (OSError, TypeError) as exc:
        raise ArtifactIOError(f"не удалось записать {path}: {exc}") from exc
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, FilePath):
        return str(value)
    raise TypeError(f"не сериализуется в JSON: {type(value).__name__}")


def manifest_path(output: FilePath | str) -> FilePath:
    """out/fig4.csv -> out/fig4.manifest.json."""
    output = FilePath(output)
    return output.with_name(output.stem + MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest, path: FilePath | str) -> FilePath:
    path = FilePath(path)
    _ensure_parent(path)
    try:
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"не удалось записать манифест {path}: {exc}") from exc
    logger.debug(f"Манифест: {path}")
    return path


def read_manifest(path: FilePath | str) -> RunManifest:
    path = FilePath(path)
    try:
        return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ArtifactIOError(f"не удалось прочитать манифест {path}: {exc}") from exc
    except ValidationError as exc:
        raise ArtifactIOError(f"повреждённый манифест {path}: {exc}") from exc


# ═══════════════════════════════════════════════════════════════════════════════
# Ансамбли траекторий
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass
class Ensemble:
    """Ансамбль траекторий на общей сетке времён."""

    times: np.ndarray
    positions: np.ndarray
    streams: np.ndarray
    attempts: np.ndarray
    header: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.atleast_2d(self.positions)
        if self.positions.shape[1] != self.times.shape[0]:
            raise ArtifactIOError(
                f"форма позиций {self.positions.shape} не согласована с {self.times.shape[0]} временами"
            )

    @classmethod
    def from_paths(cls, paths: Sequence[Path], header: dict[str, Any] | None = None) -> "Ensemble":
        if not paths:
            raise ArtifactIOError("пустой ансамбль")
        return cls(
            times=paths[0].times,
            positions=np.stack([p.positions for p in paths]),
            streams=np.array([p.stream for p in paths], dtype=np.int64),
            attempts=np.array([p.attempts for p in paths], dtype=np.int64),
            header=dict(header or {}),
        )

    @property
    def n_paths(self) -> int:
        return int(self.positions.shape[0])

    def paths(self) -> Iterator[Path]:
        for positions, stream, attempts in zip(self.positions, self.streams, self.attempts):
            yield Path(self.times, positions, stream=int(stream), attempts=int(attempts))

    def to_frame(self) -> pd.DataFrame:
        """Длинный формат: path_id, stream, t, x."""
        n_paths, n_points = self.positions.shape
        return pd.DataFrame(
            {
                "path_id": np.repeat(np.arange(n_paths), n_points),
                "stream": np.repeat(self.streams, n_points),
                "t": np.tile(self.times, n_paths),
                "x": self.positions.ravel(),
            }
        )


def write_ensemble(ensemble: Ensemble, path: FilePath | str) -> FilePath:
    """Контейнер .npz: массивы и JSON заголовок."""
    path = FilePath(path)
    _ensure_parent(path)
    header = {"format": ENSEMBLE_FORMAT, **ensemble.header}
    try:
        with open(path, "wb") as f:
            np.savez(
                f,
                header=np.array(json.dumps(header, ensure_ascii=False, default=_json_default)),
                times=ensemble.times,
                positions=ensemble.positions,
                streams=ensemble.streams,
                attempts=ensemble.attempts,
            )
    except OSError as exc:
        raise ArtifactIOError(f"не удалось записать ансамбль {path}: {exc}") from exc
    logger.debug(f"Ансамбль: {path} ({ensemble.n_paths} траекторий)")
    return path


def load_ensemble(path: FilePath | str) -> Ensemble:
    """Чтение контейнера, записанного write_ensemble."""
    path = FilePath(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("format") != ENSEMBLE_FORMAT:
                raise ArtifactIOError(f"{path}: неизвестный формат {header.get('format')!r}")
            return Ensemble(
                times=data["times"],
                positions=data["positions"],
                streams=data["streams"],
                attempts=data["attempts"],
                header=header,
            )
    except ArtifactIOError:
        raise
    except (OSError, KeyError, ValueError) as exc:
        raise ArtifactIOError(f"не удалось прочитать ансамбль {path}: {exc}") from exc
