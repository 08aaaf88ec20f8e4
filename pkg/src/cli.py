"""
Командная строка levy: плотности, мосты, длины бифуркации, пересечения, фигуры.

Каждый записанный файл сопровождается JSON манифестом с полной
конфигурацией запуска; `levy rerun MANIFEST` повторяет запуск.

Коды выхода: 0 успех, 2 ошибка аргументов, 3 область определения,
4 точность, 5 исчерпание попыток, 6 ввод-вывод, 7 сходимость,
8 набор собран частично.
"""

import functools
import math
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import click
import numpy as np
import pandas as pd
from hydra import compose, initialize_config_dir
from loguru import logger
from pydantic import ValidationError

from src import __version__
from src.artifacts import (
    Ensemble,
    manifest_path,
    read_manifest,
    write_csv,
    write_ensemble,
    write_json,
    write_manifest,
)
from src.config import CONF_DIR, DEFAULT_BATCH_SIZE, DEFAULT_MAX_ATTEMPTS, DEFAULT_SEED, get_settings
from src.errors import PARTIAL_BUNDLE_EXIT_CODE, DomainError, LevyError
from src.figures import build_figure
from src.levy.bifurcation import CRITERIA, bifurcation_length, critical_index, midpoint_extrema
from src.levy.bridge_kernel import (
    midpoint_pdf,
    sample_bridge_recursive,
    sample_bridge_stretched,
)
from src.levy.passage import CROSSING_RULE, crossing_probability, first_passage_histogram
from src.levy.rng import RngStream
from src.levy.stable_core import stable_pdf, stable_pdf_derivative
from src.monitoring.logger import MonitoringLogger, configure_logging
from src.schemas.experiment import (
    CrossingExperiment,
    RecursiveSampler,
    StretchedSampler,
    UnconditionedSampler,
)
from src.schemas.process import BridgeSpec, StableParams
from src.schemas.run_config import FigureConfig, RunConfig, RunManifest

DOMAIN_EXIT_CODE = DomainError.exit_code


def handle_errors(func: Callable) -> Callable:
    """Переводит исключения пакета в коды выхода."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except LevyError as exc:
            logger.error(f"{type(exc).__name__}: {exc}")
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            logger.error(f"Некорректные параметры: {exc}")
            ctx.exit(DOMAIN_EXIT_CODE)

    return wrapper


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple | list):
        return [_jsonable(v) for v in value]
    return value


def _finish(
    ctx: click.Context,
    outputs: list[Path],
    resolved: dict[str, float] | None = None,
    started: float | None = None,
    status: str = "success",
    manifest: Path | None = None,
) -> Path:
    """Манифест рядом с основным выходным файлом."""
    config = RunConfig(
        command=ctx.command.name,
        args={k: _jsonable(v) for k, v in ctx.params.items()},
        resolved=resolved or {},
    )
    record = RunManifest(
        config=config,
        version=__version__,
        outputs=[str(p) for p in outputs],
        status=status,
        crossing_rule=f"{CROSSING_RULE} (x > d) at sampled times, no sub-step correction",
        wall_time_seconds=round(time.perf_counter() - started, 3) if started else 0.0,
    )
    path = manifest or manifest_path(outputs[0])
    write_manifest(record, path)
    logger.info(f"Манифест: {path}")
    monitoring = ctx.find_root().obj
    if isinstance(monitoring, MonitoringLogger):
        monitoring.log_event("run_finished", {"command": config.command, "status": status, "manifest": str(path)})
    return path


def _resolve_length(
    name: str,
    absolute: float | None,
    in_units: float | None,
    params: StableParams,
    T: float,
    resolved: dict[str, float],
    default: float | None = None,
) -> float | None:
    """
    Длина из абсолютного значения или в единицах L_b (критерий кривизны).

    В resolved записываются обе формы, если L_b определена.
    """
    if absolute is not None and in_units is not None:
        raise click.UsageError(f"укажите только одно из --{name} и --{name}-in-units-of-Lb")
    if in_units is not None:
        lb = bifurcation_length(params.alpha, params.sigma, T, "curvature").L_b
        value = in_units * lb
    else:
        value = absolute if absolute is not None else default
        if value is None:
            return None
        try:
            lb = bifurcation_length(params.alpha, params.sigma, T, "curvature").L_b
        except LevyError:
            lb = None
    resolved[name] = value
    if lb is not None:
        resolved["L_b"] = lb
        resolved[f"{name}_in_units_of_Lb"] = value / lb
    return value


def _grid(x: tuple[float, ...], x_min: float, x_max: float, n_x: int) -> np.ndarray:
    if x:
        return np.asarray(x, dtype=float)
    if not (x_max > x_min and n_x >= 2):
        raise DomainError(f"некорректная сетка: [{x_min}, {x_max}], n={n_x}")
    return np.linspace(x_min, x_max, n_x)


def _echo_frame(frame: pd.DataFrame) -> None:
    click.echo(frame.to_csv(index=False, lineterminator="\n"), nl=False)


@click.group()
@click.option("--log-level", default=None, help="Уровень логирования (по умолчанию LEVY_LOG_LEVEL)")
@click.option("--log-dir", default=None, type=click.Path(path_type=Path), help="Директория файловых логов")
@click.option("--json-logs", is_flag=True, help="Дополнительно писать JSON лог")
@click.version_option(__version__, prog_name="levy")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None, log_dir: Path | None, json_logs: bool):
    """Мосты Леви: плотности, бифуркации, семплирование и первое прохождение."""
    settings = get_settings()
    ctx.obj = configure_logging(
        component="levy",
        log_dir=log_dir or settings.log_dir,
        level=log_level or settings.log_level,
        json_logs=json_logs,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# Плотности
# ═══════════════════════════════════════════════════════════════════════════════


@cli.command()
@click.option("--alpha", "-a", required=True, type=float, help="Индекс устойчивости 0 < α ≤ 2")
@click.option("--sigma", default=1.0, type=float, help="Масштаб σ")
@click.option("--t", "t", default=1.0, type=float, help="Время t")
@click.option("--x", "x", multiple=True, type=float, help="Точка (можно несколько раз)")
@click.option("--x-min", default=-10.0, type=float, help="Начало сетки")
@click.option("--x-max", default=10.0, type=float, help="Конец сетки")
@click.option("--n-x", default=401, type=int, help="Число узлов сетки")
@click.option("--derivative", "order", default=0, type=click.IntRange(0, 4), help="Порядок производной")
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="CSV (x, f)")
@handle_errors
def pdf(alpha, sigma, t, x, x_min, x_max, n_x, order, output):
    """Плотность f_α(x; t) или её производная."""
    started = time.perf_counter()
    params = StableParams(alpha=alpha, sigma=sigma)
    grid = _grid(tuple(x), x_min, x_max, n_x)
    values = stable_pdf(params, t, grid) if order == 0 else stable_pdf_derivative(params, t, grid, order)
    frame = pd.DataFrame({"x": grid, "f": np.atleast_1d(values)})

    if output is None:
        if x:
            for value in frame["f"]:
                click.echo(f"{value:.10g}")
        else:
            _echo_frame(frame)
        return
    path = write_csv(frame, Path(output))
    _finish(click.get_current_context(), [path], started=started)


@cli.command()
@click.option("--alpha", "-a", required=True, type=float, help="Индекс устойчивости 0 < α ≤ 2")
@click.option("--sigma", default=1.0, type=float, help="Масштаб σ")
@click.option("--T", "T", default=1.0, type=float, help="Время прибытия T")
@click.option("--L", "L", default=None, type=float, help="Точка прибытия")
@click.option("--L-in-units-of-Lb", "L_units", default=None, type=float, help="Точка прибытия в единицах L_b")
@click.option("--x", "x", multiple=True, type=float, help="Точка (можно несколько раз)")
@click.option("--n-x", default=401, type=int, help="Число узлов сетки")
@click.option("--locate-extrema", is_flag=True, help="Вывести критические точки")
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="CSV (x, density)")
@handle_errors
def midpoint(alpha, sigma, T, L, L_units, x, n_x, locate_extrema, output):
    """Плотность середины моста m(x) и её экстремумы."""
    started = time.perf_counter()
    params = StableParams(alpha=alpha, sigma=sigma)
    resolved: dict[str, float] = {}
    L = _resolve_length("L", L, L_units, params, T, resolved, default=0.0)
    spec = BridgeSpec(params=params, T=T, L=L)

    extrema = None
    if locate_extrema:
        found = midpoint_extrema(spec)
        extrema = pd.DataFrame(
            {
                "x": [p.x for p in found.points],
                "type": [p.kind for p in found.points],
                "density": [float(midpoint_pdf(spec, p.x)) for p in found.points],
            }
        )

    if output is None:
        if extrema is not None:
            for row in extrema.itertuples():
                click.echo(f"{row.x:.10g}\t{row.type}")
            return
        span = max(abs(L), 4.0 * spec.half_scale)
        grid = _grid(tuple(x), L / 2.0 - span, L / 2.0 + span, n_x)
        _echo_frame(pd.DataFrame({"x": grid, "density": midpoint_pdf(spec, grid)}))
        return

    span = max(abs(L), 4.0 * spec.half_scale)
    grid = _grid(tuple(x), L / 2.0 - span, L / 2.0 + span, n_x)
    output = Path(output)
    outputs = [write_csv(pd.DataFrame({"x": grid, "density": midpoint_pdf(spec, grid)}), output)]
    if extrema is not None:
        outputs.append(write_csv(extrema, output.with_name(output.stem + "_extrema.csv")))
    _finish(click.get_current_context(), outputs, resolved, started)


# ═══════════════════════════════════════════════════════════════════════════════
# Бифуркации
# ═══════════════════════════════════════════════════════════════════════════════


@cli.command()
@click.option("--alpha", "-a", required=True, type=float, help="Индекс устойчивости 0 < α < 2")
@click.option("--sigma", default=1.0, type=float, help="Масштаб σ")
@click.option("--T", "T", default=1.0, type=float, help="Время прибытия T")
@click.option(
    "--criterion",
    default="curvature",
    type=click.Choice([*CRITERIA, "all"]),
    help="Критерий бифуркации",
)
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="JSON с результатом")
@handle_errors
def lb(alpha, sigma, T, criterion, output):
    """Длина бифуркации L_b."""
    started = time.perf_counter()
    criteria = CRITERIA if criterion == "all" else (criterion,)
    results = [bifurcation_length(alpha, sigma, T, c) for c in criteria]
    for r in results:
        click.echo(f"{r.criterion}\t{r.L_b:.10g}")
    if output is not None:
        path = write_json({"results": [r.to_dict() for r in results]}, Path(output))
        _finish(click.get_current_context(), [path], started=started)


@cli.command("alpha-critical")
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="JSON с результатом")
@handle_errors
def alpha_critical_cmd(output):
    """Критический индекс α_c и соответствующая длина (σ = T = 1)."""
    started = time.perf_counter()
    index = critical_index()
    click.echo(f"alpha_c\t{index.alpha:.10g}")
    click.echo(f"L_c\t{index.L:.10g}")
    if output is not None:
        data = {
            "alpha_c": index.alpha,
            "L_c": index.L,
            "residual_second": index.residual_second,
            "residual_fourth": index.residual_fourth,
        }
        path = write_json(data, Path(output))
        _finish(click.get_current_context(), [path], started=started)


# ═══════════════════════════════════════════════════════════════════════════════
# Monte Carlo
# ═══════════════════════════════════════════════════════════════════════════════


@cli.command()
@click.option("--alpha", "-a", required=True, type=float, help="Индекс устойчивости 0 < α ≤ 2")
@click.option("--sigma", default=1.0, type=float, help="Масштаб σ")
@click.option("--T", "T", default=1.0, type=float, help="Время T")
@click.option("--L", "L", default=None, type=float, help="Точка прибытия")
@click.option("--L-in-units-of-Lb", "L_units", default=None, type=float, help="Точка прибытия в единицах L_b")
@click.option("--d", "d", default=None, type=float, help="Граница d > 0")
@click.option("--d-in-units-of-Lb", "d_units", default=None, type=float, help="Граница в единицах L_b")
@click.option(
    "--sampler",
    default="recursive",
    type=click.Choice(["recursive", "stretched", "unconditioned"]),
    help="Семплер траекторий",
)
@click.option("--depth", default=10, type=int, help="Глубина рекурсии (recursive)")
@click.option("--dt", default=1e-4, type=float, help="Шаг по времени (stretched, unconditioned)")
@click.option("--L-thresh", "L_thresh", default=None, type=float, help="Порог отбраковки (stretched)")
@click.option("--L-thresh-in-units-of-Lb", "L_thresh_units", default=None, type=float, help="Порог в единицах L_b")
@click.option("--max-attempts", default=DEFAULT_MAX_ATTEMPTS, type=int, help="Лимит попыток на траекторию")
@click.option("--n-paths", "-n", default=100_000, type=int, help="Число траекторий")
@click.option("--seed", default=DEFAULT_SEED, type=int, help="Master seed")
@click.option("--batch-size", default=DEFAULT_BATCH_SIZE, type=int, help="Траекторий в батче")
@click.option("--n-bins", default=None, type=int, help="Гистограмма времени первого прохождения")
@click.option("--workers", "-w", default=None, type=int, help="Потоки (по умолчанию LEVY_N_WORKERS)")
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="JSON с оценкой")
@handle_errors
def crossing(
    alpha, sigma, T, L, L_units, d, d_units, sampler, depth, dt, L_thresh, L_thresh_units,
    max_attempts, n_paths, seed, batch_size, n_bins, workers, output,
):
    """Вероятность пересечения границы d (и гистограмма первого прохождения)."""
    started = time.perf_counter()
    params = StableParams(alpha=alpha, sigma=sigma)
    resolved: dict[str, float] = {}
    L = _resolve_length("L", L, L_units, params, T, resolved, default=0.0)
    d = _resolve_length("d", d, d_units, params, T, resolved)
    if d is None:
        raise click.UsageError("нужна граница: --d или --d-in-units-of-Lb")
    if sampler == "recursive":
        sampler_config = RecursiveSampler(depth=depth)
    elif sampler == "stretched":
        L_thresh = _resolve_length("L_thresh", L_thresh, L_thresh_units, params, T, resolved, default=math.inf)
        sampler_config = StretchedSampler(dt=dt, L_thresh=L_thresh, max_attempts=max_attempts)
    else:
        sampler_config = UnconditionedSampler(dt=dt)
    experiment = CrossingExperiment(
        params=params,
        T=T,
        L=L,
        d=d,
        sampler=sampler_config,
        n_paths=n_paths,
        seed=seed,
        batch_size=batch_size,
    )
    n_workers = workers or get_settings().n_workers

    if n_bins is None:
        estimate = crossing_probability(experiment, n_workers=n_workers, progress=True)
        click.echo(f"{estimate.estimate:.10g}\t{estimate.stderr:.10g}\t{estimate.n_paths}")
        if output is not None:
            path = write_json(estimate.to_dict(), Path(output))
            _finish(click.get_current_context(), [path], resolved, started)
        return

    histogram = first_passage_histogram(experiment, n_bins, n_workers=n_workers, progress=True)
    click.echo(f"{histogram.crossing_fraction:.10g}\t{histogram.n_crossings}\t{histogram.n_paths}")
    if histogram.empty:
        logger.warning("Гистограмма пуста: ни одного пересечения")
    if output is not None:
        output = Path(output)
        summary = {
            "crossing_fraction": histogram.crossing_fraction,
            "n_crossings": histogram.n_crossings,
            "n": histogram.n_paths,
            "empty": histogram.empty,
            "metadata": histogram.metadata,
        }
        outputs = [
            write_json(summary, output),
            write_csv(histogram.to_frame(), output.with_name(output.stem + "_histogram.csv")),
        ]
        _finish(click.get_current_context(), outputs, resolved, started)


@cli.command("bridge-sample")
@click.option("--alpha", "-a", required=True, type=float, help="Индекс устойчивости 0 < α ≤ 2")
@click.option("--sigma", default=1.0, type=float, help="Масштаб σ")
@click.option("--T", "T", default=1.0, type=float, help="Время прибытия T")
@click.option("--L", "L", default=None, type=float, help="Точка прибытия")
@click.option("--L-in-units-of-Lb", "L_units", default=None, type=float, help="Точка прибытия в единицах L_b")
@click.option("--sampler", default="recursive", type=click.Choice(["recursive", "stretched"]), help="Семплер")
@click.option("--depth", default=10, type=int, help="Глубина рекурсии")
@click.option("--dt", default=1e-3, type=float, help="Шаг (stretched)")
@click.option("--L-thresh", "L_thresh", default=None, type=float, help="Порог отбраковки (stretched, по умолчанию без отбраковки)")
@click.option("--max-attempts", default=DEFAULT_MAX_ATTEMPTS, type=int, help="Лимит попыток на траекторию")
@click.option("--n-paths", "-n", default=10, type=int, help="Число траекторий")
@click.option("--seed", default=DEFAULT_SEED, type=int, help="Master seed; траектория i использует поток i")
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "npz", "both"]), help="Формат ансамбля")
@click.option("--workers", "-w", default=None, type=int, help="Потоки (по умолчанию LEVY_N_WORKERS)")
@click.option("--output", "-o", required=True, type=click.Path(path_type=Path), help="Файл ансамбля")
@handle_errors
def bridge_sample(
    alpha, sigma, T, L, L_units, sampler, depth, dt, L_thresh, max_attempts, n_paths, seed, fmt, workers, output
):
    """Ансамбль мостов с идентификаторами потоков."""
    started = time.perf_counter()
    params = StableParams(alpha=alpha, sigma=sigma)
    resolved: dict[str, float] = {}
    L = _resolve_length("L", L, L_units, params, T, resolved, default=0.0)
    spec = BridgeSpec(params=params, T=T, L=L)
    threshold = math.inf if L_thresh is None else L_thresh
    if n_paths < 1:
        raise DomainError(f"нужна хотя бы одна траектория: {n_paths}")

    def one(i: int):
        rng = RngStream(seed, i)
        if sampler == "recursive":
            return sample_bridge_recursive(spec, depth, rng)
        path, _ = sample_bridge_stretched(spec, dt, threshold, rng, max_attempts)
        return path

    n_workers = workers or get_settings().n_workers
    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as pool:
        paths = list(pool.map(one, range(n_paths)))

    header = {"alpha": alpha, "sigma": sigma, "T": T, "L": L, "sampler": sampler, "seed": seed}
    header.update({"depth": depth} if sampler == "recursive" else {"dt": dt, "L_thresh": threshold})
    ensemble = Ensemble.from_paths(paths, header=header)

    output = Path(output)
    outputs: list[Path] = []
    if fmt in ("csv", "both"):
        outputs.append(write_csv(ensemble.to_frame(), output.with_suffix(".csv")))
    if fmt in ("npz", "both"):
        outputs.append(write_ensemble(ensemble, output.with_suffix(".npz")))
    click.echo(f"{ensemble.n_paths} траекторий по {ensemble.times.size} точек -> {', '.join(map(str, outputs))}")
    _finish(click.get_current_context(), outputs, resolved, started)


# ═══════════════════════════════════════════════════════════════════════════════
# Фигуры и повтор запусков
# ═══════════════════════════════════════════════════════════════════════════════


def load_figure_config(name: str, scale: str, overrides: list[str] | tuple[str, ...] = ()) -> FigureConfig:
    """Композиция Hydra conf/config.yaml + scale + figure, валидация в FigureConfig."""
    with initialize_config_dir(config_dir=str(CONF_DIR), version_base=None):
        cfg = compose(config_name="config", overrides=[f"figure={name}", f"scale={scale}", *overrides])
    return FigureConfig.from_hydra(cfg)


@cli.command()
@click.argument("name", type=click.Choice(["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"]))
@click.option("--scale", default="desk", type=click.Choice(["desk", "paper"]), help="Масштаб Monte Carlo")
@click.option("--set", "overrides", multiple=True, help="Hydra override, например figure.n_L=40")
@click.option("--workers", "-w", default=None, type=int, help="Потоки (по умолчанию LEVY_N_WORKERS)")
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="Директория набора")
@handle_errors
def figure(name, scale, overrides, workers, output):
    """Набор CSV/JSON для фигуры; status.json с состоянием панелей."""
    started = time.perf_counter()
    config = load_figure_config(name, scale, overrides)
    out = Path(output) if output is not None else get_settings().output_dir / name
    run = build_figure(config, out, n_workers=workers or get_settings().n_workers)
    monitoring = click.get_current_context().find_root().obj
    if isinstance(monitoring, MonitoringLogger):
        for panel in run.panels:
            monitoring.log_metrics(panel.metrics, prefix=panel.name)

    outputs = [out / f for panel in run.panels for f in panel.outputs] + [out / "status.json"]
    status = run.status
    _finish(
        click.get_current_context(),
        outputs,
        started=started,
        status=status,
        manifest=out / f"{name}.manifest.json",
    )
    click.echo(f"{name}: {status}, {len(run.panels) - len(run.failed)}/{len(run.panels)} панелей -> {out}")
    if status != "success":
        click.get_current_context().exit(PARTIAL_BUNDLE_EXIT_CODE)


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--output", "-o", default=None, type=click.Path(path_type=Path), help="Новый путь вывода")
@click.pass_context
@handle_errors
def rerun(ctx: click.Context, manifest: Path, output: Path | None):
    """Повтор запуска по JSON манифесту."""
    record = read_manifest(manifest)
    command = cli.get_command(ctx, record.config.command)
    if command is None or command.name == "rerun":
        raise DomainError(f"манифест ссылается на неизвестную команду: {record.config.command}")
    args = dict(record.config.args)
    if output is not None:
        args["output"] = str(output)
    logger.info(f"Повтор {record.config.command} из {manifest}")
    ctx.invoke(command, **args)
