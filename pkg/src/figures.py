"""
Наборы данных для фигур fig1..fig6 (CSV/JSON, без построения графиков).

Каждая панель собирается в контексте RunMonitor: ошибка панели
записывается в status.json, остальные панели продолжают строиться.
"""

import math
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from src.artifacts import Ensemble, write_csv, write_ensemble, write_json
from src.config import LB_ASYMPTOTE_MAX_DELTA
from src.errors import DomainError
from src.levy.bifurcation import (
    CRITERIA,
    bifurcation_diagram,
    bifurcation_length,
    cauchy_critical_points,
    critical_index,
    diagram_grid,
    lb_asymptote,
    midpoint_extrema,
)
from src.levy.bridge_kernel import (
    effective_jump_census,
    jump_counts,
    long_jump_threshold,
    midpoint_pdf,
    sample_bridge_recursive,
    sample_unconditioned_path,
    unconditioned_batch,
)
from src.levy.passage import (
    first_passage_histogram,
    gaussian_bridge_fp_bins,
    gaussian_bridge_fp_density,
    observation_times,
    threshold_sweep,
    uniformity_pvalue,
)
from src.levy.rng import RngStream
from src.levy.stable_core import StableDensity
from src.monitoring.run_monitor import BundleRun, RunMonitor
from src.schemas.experiment import CrossingExperiment, RecursiveSampler, StretchedSampler
from src.schemas.process import BridgeSpec, StableParams
from src.schemas.run_config import FigureConfig

FigureBuilder = Callable[[FigureConfig, Path, RunMonitor, int], None]


def _lb(alpha: float, sigma: float, T: float) -> float:
    return bifurcation_length(alpha, sigma, T, "curvature").L_b


def _record(panel, path: Path) -> Path:
    panel.outputs.append(path.name)
    return path


# ═══════════════════════════════════════════════════════════════════════════════
# fig1: траектория без условия с длинными скачками
# ═══════════════════════════════════════════════════════════════════════════════


def build_fig1(config: FigureConfig, out: Path, monitor: RunMonitor, n_workers: int = 1) -> None:
    """Траектория с шагом T/n_steps_path и перепись скачков > L_b (Δt/T)^{1/α}."""
    dt = config.T / config.n_steps_path
    for i, alpha in enumerate(config.alphas):
        params = StableParams(alpha=alpha, sigma=config.sigma)
        with monitor.panel(f"path_alpha_{alpha}") as panel:
            path = sample_unconditioned_path(params, config.T, dt, RngStream(config.seed, i))
            census = effective_jump_census(path, params)
            frame = path.to_frame()
            flags = np.zeros(path.n_points, dtype=bool)
            flags[census.indices + 1] = True
            frame.insert(0, "alpha", alpha)
            frame["long_jump"] = flags
            _record(panel, write_csv(frame, out / f"fig1_path_alpha{alpha}.csv"))
            panel.metrics["long_jumps"] = census.count

        with monitor.panel(f"census_alpha_{alpha}") as panel:
            threshold = long_jump_threshold(params, config.T, dt)
            n_paths = max(1, config.scale.n_paths // 100)
            ensemble = unconditioned_batch(
                params, config.T, dt, n_paths, RngStream(config.seed, len(config.alphas) + i)
            )
            counts = jump_counts(ensemble, threshold)
            step = StableDensity(params, dt)
            expected = config.n_steps_path * 2.0 * float(step.sf(threshold))
            summary = {
                "alpha": alpha,
                "dt": dt,
                "threshold": threshold,
                "n_paths": n_paths,
                "mean_long_jumps": float(counts.mean()),
                "stderr": float(counts.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.nan,
                "expected_long_jumps": expected,
            }
            _record(panel, write_json(summary, out / f"fig1_census_alpha{alpha}.json"))
            panel.metrics["mean_long_jumps"] = summary["mean_long_jumps"]


# ═══════════════════════════════════════════════════════════════════════════════
# fig2: диаграмма бифуркаций
# ═══════════════════════════════════════════════════════════════════════════════


def _exact_column(frame: pd.DataFrame, alpha: float, sigma: float, T: float) -> pd.Series:
    """Точные положения экстремумов для α = 1 (NaN для других α или при расхождении числа точек)."""
    exact = np.full(len(frame), np.nan)
    if alpha != 1.0:
        return pd.Series(exact, index=frame.index)
    for L, idx in frame.groupby("L", sort=False).groups.items():
        points = cauchy_critical_points(L, sigma, T)
        if len(points) == len(idx):
            order = frame.loc[idx, "x"].argsort().to_numpy()
            exact[np.asarray(idx)[order]] = points
    return pd.Series(exact, index=frame.index)


def build_fig2(config: FigureConfig, out: Path, monitor: RunMonitor, n_workers: int = 1) -> None:
    """Экстремумы плотности середины вдоль L и плотности до/после бифуркации."""
    for alpha in config.alphas:
        unit = config.sigma * config.T ** (1.0 / alpha)
        with monitor.panel(f"diagram_alpha_{alpha}") as panel:
            grid = diagram_grid(config.L_min * unit, config.L_max * unit, config.n_L)
            diagram = bifurcation_diagram(alpha, config.sigma, config.T, grid, n_workers=n_workers)
            frame = diagram.to_frame()
            frame.insert(0, "alpha", alpha)
            frame["x_exact"] = _exact_column(frame, alpha, config.sigma, config.T)
            _record(panel, write_csv(frame, out / f"fig2_diagram_alpha{alpha}.csv"))
            _record(panel, write_csv(diagram.events_frame(), out / f"fig2_events_alpha{alpha}.csv"))
            panel.metrics["events"] = len(diagram.events)

        with monitor.panel(f"inset_alpha_{alpha}") as panel:
            lb = _lb(alpha, config.sigma, config.T)
            rows = []
            for factor in config.L_factors or [0.5, 2.0]:
                spec = BridgeSpec(params=StableParams(alpha=alpha, sigma=config.sigma), T=config.T, L=factor * lb)
                span = max(abs(spec.L), 4.0 * spec.half_scale)
                x = np.linspace(spec.L / 2.0 - span, spec.L / 2.0 + span, config.n_x)
                rows.append(
                    pd.DataFrame({"L_factor": factor, "L": spec.L, "x": x, "density": midpoint_pdf(spec, x)})
                )
            _record(panel, write_csv(pd.concat(rows, ignore_index=True), out / f"fig2_inset_alpha{alpha}.csv"))


# ═══════════════════════════════════════════════════════════════════════════════
# fig3: плотности середины по α и L
# ═══════════════════════════════════════════════════════════════════════════════


def build_fig3(config: FigureConfig, out: Path, monitor: RunMonitor, n_workers: int = 1) -> None:
    """Сетка плотностей m(x) по (α, L = k·L_b) и их экстремумы."""
    for alpha in config.alphas:
        with monitor.panel(f"densities_alpha_{alpha}") as panel:
            params = StableParams(alpha=alpha, sigma=config.sigma)
            lb = _lb(alpha, config.sigma, config.T)
            curves, points = [], []
            for factor in config.L_factors:
                spec = BridgeSpec(params=params, T=config.T, L=factor * lb)
                span = max(abs(spec.L), 4.0 * spec.half_scale)
                x = np.linspace(spec.L / 2.0 - span, spec.L / 2.0 + span, config.n_x)
                curves.append(
                    pd.DataFrame(
                        {"alpha": alpha, "L_factor": factor, "L": spec.L, "x": x, "density": midpoint_pdf(spec, x)}
                    )
                )
                for p in midpoint_extrema(spec).points:
                    points.append(
                        {
                            "alpha": alpha,
                            "L_factor": factor,
                            "L": spec.L,
                            "x": p.x,
                            "type": p.kind,
                            "density": float(midpoint_pdf(spec, p.x)),
                        }
                    )
            _record(panel, write_csv(pd.concat(curves, ignore_index=True), out / f"fig3_density_alpha{alpha}.csv"))
            _record(panel, write_csv(pd.DataFrame(points), out / f"fig3_extrema_alpha{alpha}.csv"))


# ═══════════════════════════════════════════════════════════════════════════════
# fig4: L_b(α) по трём критериям
# ═══════════════════════════════════════════════════════════════════════════════


def build_fig4(config: FigureConfig, out: Path, monitor: RunMonitor, n_workers: int = 1) -> None:
    """Кривые L_b(α) для curvature, tangent, equal_height и маркер α_c."""
    with monitor.panel("alpha_critical") as panel:
        index = critical_index()
        marker = {
            "alpha_c": index.alpha,
            "L_c": index.L * config.sigma * config.T ** (1.0 / index.alpha),
            "residual_second": index.residual_second,
            "residual_fourth": index.residual_fourth,
        }
        _record(panel, write_json(marker, out / "fig4_alpha_critical.json"))

    with monitor.panel("lb_curves") as panel:
        alphas = np.linspace(config.alpha_min, config.alpha_max, config.n_alpha)
        rows = []
        for alpha in alphas:
            alpha = float(alpha)
            delta = 2.0 - alpha
            asymptote = lb_asymptote(delta, config.sigma, config.T) if delta <= LB_ASYMPTOTE_MAX_DELTA else math.nan
            for criterion in CRITERIA:
                row = {"alpha": alpha, "criterion": criterion, "L_b": math.nan, "residual": math.nan}
                try:
                    result = bifurcation_length(alpha, config.sigma, config.T, criterion)
                    row.update(L_b=result.L_b, residual=result.residual, status="ok")
                except DomainError:
                    row["status"] = "undefined"
                row["asymptote"] = asymptote
                rows.append(row)
        frame = pd.DataFrame(rows, columns=["alpha", "criterion", "L_b", "residual", "status", "asymptote"])
        _record(panel, write_csv(frame, out / "fig4_lb_curves.csv"))
        panel.metrics["points"] = int((frame["status"] == "ok").sum())


# ═══════════════════════════════════════════════════════════════════════════════
# fig5: развёртка по L_thresh и образцы мостов
# ═══════════════════════════════════════════════════════════════════════════════


def build_fig5(config: FigureConfig, out: Path, monitor: RunMonitor, n_workers: int = 1) -> None:
    """Вероятность пересечения d = σT^{1/α} при убывающем L_thresh; мосты при L = k·L_b."""
    frames = []
    for alpha in config.alphas:
        with monitor.panel(f"sweep_alpha_{alpha}") as panel:
            params = StableParams(alpha=alpha, sigma=config.sigma)
            base = CrossingExperiment(
                params=params,
                T=config.T,
                L=0.0,
                d=params.scale(config.T),
                sampler=StretchedSampler(dt=config.scale.dt),
                n_paths=config.scale.n_paths,
                seed=config.seed,
                batch_size=config.scale.batch_size,
            )
            sweep = threshold_sweep(
                [alpha],
                config.threshold_grid(),
                base,
                reference_depth=config.scale.depth,
                n_workers=n_workers,
            )
            frame = sweep.to_frame()
            frames.append(frame)
            failed = frame[frame["status"] != "ok"]
            if not failed.empty:
                panel.metrics["exhausted_cells"] = len(failed)
    if frames:
        with monitor.panel("sweep_table") as panel:
            _record(panel, write_csv(pd.concat(frames, ignore_index=True), out / "fig5_sweep.csv"))

    with monitor.panel("bridge_paths") as panel:
        params = StableParams(alpha=config.path_alpha, sigma=config.sigma)
        lb = _lb(config.path_alpha, config.sigma, config.T)
        for factor in config.L_factors or [0.5, 1.0, 1.5]:
            spec = BridgeSpec(params=params, T=config.T, L=factor * lb)
            paths = [
                sample_bridge_recursive(spec, config.scale.depth, RngStream(config.seed, i))
                for i in range(config.n_sample_paths)
            ]
            ensemble = Ensemble.from_paths(
                paths, header={"alpha": config.path_alpha, "L": spec.L, "L_factor": factor, "depth": config.scale.depth}
            )
            frame = ensemble.to_frame()
            frame.insert(0, "L_factor", factor)
            _record(panel, write_csv(frame, out / f"fig5_paths_L{factor}Lb.csv"))
            _record(panel, write_ensemble(ensemble, out / f"fig5_paths_L{factor}Lb.npz"))


# ═══════════════════════════════════════════════════════════════════════════════
# fig6: времена первого прохождения
# ═══════════════════════════════════════════════════════════════════════════════


def build_fig6(config: FigureConfig, out: Path, monitor: RunMonitor, n_workers: int = 1) -> None:
    """
    Гистограммы первого прохождения d = L/2 для L = k·L_b(α).

    Для каждого L добавляются симуляция при α = 2 и точная гауссова плотность.
    """
    alpha = config.alphas[0]
    lb = _lb(alpha, config.sigma, config.T)
    n_bins = config.scale.n_bins
    histograms, exact = [], []
    for factor in config.L_factors or [0.1, 2.0]:
        L = factor * lb
        d = L / 2.0
        for sim_alpha in (alpha, 2.0):
            with monitor.panel(f"histogram_alpha_{sim_alpha}_L{factor}Lb") as panel:
                experiment = CrossingExperiment(
                    params=StableParams(alpha=sim_alpha, sigma=config.sigma),
                    T=config.T,
                    L=L,
                    d=d,
                    sampler=RecursiveSampler(depth=config.scale.depth),
                    n_paths=config.scale.n_paths,
                    seed=config.seed,
                    batch_size=config.scale.batch_size,
                )
                histogram = first_passage_histogram(experiment, n_bins, n_workers=n_workers)
                frame = histogram.to_frame()
                frame.insert(0, "alpha", sim_alpha)
                frame.insert(1, "L_factor", factor)
                frame.insert(2, "L", L)
                frame.insert(3, "d", d)
                frame["exact_probability"] = gaussian_bridge_fp_bins(d, L, config.sigma, config.T, histogram.edges)
                histograms.append(frame)
                if not histogram.empty:
                    panel.metrics["uniformity_pvalue"] = uniformity_pvalue(histogram, observation_times(experiment))

        with monitor.panel(f"exact_L{factor}Lb") as panel:
            t = np.linspace(0.0, config.T, config.n_x)[1:-1]
            exact.append(
                pd.DataFrame(
                    {
                        "L_factor": factor,
                        "L": L,
                        "d": d,
                        "t": t,
                        "density": gaussian_bridge_fp_density(d, L, config.sigma, config.T, t),
                    }
                )
            )

    with monitor.panel("tables") as panel:
        if not histograms:
            raise DomainError("нет ни одной гистограммы")
        _record(panel, write_csv(pd.concat(histograms, ignore_index=True), out / "fig6_histograms.csv"))
        if exact:
            _record(panel, write_csv(pd.concat(exact, ignore_index=True), out / "fig6_exact.csv"))


FIGURE_BUILDERS: dict[str, FigureBuilder] = {
    "fig1": build_fig1,
    "fig2": build_fig2,
    "fig3": build_fig3,
    "fig4": build_fig4,
    "fig5": build_fig5,
    "fig6": build_fig6,
}


def build_figure(config: FigureConfig, output_dir: Path | str, n_workers: int = 1) -> BundleRun:
    """
    Сборка набора данных одной фигуры.

    Returns:
        BundleRun со статусами панелей (status.json записан в output_dir)
    """
    out = Path(output_dir)
    monitor = RunMonitor(config.name, out, metadata={"scale": config.scale.name, "seed": config.seed})
    FIGURE_BUILDERS[config.name](config, out, monitor, n_workers)
    run = monitor.finish()
    if run.status != "success":
        logger.warning(f"{config.name}: панели с ошибками: {[p.name for p in run.failed]}")
    return run
