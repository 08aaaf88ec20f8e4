"""
Пересечение границы и время первого прохождения: Monte Carlo и гауссовы оракулы.

Пересечение определяется в узлах сетки: первый индекс, где x(t_i) > d
(строгое превышение). Траектории генерируются батчами фиксированного
размера; батч b всегда использует поток RngStream(seed, b), а редукция
сводится к целочисленным суммам, поэтому результат не зависит от числа
потоков выполнения.
"""

import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from scipy import integrate, special, stats
from tqdm.auto import tqdm

from src.config import DEFAULT_BATCH_SIZE, DEFAULT_SEED
from src.errors import DivergenceError, DomainError, RejectionExhaustedError
from src.levy.bifurcation import bifurcation_length
from src.levy.bridge_kernel import (
    dyadic_times,
    recursive_bridge_batch,
    stretched_bridge_batch,
    unconditioned_batch,
    uniform_times,
)
from src.levy.rng import RngStream
from src.schemas.experiment import (
    CrossingExperiment,
    RecursiveSampler,
    StretchedSampler,
    UnconditionedSampler,
)
from src.schemas.process import StableParams

CROSSING_RULE = "strict"

# β = -ζ(1/2)/√(2π): сдвиг границы при дискретном мониторинге
DISCRETE_MONITORING_BETA = 0.5825971579390106


@dataclass(frozen=True)
class McEstimate:
    """Оценка вероятности с биномиальной стандартной ошибкой."""

    estimate: float
    stderr: float
    n_paths: int
    n_hits: int
    metadata: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_counts(cls, n_hits: int, n_paths: int, metadata: dict[str, Any] | None = None) -> "McEstimate":
        if n_paths <= 0:
            return cls(math.nan, math.nan, 0, 0, dict(metadata or {}))
        p = n_hits / n_paths
        return cls(p, math.sqrt(p * (1.0 - p) / n_paths), n_paths, n_hits, dict(metadata or {}))

    def combined_stderr(self, other: "McEstimate") -> float:
        return math.hypot(self.stderr, other.stderr)

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "n": self.n_paths,
            "n_hits": self.n_hits,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class FirstPassageHistogram:
    """Гистограмма времён первого прохождения среди пересекших траекторий."""

    edges: np.ndarray
    counts: np.ndarray
    n_paths: int
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n_crossings(self) -> int:
        return int(self.counts.sum())

    @property
    def crossing_fraction(self) -> float:
        return self.n_crossings / self.n_paths if self.n_paths else math.nan

    @property
    def empty(self) -> bool:
        return self.n_crossings == 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        """Плотность, нормированная на число пересекших (нули, если их нет)."""
        if self.empty:
            return np.zeros_like(self.widths)
        return self.counts / (self.n_crossings * self.widths)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t_lo": self.edges[:-1],
                "t_hi": self.edges[1:],
                "count": self.counts,
                "density": self.density,
            }
        )


# ═══════════════════════════════════════════════════════════════════════════════
# Генерация батчей
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass
class _BatchTally:
    n_paths: int
    n_hits: int
    attempts: int
    fp_counts: np.ndarray | None = None


def batch_sizes(n_paths: int, batch_size: int) -> list[int]:
    """Размеры батчей: полные батчи и остаток."""
    full, rest = divmod(n_paths, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def observation_times(experiment: CrossingExperiment) -> np.ndarray:
    sampler = experiment.sampler
    if isinstance(sampler, RecursiveSampler):
        return dyadic_times(experiment.T, sampler.depth)
    return uniform_times(experiment.T, sampler.dt)


def generate_batch(experiment: CrossingExperiment, batch_index: int, size: int) -> tuple[np.ndarray, int]:
    """
    Позиции одного батча и число попыток.

    Returns:
        (positions (size, n_steps + 1), attempts)
    """
    rng = RngStream(experiment.seed, batch_index)
    sampler = experiment.sampler
    if isinstance(sampler, RecursiveSampler):
        return recursive_bridge_batch(experiment.spec, sampler.depth, size, rng), size
    if isinstance(sampler, StretchedSampler):
        batch = stretched_bridge_batch(
            experiment.spec, sampler.dt, sampler.L_thresh, size, rng, sampler.max_attempts
        )
        return batch.positions, batch.attempts
    return unconditioned_batch(experiment.params, experiment.T, sampler.dt, size, rng), size


def first_crossing_index(positions: np.ndarray, d: float) -> np.ndarray:
    """Индекс первого узла с x > d; -1 для траекторий без пересечения."""
    hits = positions > d
    first = hits.argmax(axis=-1)
    return np.where(hits.any(axis=-1), first, -1)


def _tally(
    experiment: CrossingExperiment,
    batch_index: int,
    size: int,
    times: np.ndarray,
    edges: np.ndarray | None,
) -> _BatchTally:
    positions, attempts = generate_batch(experiment, batch_index, size)
    first = first_crossing_index(positions, experiment.d)
    crossed = first >= 0
    fp_counts = None
    if edges is not None:
        fp_counts, _ = np.histogram(times[first[crossed]], bins=edges)
    return _BatchTally(size, int(crossed.sum()), attempts, fp_counts)


def _metadata(experiment: CrossingExperiment, attempts: int, n_paths: int) -> dict[str, Any]:
    return {
        "sampler": experiment.sampler.model_dump(mode="json"),
        "n_steps": experiment.n_steps,
        "conditioned": experiment.conditioned,
        "alpha": experiment.params.alpha,
        "sigma": experiment.params.sigma,
        "T": experiment.T,
        "L": experiment.L if experiment.conditioned else None,
        "d": experiment.d,
        "seed": experiment.seed,
        "batch_size": experiment.batch_size,
        "crossing_rule": CROSSING_RULE,
        "attempts": attempts,
        "acceptance_rate": n_paths / attempts if attempts else math.nan,
    }


def _run(
    experiment: CrossingExperiment,
    edges: np.ndarray | None = None,
    n_workers: int = 1,
    progress: bool = False,
) -> tuple[int, int, int, np.ndarray | None]:
    """
    Прогон всех батчей эксперимента с целочисленной редукцией.

    Raises:
        RejectionExhaustedError: с частичной оценкой по завершённым батчам
    """
    times = observation_times(experiment)
    sizes = batch_sizes(experiment.n_paths, experiment.batch_size)
    n_done = n_hits = attempts = 0
    fp_total = np.zeros(len(edges) - 1, dtype=np.int64) if edges is not None else None
    started = time.perf_counter()

    def work(item: tuple[int, int]) -> _BatchTally:
        return _tally(experiment, item[0], item[1], times, edges)

    items = list(enumerate(sizes))
    bar = tqdm(total=len(items), desc="batches", disable=not progress, leave=False)
    try:
        with ThreadPoolExecutor(max_workers=max(1, n_workers)) as pool:
            results = pool.map(work, items) if n_workers > 1 else map(work, items)
            for batch_index, _ in items:
                try:
                    tally = next(results)
                except RejectionExhaustedError as exc:
                    partial = McEstimate.from_counts(
                        n_hits, n_done, _metadata(experiment, attempts + exc.attempts, n_done)
                    )
                    logger.warning(
                        f"Батч {batch_index}: исчерпаны попытки, частичная оценка по {n_done} траекториям"
                    )
                    raise RejectionExhaustedError(
                        f"батч {batch_index}: {exc}",
                        attempts=attempts + exc.attempts,
                        accepted=n_done + exc.accepted,
                        partial=partial,
                    ) from exc
                n_done += tally.n_paths
                n_hits += tally.n_hits
                attempts += tally.attempts
                if fp_total is not None:
                    fp_total += tally.fp_counts
                bar.update(1)
    finally:
        bar.close()

    logger.debug(
        f"{experiment.sampler.kind}: {n_done} траекторий, {len(items)} батчей, "
        f"{time.perf_counter() - started:.2f} с"
    )
    return n_done, n_hits, attempts, fp_total


# ═══════════════════════════════════════════════════════════════════════════════
# Оценки вероятности пересечения и времени первого прохождения
# ═══════════════════════════════════════════════════════════════════════════════


def crossing_probability(
    experiment: CrossingExperiment,
    n_workers: int = 1,
    progress: bool = False,
) -> McEstimate:
    """
    Доля траекторий с max x(t_i) > d.

    Raises:
        RejectionExhaustedError: растянутый семплер исчерпал попытки;
            partial содержит McEstimate по завершённым батчам
    """
    n_done, n_hits, attempts, _ = _run(experiment, None, n_workers, progress)
    result = McEstimate.from_counts(n_hits, n_done, _metadata(experiment, attempts, n_done))
    logger.info(
        f"METRIC: P_cross = {result.estimate:.6f} ± {result.stderr:.6f} "
        f"(α={experiment.params.alpha}, d={experiment.d}, {experiment.sampler.kind})"
    )
    return result


def crossing_probability_unconditioned(
    params: StableParams,
    T: float,
    d: float,
    dt: float,
    n_paths: int,
    seed: int = DEFAULT_SEED,
    batch_size: int = DEFAULT_BATCH_SIZE,
    n_workers: int = 1,
    progress: bool = False,
) -> McEstimate:
    """Вероятность пересечения для процесса без условия на x(T)."""
    experiment = CrossingExperiment(
        params=params,
        T=T,
        d=d,
        sampler=UnconditionedSampler(dt=dt),
        n_paths=n_paths,
        seed=seed,
        batch_size=batch_size,
    )
    return crossing_probability(experiment, n_workers=n_workers, progress=progress)


def first_passage_histogram(
    experiment: CrossingExperiment,
    n_bins: int,
    n_workers: int = 1,
    progress: bool = False,
) -> FirstPassageHistogram:
    """
    Гистограмма времён первого строгого превышения d на [0, T].

    Пустой результат (ни одного пересечения) помечается флагом empty.
    """
    if n_bins < 2:
        raise DomainError(f"нужно хотя бы 2 бина, получено: {n_bins}")
    edges = np.linspace(0.0, experiment.T, n_bins + 1)
    n_done, n_hits, attempts, fp_counts = _run(experiment, edges, n_workers, progress)
    histogram = FirstPassageHistogram(
        edges=edges,
        counts=fp_counts,
        n_paths=n_done,
        metadata=_metadata(experiment, attempts, n_done),
    )
    if histogram.empty:
        logger.warning(f"Ни одна из {n_done} траекторий не пересекла d={experiment.d}")
    else:
        logger.info(f"METRIC: crossing_fraction = {histogram.crossing_fraction:.6f}")
    return histogram


def uniformity_pvalue(histogram: FirstPassageHistogram, times: np.ndarray) -> float:
    """
    p-значение хи-квадрат для равномерного времени первого прохождения.

    Пересечение фиксируется только в узлах t_i > 0, поэтому ожидаемые
    частоты пропорциональны числу узлов в бине.
    """
    if histogram.empty:
        raise DomainError("гистограмма пуста: нет пересечений")
    nodes, _ = np.histogram(np.asarray(times)[1:], bins=histogram.edges)
    used = nodes > 0
    expected = histogram.n_crossings * nodes[used] / nodes.sum()
    return float(stats.chisquare(histogram.counts[used], expected).pvalue)


# ═══════════════════════════════════════════════════════════════════════════════
# Гауссовы оракулы (α = 2, дисперсия 2σ²t)
# ═══════════════════════════════════════════════════════════════════════════════


def discrete_monitoring_shift(sigma: float, dt: float) -> float:
    """Сдвиг границы β s √Δt, s = σ√2, для мониторинга в узлах с шагом Δt."""
    return DISCRETE_MONITORING_BETA * sigma * math.sqrt(2.0 * dt)


def gaussian_bridge_fp_density(d: float, L: float, sigma: float, T: float, t):
    """
    Плотность времени первого достижения d броуновским мостом 0 -> L.

    Произведение плотности первого достижения d и перехода d -> L за T - t,
    делённое на плотность перехода 0 -> L за T. При d > L интеграл по
    [0, T] равен exp(-d(d - L)/(σ²T)); при d ≤ L достижение d неизбежно
    и интеграл равен 1.
    """
    if not d > 0.0:
        raise DomainError(f"граница должна быть положительной: d={d}")
    if not (sigma > 0.0 and T > 0.0):
        raise DomainError(f"ожидались σ > 0 и T > 0, получено: σ={sigma}, T={T}")
    tt = np.asarray(t, dtype=float)
    if np.any((tt <= 0.0) | (tt >= T)):
        raise DomainError(f"время должно лежать в (0, T), T={T}")
    s2 = 2.0 * sigma**2
    rest = T - tt
    log_density = (
        math.log(d)
        - 0.5 * np.log(2.0 * math.pi * s2 * tt**3)
        - d**2 / (2.0 * s2 * tt)
        - 0.5 * np.log(2.0 * math.pi * s2 * rest)
        - (L - d) ** 2 / (2.0 * s2 * rest)
        + 0.5 * math.log(2.0 * math.pi * s2 * T)
        + L**2 / (2.0 * s2 * T)
    )
    density = np.exp(log_density)
    return float(density) if density.ndim == 0 else density


def gaussian_bridge_crossing_prob(
    d: float,
    L: float,
    sigma: float = 1.0,
    T: float = 1.0,
    dt: float | None = None,
) -> float:
    """
    exp(-d(d - L)/(σ²T)) для броуновского моста 0 -> L.

    С dt граница сдвигается на β σ √(2Δt) (мониторинг в узлах).
    """
    if d <= max(0.0, L):
        raise DomainError(f"нужно d > max(0, L): d={d}, L={L}")
    level = d if dt is None else d + discrete_monitoring_shift(sigma, dt)
    return math.exp(-level * (level - L) / (sigma**2 * T))


def brownian_crossing_prob(d: float, sigma: float = 1.0, T: float = 1.0, dt: float | None = None) -> float:
    """P(max x > d) = erfc(d / (2σ√T)) для броуновского движения без условия."""
    if not d > 0.0:
        raise DomainError(f"граница должна быть положительной: d={d}")
    level = d if dt is None else d + discrete_monitoring_shift(sigma, dt)
    return float(special.erfc(level / (2.0 * sigma * math.sqrt(T))))


def gaussian_bridge_fp_bins(d: float, L: float, sigma: float, T: float, edges: Sequence[float]) -> np.ndarray:
    """Вероятности первого достижения d в каждом бине (интегралы плотности)."""
    edges = np.asarray(edges, dtype=float)
    if edges[0] < 0.0 or edges[-1] > T or np.any(np.diff(edges) <= 0.0):
        raise DomainError("границы бинов должны возрастать внутри [0, T]")
    probs = np.empty(edges.size - 1)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        probs[i], _ = integrate.quad(
            lambda s: gaussian_bridge_fp_density(d, L, sigma, T, s),
            lo,
            hi,
            epsabs=1e-13,
            epsrel=1e-11,
            limit=200,
        )
    return probs


# ═══════════════════════════════════════════════════════════════════════════════
# Развёртка по порогу отбраковки
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class SweepCell:
    """Одна ячейка развёртки (α, L_thresh)."""

    alpha: float
    L_thresh: float
    L_thresh_units: float
    unit: str
    status: str
    estimate: McEstimate | None = None
    acceptance_rate: float = math.nan
    message: str = ""


@dataclass
class ThresholdSweep:
    """Таблица оценок пересечения и эталонов рекурсивного семплера."""

    cells: list[SweepCell]
    references: dict[float, McEstimate]

    def reference(self, alpha: float) -> McEstimate:
        return self.references[alpha]

    def cell(self, alpha: float, L_thresh_units: float) -> SweepCell:
        return next(
            c for c in self.cells if c.alpha == alpha and c.L_thresh_units == L_thresh_units
        )

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for c in self.cells:
            est = c.estimate
            rows.append(
                {
                    "alpha": c.alpha,
                    "L_thresh": c.L_thresh,
                    "estimate": est.estimate if est else math.nan,
                    "stderr": est.stderr if est else math.nan,
                    "n": est.n_paths if est else 0,
                    "L_thresh_units": c.L_thresh_units,
                    "unit": c.unit,
                    "acceptance_rate": c.acceptance_rate,
                    "sampler": "stretched",
                    "status": c.status,
                }
            )
        for alpha, ref in self.references.items():
            rows.append(
                {
                    "alpha": alpha,
                    "L_thresh": 0.0,
                    "estimate": ref.estimate,
                    "stderr": ref.stderr,
                    "n": ref.n_paths,
                    "L_thresh_units": 0.0,
                    "unit": "",
                    "acceptance_rate": 1.0,
                    "sampler": "recursive",
                    "status": "ok",
                }
            )
        return pd.DataFrame(rows)


def length_unit(params: StableParams, T: float) -> tuple[str, float]:
    """
    Единица длины для порогов: L_b по критерию кривизны.

    При α = 2 L_b не существует; используется σ T^{1/α}.
    """
    try:
        return "L_b", bifurcation_length(params.alpha, params.sigma, T, "curvature").L_b
    except DivergenceError:
        return "natural", params.scale(T)


def threshold_sweep(
    alphas: Iterable[float],
    thresholds: Sequence[float],
    base: CrossingExperiment,
    reference_depth: int = 10,
    n_workers: int = 1,
    progress: bool = False,
) -> ThresholdSweep:
    """
    Вероятность пересечения растянутыми мостами при убывающем L_thresh.

    Пороги задаются в единицах L_b(α) (при α = 2 в единицах σT^{1/α}).
    Все ячейки используют seed базового эксперимента (общие случайные
    числа); для каждого α добавляется эталон точного рекурсивного семплера.
    Исчерпание попыток записывается в ячейку, развёртка продолжается.
    """
    if not isinstance(base.sampler, StretchedSampler):
        raise DomainError("базовый эксперимент развёртки должен использовать растянутый семплер")
    thresholds = [float(v) for v in thresholds]
    if not thresholds or any(v <= 0.0 for v in thresholds):
        raise DomainError("пороги должны быть положительными")
    if any(a <= b for a, b in zip(thresholds, thresholds[1:])):
        raise DomainError(f"сетка порогов должна строго убывать: {thresholds}")

    cells: list[SweepCell] = []
    references: dict[float, McEstimate] = {}
    for alpha in alphas:
        params = StableParams(alpha=alpha, sigma=base.params.sigma)
        experiment = base.model_copy(update={"params": params})
        unit_name, unit = length_unit(params, base.T)

        references[alpha] = crossing_probability(
            experiment.with_sampler(RecursiveSampler(depth=reference_depth)),
            n_workers=n_workers,
            progress=progress,
        )

        for units in thresholds:
            L_thresh = units * unit
            sampler = base.sampler.model_copy(update={"L_thresh": L_thresh})
            try:
                estimate = crossing_probability(
                    experiment.with_sampler(sampler), n_workers=n_workers, progress=progress
                )
            except RejectionExhaustedError as exc:
                logger.error(f"α={alpha}, L_thresh={L_thresh:.4g}: {exc}")
                cells.append(
                    SweepCell(
                        alpha=alpha,
                        L_thresh=L_thresh,
                        L_thresh_units=units,
                        unit=unit_name,
                        status="rejection_exhausted",
                        estimate=None,
                        acceptance_rate=exc.acceptance_rate,
                        message=str(exc),
                    )
                )
                continue
            cells.append(
                SweepCell(
                    alpha=alpha,
                    L_thresh=L_thresh,
                    L_thresh_units=units,
                    unit=unit_name,
                    status="ok",
                    estimate=estimate,
                    acceptance_rate=estimate.metadata["acceptance_rate"],
                )
            )
    return ThresholdSweep(cells=cells, references=references)
