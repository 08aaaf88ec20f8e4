"""
Мосты Леви: плотность средней точки, рекурсивное деление, растянутые мосты.

Плотность средней точки моста 0 -> L за время T:

    m(x) = f(x; T/2) f(L - x; T/2) / f(L; T)

В стандартизованных единицах u = x / c, c = σ (T/2)^{1/α}, λ = L / c:
m(u) ∝ g(u) g(λ - u). Рекурсивный семплер разыгрывает середины всех
под-мостов уровня одновременно точным отбором с огибающей ½g(u) + ½g(λ-u).
"""

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import pandas as pd
from loguru import logger
from scipy import special
from scipy.interpolate import CubicHermiteSpline

from src.config import DEFAULT_MAX_ATTEMPTS, TABLE_TAIL_MASS
from src.errors import AccuracyError, DomainError, RejectionExhaustedError
from src.levy.bifurcation import bifurcation_length
from src.levy.rng import RngStream, cms_standard
from src.levy.stable_core import StableDensity, StandardStableLaw, standard_law
from src.schemas.process import BridgeSpec, StableParams

# Ограничения на число предложений в одном раунде отбора
_MAX_PROPOSALS_PER_NODE = 2**20
_MAX_PROPOSALS_PER_ROUND = 2**21

# Размер блока кандидатов растянутого семплера (в числах float)
_STRETCHED_BLOCK_FLOATS = 2**23


@dataclass(frozen=True)
class Path:
    """
    Траектория: строго возрастающие времена от 0 до T и позиции.

    positions[0] = 0, positions[-1] = точка прибытия (для моста ровно L).
    """

    times: np.ndarray
    positions: np.ndarray
    stream: int | None = None
    attempts: int = 1

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        positions = np.asarray(self.positions, dtype=float)
        if times.ndim != 1 or times.shape != positions.shape:
            raise DomainError("times и positions должны быть одномерными одной длины")
        if times.size < 1 or times[0] != 0.0:
            raise DomainError("траектория должна начинаться в момент 0")
        if np.any(np.diff(times) <= 0.0):
            raise DomainError("времена траектории должны строго возрастать")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def n_points(self) -> int:
        return int(self.times.size)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.positions)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "x": self.positions})


def dyadic_times(T: float, depth: int) -> np.ndarray:
    """Времена T·j/2^depth, j = 0..2^depth; последний узел ровно T."""
    n = 2**depth
    return T * (np.arange(n + 1) / n)


def uniform_times(T: float, dt: float) -> np.ndarray:
    """Равномерная сетка с шагом dt; dt должен делить T."""
    n = n_steps_for(T, dt)
    return T * (np.arange(n + 1) / n)


def n_steps_for(T: float, dt: float) -> int:
    if not (dt > 0.0) or not math.isfinite(dt):
        raise DomainError(f"шаг dt должен быть положительным, получено: {dt}")
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise DomainError(f"dt={dt} не делит T={T} нацело")
    return n


# ═══════════════════════════════════════════════════════════════════════════════
# Плотность средней точки
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class _MidpointTable:
    """Табулированная половина плотности по w = u - λ/2 ≥ 0."""

    w_max: float
    half_core: float
    tail: float
    tail_power: float
    mass: object
    inverse: object

    @property
    def half_total(self) -> float:
        return self.half_core + self.tail


class MidpointDensity:
    """
    Условная плотность x(T/2) при x(T) = L.

    Значения считаются по таблицам стандартного закона; CDF и обратная CDF
    строятся лениво по адаптивной сетке, сгущённой у L/2 и у пиков, со
    степенным хвостом m ~ w^{-2α-2} за краем сетки.
    """

    def __init__(self, spec: BridgeSpec):
        self.spec = spec
        self.alpha = spec.params.alpha
        self.half_density = StableDensity(spec.params, spec.T / 2.0)
        self.full_density = StableDensity(spec.params, spec.T)
        self.scale = self.half_density.scale
        self.lam = spec.L / self.scale
        self.law = self.half_density.law
        self.gaussian = self.alpha == 2.0
        # log нормировки в стандартизованных единицах: log(c f(L; T))
        self.log_norm = math.log(self.scale) + float(self.full_density.log_pdf(spec.L))

    def log_pdf_standard(self, u):
        """log m(u) в единицах u = x / c."""
        u = np.asarray(u, dtype=float)
        if self.gaussian:
            return -0.5 * (u - self.lam / 2.0) ** 2 - 0.5 * math.log(2.0 * math.pi)
        return self.law.log_pdf(u) + self.law.log_pdf(self.lam - u) - self.log_norm

    def pdf(self, x):
        """Плотность m(x)."""
        values = np.exp(self.log_pdf_standard(np.asarray(x, dtype=float) / self.scale)) / self.scale
        if not np.all(np.isfinite(values)):
            raise AccuracyError(
                f"Нормировка f(L;T) вне диапазона double: α={self.alpha}, L={self.spec.L}"
            )
        return values if np.ndim(values) else float(values)

    @cached_property
    def _table(self) -> _MidpointTable:
        alpha, lam, law = self.alpha, self.lam, self.law
        width = law.core_width
        power = 2.0 * alpha + 1.0

        def half_values(w):
            return np.exp(self.log_pdf_standard(lam / 2.0 + w))

        w_max = max(abs(lam) / 2.0 + 50.0 * width, 2.0 * abs(lam))
        for _ in range(200):
            if half_values(w_max) * w_max / power <= TABLE_TAIL_MASS:
                break
            w_max *= 2.0

        n_core = int(math.ceil(math.asinh(w_max / width) / 0.01)) + 1
        grid = width * np.sinh(np.linspace(0.0, math.asinh(w_max / width), n_core))
        peak = abs(lam) / 2.0
        refine = np.linspace(max(0.0, peak - 8.0 * width), min(w_max, peak + 8.0 * width), 801)
        grid = np.unique(np.concatenate([grid, refine, [w_max]]))
        grid = grid[np.concatenate([[True], np.diff(grid) > 1e-12 * (1.0 + grid[1:])])]

        m = half_values(grid)
        dm = m * (law.score(lam / 2.0 + grid) - law.score(lam / 2.0 - grid))
        spline = CubicHermiteSpline(grid, m, dm)
        mass = spline.antiderivative()

        cumulative = np.maximum.accumulate(mass(grid))
        keep = np.concatenate([[True], np.diff(cumulative) > 0.0])
        inverse = CubicHermiteSpline(cumulative[keep], grid[keep], 1.0 / m[keep])

        half_core = float(cumulative[-1])
        tail = float(m[-1] * grid[-1] / power)
        logger.debug(
            f"Таблица середины α={alpha:.6g} λ={lam:.6g}: {grid.size} узлов, "
            f"w_max={w_max:.4g}, нормировка {2.0 * (half_core + tail):.10f}"
        )
        return _MidpointTable(
            w_max=float(grid[-1]),
            half_core=half_core,
            tail=tail,
            tail_power=power,
            mass=mass,
            inverse=inverse,
        )

    @property
    def normalization(self) -> float:
        """Полная масса табулированной плотности с хвостами."""
        if self.gaussian:
            return 1.0
        return 2.0 * self._table.half_total

    def cdf(self, x):
        w = np.asarray(x, dtype=float) / self.scale - self.lam / 2.0
        if self.gaussian:
            return special.ndtr(w)
        table = self._table
        a = np.abs(np.atleast_1d(w))
        inner = a <= table.w_max
        half = np.empty_like(a)
        half[inner] = table.mass(a[inner])
        half[~inner] = table.half_total - table.tail * (a[~inner] / table.w_max) ** (-table.tail_power)
        values = 0.5 + np.sign(np.atleast_1d(w)) * half / (2.0 * table.half_total)
        return values if np.ndim(w) else float(values[0])

    def _inverse(self, p: np.ndarray) -> np.ndarray:
        """Обратная CDF в единицах x."""
        if self.gaussian:
            return self.scale * (self.lam / 2.0 + special.ndtri(p))
        table = self._table
        r = np.abs(2.0 * p - 1.0) * table.half_total
        w = np.empty_like(r)
        inner = r <= table.half_core
        w[inner] = table.inverse(r[inner])
        beyond = np.maximum(table.half_total - r[~inner], 1e-300)
        w[~inner] = table.w_max * (beyond / table.tail) ** (-1.0 / table.tail_power)
        return self.scale * (self.lam / 2.0 + np.sign(p - 0.5) * w)

    def quantile(self, p: float) -> float:
        if not 0.0 < p < 1.0:
            raise DomainError(f"p должно лежать в (0, 1), получено: {p}")
        return float(self._inverse(np.array([p], dtype=float))[0])

    def sample(self, size, rng: RngStream):
        """Обратное преобразование равномерных величин."""
        p = np.atleast_1d(rng.generator.random(size if size is not None else 1))
        draws = self._inverse(p)
        return float(draws[0]) if size is None else draws


@lru_cache(maxsize=256)
def midpoint_density(spec: BridgeSpec) -> MidpointDensity:
    """Кэш вычислителей плотности середины по спецификации моста."""
    return MidpointDensity(spec)


def midpoint_pdf(spec: BridgeSpec, x_half):
    """Условная плотность x(T/2) при x(T) = L."""
    return midpoint_density(spec).pdf(x_half)


def sample_midpoint(spec: BridgeSpec, rng: RngStream) -> float:
    """Одна середина моста обратным преобразованием табулированной CDF."""
    return midpoint_density(spec).sample(None, rng)


# ═══════════════════════════════════════════════════════════════════════════════
# Точный отбор середин для ансамблей
# ═══════════════════════════════════════════════════════════════════════════════


def _rejection_midpoints(law: StandardStableLaw, lam: np.ndarray, rng: RngStream) -> np.ndarray:
    """
    Середины в единицах u для массива λ.

    Предложение: с вероятностью ½ u = Y или u = λ - Y, Y ~ g.
    Принятие с вероятностью g(u) g(λ-u) / (g(λ/2) [g(u) + g(λ-u)]) ≤ 1.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    out = np.empty_like(lam)
    log_h = law.log_pdf(lam / 2.0)
    shrink = 2.0 ** (-1.0 / law.alpha)
    log_conv = np.log(shrink) + law.log_pdf(lam * shrink)
    acceptance = np.exp(log_conv - math.log(2.0) - log_h)
    draws_per_node = np.clip(np.ceil(3.0 / np.maximum(acceptance, 1e-12)), 1, _MAX_PROPOSALS_PER_NODE).astype(np.int64)

    pending = np.arange(lam.size)
    while pending.size:
        budget = np.cumsum(draws_per_node[pending])
        take = max(1, int(np.searchsorted(budget, _MAX_PROPOSALS_PER_ROUND, side="right")))
        nodes = pending[:take]
        owner = np.repeat(nodes, draws_per_node[nodes])

        y = law.sample(owner.size, rng)
        flip = rng.generator.random(owner.size) < 0.5
        u = np.where(flip, lam[owner] - y, y)
        log_a = law.log_pdf(u)
        log_b = law.log_pdf(lam[owner] - u)
        log_accept = log_a + log_b - log_h[owner] - np.logaddexp(log_a, log_b)
        accepted = np.flatnonzero(np.log(rng.generator.random(owner.size)) < log_accept)

        winners, first = np.unique(owner[accepted], return_index=True)
        out[winners] = u[accepted[first]]
        done = np.zeros(lam.size, dtype=bool)
        done[winners] = True
        pending = pending[~done[pending]]
    return out


def sample_midpoint_offsets(
    params: StableParams,
    duration: float,
    displacement: np.ndarray,
    rng: RngStream,
) -> np.ndarray:
    """
    Смещения середин x(τ/2) - x(0) под-мостов длительности τ.

    Args:
        params: Параметры процесса
        duration: Длительность под-моста τ
        displacement: Приращения x(τ) - x(0) для каждого под-моста
        rng: Поток случайных чисел

    Returns:
        Массив смещений той же формы
    """
    displacement = np.asarray(displacement, dtype=float)
    c = params.scale(duration / 2.0)
    lam = displacement / c
    if params.alpha == 2.0:
        u = lam / 2.0 + rng.generator.standard_normal(lam.shape)
    else:
        u = _rejection_midpoints(standard_law(params.alpha), lam, rng).reshape(lam.shape)
    return c * u


def recursive_bridge_batch(spec: BridgeSpec, depth: int, n_paths: int, rng: RngStream) -> np.ndarray:
    """
    Ансамбль мостов рекурсивным делением пополам, уровень за уровнем.

    Returns:
        Массив позиций (n_paths, 2^depth + 1); первый столбец 0, последний ровно L
    """
    if depth < 0:
        raise DomainError(f"глубина должна быть неотрицательной: {depth}")
    n = 2**depth
    positions = np.zeros((n_paths, n + 1))
    positions[:, -1] = spec.L
    for level in range(1, depth + 1):
        stride = n >> (level - 1)
        half = stride // 2
        left = np.arange(0, n, stride)
        duration = spec.T / 2 ** (level - 1)
        displacement = positions[:, left + stride] - positions[:, left]
        offsets = sample_midpoint_offsets(spec.params, duration, displacement, rng)
        positions[:, left + half] = positions[:, left] + offsets
    return positions


def sample_bridge_recursive(spec: BridgeSpec, depth: int, rng: RngStream) -> Path:
    """Мост на 2^depth + 1 диадических точках."""
    positions = recursive_bridge_batch(spec, depth, 1, rng)[0]
    return Path(dyadic_times(spec.T, depth), positions, stream=rng.stream)


# ═══════════════════════════════════════════════════════════════════════════════
# Без условия и растянутые мосты
# ═══════════════════════════════════════════════════════════════════════════════


def unconditioned_batch(params: StableParams, T: float, dt: float, n_paths: int, rng: RngStream) -> np.ndarray:
    """Суммы CMS-приращений: массив (n_paths, n_steps + 1), старт в 0."""
    n = n_steps_for(T, dt)
    positions = np.zeros((n_paths, n + 1))
    increments = params.scale(dt) * cms_standard(params.alpha, (n_paths, n), rng)
    np.cumsum(increments, axis=1, out=positions[:, 1:])
    return positions


def sample_unconditioned_path(params: StableParams, T: float, dt: float, rng: RngStream) -> Path:
    """Траектория процесса без условия на конечную точку."""
    positions = unconditioned_batch(params, T, dt, 1, rng)[0]
    return Path(uniform_times(T, dt), positions, stream=rng.stream)


def stretch_to_arrival(positions: np.ndarray, times: np.ndarray, L: float) -> np.ndarray:
    """X(t) = W(t) + (t/T)(L - W(T)); последний узел ровно L."""
    T = times[-1]
    end = positions[..., -1:]
    stretched = positions + (times / T) * (L - end)
    stretched[..., -1] = L
    stretched[..., 0] = 0.0
    return stretched


@dataclass
class StretchedBatch:
    """Принятые растянутые мосты и счётчик попыток."""

    positions: np.ndarray
    attempts: int
    accepted: int = field(init=False)

    def __post_init__(self):
        self.accepted = int(self.positions.shape[0])

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0


def stretched_bridge_batch(
    spec: BridgeSpec,
    dt: float,
    L_thresh: float,
    n_paths: int,
    rng: RngStream,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> StretchedBatch:
    """
    Растянутые мосты с отбором |W(T) - L| ≤ L_thresh.

    Кандидаты генерируются блоками; принимаются первые n_paths подходящих
    по порядку. Попытки считаются до последнего принятого кандидата.

    Raises:
        RejectionExhaustedError: попыток больше max_attempts · n_paths
    """
    if not L_thresh > 0.0:
        raise DomainError(f"L_thresh должен быть положительным, получено: {L_thresh}")
    n = n_steps_for(spec.T, dt)
    times = uniform_times(spec.T, dt)
    limit = max_attempts * n_paths
    accepted_blocks: list[np.ndarray] = []
    accepted = 0
    attempts = 0
    rate = 1.0

    while accepted < n_paths:
        needed = n_paths - accepted
        block = int(min(max(needed, math.ceil(1.2 * needed / max(rate, 1e-6))), limit - attempts))
        block = max(1, min(block, max(1, _STRETCHED_BLOCK_FLOATS // (n + 1))))
        candidates = unconditioned_batch(spec.params, spec.T, dt, block, rng)
        hits = np.flatnonzero(np.abs(candidates[:, -1] - spec.L) <= L_thresh)

        if hits.size >= needed:
            attempts += int(hits[needed - 1]) + 1
            accepted_blocks.append(candidates[hits[:needed]])
            accepted = n_paths
            break

        attempts += block
        accepted += hits.size
        if hits.size:
            accepted_blocks.append(candidates[hits])
        rate = max(accepted / attempts, 0.5 / attempts)

        if attempts >= limit:
            partial = np.concatenate(accepted_blocks) if accepted_blocks else np.empty((0, n + 1))
            logger.warning(
                f"Исчерпан лимит попыток: {attempts}, принято {accepted}/{n_paths}, "
                f"L_thresh={L_thresh:.4g}"
            )
            raise RejectionExhaustedError(
                f"Растянутый семплер: {attempts} попыток, принято {accepted} из {n_paths}",
                attempts=attempts,
                accepted=accepted,
                partial=stretch_to_arrival(partial, times, spec.L),
            )

    positions = stretch_to_arrival(np.concatenate(accepted_blocks), times, spec.L)
    return StretchedBatch(positions=positions, attempts=attempts)


def sample_bridge_stretched(
    spec: BridgeSpec,
    dt: float,
    L_thresh: float,
    rng: RngStream,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> tuple[Path, int]:
    """Один растянутый мост и число использованных попыток."""
    batch = stretched_bridge_batch(spec, dt, L_thresh, 1, rng, max_attempts)
    path = Path(uniform_times(spec.T, dt), batch.positions[0], stream=rng.stream, attempts=batch.attempts)
    return path, batch.attempts


# ═══════════════════════════════════════════════════════════════════════════════
# Длинные скачки
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class JumpCensus:
    """Приращения, превысившие порог длинного скачка."""

    threshold: float
    indices: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.indices.size)


def long_jump_threshold(params: StableParams, T: float, dt: float) -> float:
    """Порог L_b (Δt/T)^{1/α} для шага Δt."""
    lb = bifurcation_length(params.alpha, params.sigma, T, "curvature").L_b
    return lb * (dt / T) ** (1.0 / params.alpha)


def effective_jump_census(
    path: Path,
    params: StableParams | None = None,
    threshold: float | None = None,
) -> JumpCensus:
    """
    Приращения с |Δx| больше порога.

    По умолчанию порог L_b (Δt/T)^{1/α} с L_b по критерию кривизны;
    требует равномерного шага.
    """
    if path.n_points < 2:
        raise DomainError("для подсчёта скачков нужны хотя бы две точки")
    if threshold is None:
        if params is None:
            raise DomainError("нужен порог или параметры процесса")
        steps = np.diff(path.times)
        threshold = long_jump_threshold(params, path.T, float(steps.mean()))
    increments = path.increments
    indices = np.flatnonzero(np.abs(increments) > threshold)
    return JumpCensus(threshold=float(threshold), indices=indices, sizes=increments[indices])


def jump_counts(positions: np.ndarray, threshold: float) -> np.ndarray:
    """Число длинных скачков в каждой траектории ансамбля."""
    return (np.abs(np.diff(positions, axis=-1)) > threshold).sum(axis=-1)
