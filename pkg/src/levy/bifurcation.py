"""
Бифуркации плотности средней точки моста Леви.

В стандартизованных единицах (c = σ (T/2)^{1/α}, λ = L / c) критические
точки m(u) ∝ g(u) g(λ - u) находятся из D(w) = ℓ(λ/2 + w) - ℓ(λ/2 - w) = 0,
где ℓ = (log g)'. Все длины L_b получаются как λ_b · c, поэтому масштабная
ковариантность по σ T^{1/α} выполняется точно.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
import pandas as pd
from loguru import logger
from scipy import optimize

from src.config import LB_ASYMPTOTE_MAX_DELTA
from src.errors import ConvergenceError, DivergenceError, DomainError, ResolutionError
from src.levy.stable_core import GaussianLaw, StandardStableLaw, standard_derivative, standard_law
from src.schemas.process import BridgeSpec, StableParams

Criterion = Literal["curvature", "tangent", "equal_height"]
CRITERIA: tuple[Criterion, ...] = ("curvature", "tangent", "equal_height")

# Сетка поиска корней D(w) и число уточнений вокруг почти-касаний
_EXTREMA_GRID = 2000
_REFINE_POINTS = 64
_MAX_REFINEMENTS = 6
_TANGENCY_TOL = 1e-13

# Интервал поиска α_c
_ALPHA_C_BRACKET = (1.6, 1.95)


@dataclass(frozen=True)
class CriticalPoint:
    """Критическая точка плотности середины."""

    x: float
    kind: Literal["max", "min", "degenerate"]
    offset: float  # w ≥ 0 в стандартизованных единицах


@dataclass(frozen=True)
class MidpointExtrema:
    """Отсортированные по x критические точки для одного моста."""

    spec: BridgeSpec
    points: tuple[CriticalPoint, ...]

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def maxima(self) -> list[float]:
        return [p.x for p in self.points if p.kind == "max"]

    @property
    def minima(self) -> list[float]:
        return [p.x for p in self.points if p.kind == "min"]

    @property
    def center_kind(self) -> str:
        return next(p.kind for p in self.points if p.offset == 0.0)


@dataclass(frozen=True)
class BifurcationLength:
    """Длина бифуркации по одному из критериев."""

    criterion: Criterion
    L_b: float
    alpha: float
    sigma: float
    T: float
    residual: float
    lam: float

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "L_b": self.L_b,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "T": self.T,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class CriticalIndex:
    """Решение системы m''(L/2) = m''''(L/2) = 0."""

    alpha: float
    L: float
    residual_second: float
    residual_fourth: float


# ═══════════════════════════════════════════════════════════════════════════════
# Центр: кривизна и четвёртая производная
# ═══════════════════════════════════════════════════════════════════════════════


def _center_residuals(alpha: float, y: float) -> tuple[float, float]:
    """
    m''/m и m''''/m в центре u = λ/2 = y.

    m'' ∝ 2(g g'' - g'²), m'''' ∝ 2(g g'''' - 4 g' g''' + 3 g''²).
    """
    g0, g1, g2, g3, g4 = (standard_derivative(alpha, y, order) for order in range(5))
    second = 2.0 * (g0 * g2 - g1**2) / g0**2
    fourth = 2.0 * (g0 * g4 - 4.0 * g1 * g3 + 3.0 * g2**2) / g0**2
    return second, fourth


def _log_curvature(alpha: float, y: float) -> float:
    """(log g)''(y) = g''/g - (g'/g)²."""
    g0 = standard_derivative(alpha, y, 0)
    g1 = standard_derivative(alpha, y, 1)
    g2 = standard_derivative(alpha, y, 2)
    return g2 / g0 - (g1 / g0) ** 2


@lru_cache(maxsize=512)
def _curvature_half_lambda(alpha: float) -> float:
    """y* > 0, где (log g)'' меняет знак; λ_curv = 2 y*."""
    if alpha == 2.0:
        raise DivergenceError("При α = 2 длина бифуркации расходится")
    lo = 0.0
    hi = 0.5
    while _log_curvature(alpha, hi) < 0.0:
        lo, hi = hi, hi * 1.5
        if hi > 1e4:
            raise ConvergenceError(f"Не найден корень кривизны для α={alpha}", last_iterate=hi)
    return optimize.brentq(lambda y: _log_curvature(alpha, y), lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)


@lru_cache(maxsize=1)
def critical_index() -> CriticalIndex:
    """
    α_c: кривизна и четвёртая производная в центре обращаются в ноль вместе.

    Вложенный Брент по α (четвёртая производная в точке нулевой кривизны)
    с последующим уточнением системы двух уравнений методом hybr.
    """

    def fourth_at_curvature(a: float) -> float:
        return _center_residuals(a, _curvature_half_lambda(a))[1]

    lo, hi = _ALPHA_C_BRACKET
    f_lo, f_hi = fourth_at_curvature(lo), fourth_at_curvature(hi)
    if f_lo * f_hi > 0.0:
        raise ConvergenceError(
            f"α_c не отделён в [{lo}, {hi}]: знаки {f_lo:.3g}, {f_hi:.3g}",
            last_iterate=(lo, hi),
        )
    alpha0 = optimize.brentq(fourth_at_curvature, lo, hi, xtol=1e-12)
    y0 = _curvature_half_lambda(alpha0)

    solution = optimize.root(
        lambda v: _center_residuals(v[0], v[1]),
        x0=[alpha0, y0],
        method="hybr",
        options={"xtol": 1e-13},
    )
    alpha, y = (solution.x if solution.success else (alpha0, y0))
    second, fourth = _center_residuals(alpha, y)
    if max(abs(second), abs(fourth)) > 1e-6:
        raise ConvergenceError(
            f"Невязки α_c велики: {second:.3e}, {fourth:.3e}",
            last_iterate=(alpha, y),
        )
    L_c = 2.0 * y * 0.5 ** (1.0 / alpha)
    logger.info(f"α_c = {alpha:.7f}, L_c = {L_c:.6f}, невязки {second:.2e} / {fourth:.2e}")
    return CriticalIndex(alpha=float(alpha), L=float(L_c), residual_second=second, residual_fourth=fourth)


def alpha_critical() -> float:
    """Критический индекс α_c ≈ 1.7999."""
    return critical_index().alpha


# ═══════════════════════════════════════════════════════════════════════════════
# Экстремумы
# ═══════════════════════════════════════════════════════════════════════════════


def _side_function(law: StandardStableLaw, lam: float):
    """f(w) = D(w) / w с пределом 2ℓ'(λ/2) в нуле."""
    half = lam / 2.0
    center = 2.0 * float(law.score_derivative(half))

    def f(w):
        w = np.asarray(w, dtype=float)
        safe = np.where(w == 0.0, 1.0, w)
        values = (law.score(half + w) - law.score(half - w)) / safe
        return np.where(w == 0.0, center, values)

    return f


def _side_roots(law: StandardStableLaw, lam: float) -> list[float]:
    """Корни D(w) на (0, λ/2]."""
    half = lam / 2.0
    if half <= 0.0:
        return []
    f = _side_function(law, lam)
    grid = half * np.arange(_EXTREMA_GRID + 1) / _EXTREMA_GRID
    values = f(grid)

    def scalar(w: float) -> float:
        return float(f(np.array([w]))[0])

    brackets: list[tuple[float, float]] = []
    pending = [(grid, values)]
    for _ in range(_MAX_REFINEMENTS + 1):
        next_pending = []
        for w, v in pending:
            changes = np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0.0)
            brackets.extend((w[i], w[i + 1]) for i in changes)
            brackets.extend((w[i], w[i]) for i in np.flatnonzero(v[1:] == 0.0) + 1)
            # почти-касания: локальный минимум |f| без смены знака
            mag = np.abs(v)
            interior = np.flatnonzero((mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])) + 1
            for i in interior:
                if np.sign(v[i - 1]) != np.sign(v[i + 1]) or mag[i] > 1e-3 * (np.abs(v).max() + 1e-300):
                    continue
                fine = np.linspace(w[i - 1], w[i + 1], _REFINE_POINTS + 1)
                next_pending.append((fine, f(fine)))
        pending = next_pending
        if not pending:
            break

    for w, v in pending:
        changes = np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0.0)
        brackets.extend((w[i], w[i + 1]) for i in changes)
        if changes.size == 0 and np.abs(v).min() < _TANGENCY_TOL:
            raise ResolutionError("Неразрешённое касание корней", (float(w[0]), float(w[-1])))

    roots = set()
    for a, b in brackets:
        if a == b:
            if a > 0.0:
                roots.add(float(a))
            continue
        if a == 0.0:
            a = b * 1e-12
            if scalar(a) * scalar(b) > 0.0:
                continue
        roots.add(float(optimize.brentq(scalar, a, b, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)))
    return sorted(r for r in roots if r > 0.0)


def _classify(law: StandardStableLaw, lam: float, w: float) -> str:
    """Знак (log m)'' = ℓ'(λ/2 + w) + ℓ'(λ/2 - w)."""
    half = lam / 2.0
    curvature = float(law.score_derivative(half + w) + law.score_derivative(half - w))
    if curvature < 0.0:
        return "max"
    if curvature > 0.0:
        return "min"
    return "degenerate"


def midpoint_extrema(spec: BridgeSpec) -> MidpointExtrema:
    """
    Все критические точки плотности середины, классифицированные по m''.

    Пары симметричны: левая точка вычисляется как L - x_правой.
    """
    law = standard_law(spec.params.alpha)
    c = spec.half_scale
    lam = abs(spec.L) / c
    center = spec.L / 2.0

    points = [CriticalPoint(x=center, kind=_classify(law, lam, 0.0), offset=0.0)]
    for w in _side_roots(law, lam):
        kind = _classify(law, lam, w)
        right = center + c * w
        points.append(CriticalPoint(x=right, kind=kind, offset=w))
        points.append(CriticalPoint(x=spec.L - right, kind=kind, offset=w))
    return MidpointExtrema(spec=spec, points=tuple(sorted(points, key=lambda p: p.x)))


def cauchy_critical_points(L: float, sigma: float = 1.0, T: float = 1.0) -> list[float]:
    """Точные критические точки при α = 1: L/2 и L/2 ± sqrt(L²/4 - (σT/2)²)."""
    half = L / 2.0
    c = sigma * T / 2.0
    if half**2 <= c**2:
        return [half]
    w = math.sqrt(half**2 - c**2)
    return [half - w, half, half + w]


# ═══════════════════════════════════════════════════════════════════════════════
# Длины бифуркации
# ═══════════════════════════════════════════════════════════════════════════════


def _side_peak_indicator(law: StandardStableLaw, lam: float) -> float:
    """Ψ(λ) = max_w D(w)/w; Ψ > 0 тогда и только тогда, когда есть боковые пики."""
    f = _side_function(law, lam)
    half = lam / 2.0
    grid = half * np.arange(1, 401) / 400.0
    values = f(grid)
    i = int(np.argmax(values))
    lo = grid[i - 1] if i > 0 else 0.0
    hi = grid[min(i + 1, grid.size - 1)]
    polished = optimize.minimize_scalar(
        lambda w: -float(f(np.array([w]))[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * max(half, 1.0)},
    )
    return max(float(values[i]), -float(polished.fun))


def _log_height_gap(law: StandardStableLaw, lam: float) -> float:
    """log m(боковой максимум) - log m(центр); -1, если боковых пиков нет."""
    half = lam / 2.0
    side = [w for w in _side_roots(law, lam) if _classify(law, lam, w) == "max"]
    if not side:
        return -1.0
    w = max(side)
    return float(law.log_pdf(half + w) + law.log_pdf(half - w) - 2.0 * law.log_pdf(half))


@lru_cache(maxsize=512)
def _tangent_lambda(alpha: float) -> tuple[float, float]:
    law = standard_law(alpha)
    lam_curv = 2.0 * _curvature_half_lambda(alpha)
    hi = lam_curv * (1.0 - 1e-9)
    if _side_peak_indicator(law, hi) <= 0.0:
        raise DomainError(f"Боковые пики не рождаются при α={alpha} (α ≤ α_c)")
    lo = 0.5 * lam_curv
    while _side_peak_indicator(law, lo) >= 0.0:
        lo *= 0.8
        if lo < 1e-6:
            raise ConvergenceError(f"Не отделён корень касательного критерия α={alpha}", last_iterate=lo)
    lam = optimize.brentq(lambda v: _side_peak_indicator(law, v), lo, hi, xtol=1e-12 * lam_curv)
    return lam, abs(_side_peak_indicator(law, lam))


@lru_cache(maxsize=512)
def _equal_height_lambda(alpha: float) -> tuple[float, float]:
    law = standard_law(alpha)
    lam_curv = 2.0 * _curvature_half_lambda(alpha)
    lam_t, _ = _tangent_lambda(alpha)
    hi = lam_curv * (1.0 - 1e-7)
    if _log_height_gap(law, hi) <= 0.0:
        raise ConvergenceError(f"Боковые пики ниже центра у L_curv при α={alpha}", last_iterate=hi)
    for fraction in (1e-4, 1e-3, 1e-2, 0.1, 0.3):
        lo = lam_t + fraction * (lam_curv - lam_t)
        gap = _log_height_gap(law, lo)
        if -1.0 < gap < 0.0:
            break
    else:
        raise ConvergenceError(f"Не отделён корень равных высот α={alpha}", last_iterate=lo)
    lam = optimize.brentq(lambda v: _log_height_gap(law, v), lo, hi, xtol=1e-12 * lam_curv)
    return lam, abs(_log_height_gap(law, lam))


def bifurcation_length(
    alpha: float,
    sigma: float = 1.0,
    T: float = 1.0,
    criterion: Criterion = "curvature",
) -> BifurcationLength:
    """
    Длина бифуркации L_b по выбранному критерию.

    Args:
        alpha: Индекс устойчивости, 0 < α < 2
        sigma: Масштаб σ
        T: Время прибытия
        criterion: curvature | tangent | equal_height

    Returns:
        BifurcationLength

    Raises:
        DivergenceError: α = 2
        DomainError: tangent/equal_height при α ≤ α_c
    """
    params = StableParams(alpha=alpha, sigma=sigma)
    if not T > 0.0:
        raise DomainError(f"T должно быть положительным: {T}")
    if alpha == 2.0:
        raise DivergenceError("При α = 2 длина бифуркации расходится")
    if criterion not in CRITERIA:
        raise DomainError(f"Неизвестный критерий: {criterion}")

    if criterion == "curvature":
        y = _curvature_half_lambda(alpha)
        lam, residual = 2.0 * y, abs(_log_curvature(alpha, y))
    else:
        if alpha <= alpha_critical():
            raise DomainError(f"Критерий {criterion} определён только при α > α_c, получено α={alpha}")
        lam, residual = _tangent_lambda(alpha) if criterion == "tangent" else _equal_height_lambda(alpha)

    c = params.scale(T / 2.0)
    return BifurcationLength(
        criterion=criterion,
        L_b=lam * c,
        alpha=alpha,
        sigma=sigma,
        T=T,
        residual=residual,
        lam=lam,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# Асимптотика Нагаева
# ═══════════════════════════════════════════════════════════════════════════════

_GAUSS_PEAK = 1.0 / (2.0 * math.sqrt(math.pi))


def lb_asymptote(delta: float, sigma: float = 1.0, T: float = 1.0) -> float:
    """L_b ~ sqrt(-4σ²T log(πδ²/2)) при δ = 2 - α -> 0."""
    if not 0.0 < delta <= LB_ASYMPTOTE_MAX_DELTA:
        raise DomainError(f"δ вне области применимости (0, {LB_ASYMPTOTE_MAX_DELTA}]: {delta}")
    return math.sqrt(-4.0 * sigma**2 * T * math.log(math.pi * delta**2 / 2.0))


def nagaev_cutoff(delta: float) -> float:
    """|x|, ниже которого поправка δ|x|^{δ-3} превышает 1% пика гауссианы."""
    return (delta / (0.01 * _GAUSS_PEAK)) ** (1.0 / (3.0 - delta))


def nagaev_pdf_derivative(delta: float, x, order: int = 0):
    """n-я производная f₂(x;1) + δ|x|^{δ-3}."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"δ должно лежать в (0, 1): {delta}")
    arr = np.asarray(x, dtype=float)
    a = np.abs(arr)
    if np.any(a < nagaev_cutoff(delta)):
        raise DomainError(f"|x| ниже порога применимости {nagaev_cutoff(delta):.4g}")
    coefficient = delta
    for j in range(order):
        coefficient *= delta - 3.0 - j
    tail = coefficient * a ** (delta - 3.0 - order)
    if order % 2:
        tail = np.where(arr < 0.0, -tail, tail)
    gauss = GaussianLaw().derivative(arr, order)
    values = gauss + tail
    return values if np.ndim(values) else float(values)


def nagaev_pdf(delta: float, x):
    """Асимптотическая плотность f₂(x;1) + δ|x|^{δ-3} для малых δ и больших |x|."""
    return nagaev_pdf_derivative(delta, x, 0)


def nagaev_bifurcation_length(delta: float, sigma: float = 1.0, T: float = 1.0) -> float:
    """
    L_b по критерию кривизны для асимптотической плотности Нагаева.

    Корень (log g)'' = 0 ищется выше порога применимости формулы.
    """

    def log_curvature(y: float) -> float:
        g0, g1, g2 = (nagaev_pdf_derivative(delta, y, order) for order in range(3))
        return g2 / g0 - (g1 / g0) ** 2

    lo = nagaev_cutoff(delta) * (1.0 + 1e-9)
    hi = max(2.0 * lo, 2.0)
    while log_curvature(hi) < 0.0:
        lo, hi = hi, hi * 1.5
        if hi > 1e3:
            raise ConvergenceError(f"Не найден корень для δ={delta}", last_iterate=hi)
    y = optimize.brentq(log_curvature, lo, hi, xtol=1e-14)
    alpha = 2.0 - delta
    L_b = 2.0 * y * sigma * (T / 2.0) ** (1.0 / alpha)
    if delta <= LB_ASYMPTOTE_MAX_DELTA:
        # ведущий порядок теряет поправку log log: ~20% при δ = 0.01, < 10% только при δ ≲ 1e-4
        gap = L_b / lb_asymptote(delta, sigma, T) - 1.0
        logger.info(f"L_b Нагаева δ={delta:.3g}: {L_b:.6g}, отклонение от асимптоты {gap:+.1%}")
    return L_b


# ═══════════════════════════════════════════════════════════════════════════════
# Диаграмма бифуркаций
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class BifurcationEvent:
    """Структурное событие между соседними L."""

    kind: Literal["pitchfork", "tangent", "reverse_pitchfork", "other"]
    L: float
    count_before: int
    count_after: int


@dataclass
class ExtremaDiagram:
    """Экстремумы вдоль сетки L с непрерывной нумерацией ветвей."""

    alpha: float
    sigma: float
    T: float
    L_values: list[float]
    extrema: list[MidpointExtrema]
    branches: list[list[int]] = field(default_factory=list)
    events: list[BifurcationEvent] = field(default_factory=list)

    def counts(self) -> list[int]:
        return [e.count for e in self.extrema]

    def to_frame(self) -> pd.DataFrame:
        """Длинный формат: L, branch, x, type."""
        rows = [
            {"L": L, "branch": branch, "x": point.x, "type": point.kind}
            for L, ext, ids in zip(self.L_values, self.extrema, self.branches)
            for point, branch in zip(ext.points, ids)
        ]
        return pd.DataFrame(rows, columns=["L", "branch", "x", "type"])

    def events_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [vars(e) for e in self.events],
            columns=["kind", "L", "count_before", "count_after"],
        )


def _event_kind(before: MidpointExtrema, after: MidpointExtrema) -> str:
    n0, n1 = before.count, after.count
    center_flip = before.center_kind != after.center_kind
    if center_flip and n1 == n0 + 2:
        return "pitchfork"
    if center_flip and n1 == n0 - 2:
        return "reverse_pitchfork"
    if not center_flip and n1 == n0 + 4:
        return "tangent"
    return "other"


def _assign_branches(
    previous: MidpointExtrema | None,
    previous_ids: list[int],
    current: MidpointExtrema,
    next_id: int,
) -> tuple[list[int], int]:
    """
    Продолжение ветвей между соседними L.

    Центр всегда ветвь 0. При равном числе точек порядок по x сохраняется;
    иначе боковые точки сопоставляются ближайшим того же типа и той же стороны.
    """
    if previous is not None and previous.count == current.count:
        return list(previous_ids), next_id
    ids = []
    used: set[int] = set()
    for point in current.points:
        if point.offset == 0.0:
            ids.append(0)
            continue
        right = point.x > current.spec.L / 2.0
        best, best_dist = None, math.inf
        for prev_point, prev_id in zip(previous.points if previous else (), previous_ids):
            if prev_id == 0 or prev_id in used or prev_point.kind != point.kind:
                continue
            if (prev_point.x > previous.spec.L / 2.0) != right:
                continue
            dist = abs(prev_point.x - point.x)
            if dist < best_dist:
                best, best_dist = prev_id, dist
        if best is None:
            best = next_id
            next_id += 1
        used.add(best)
        ids.append(best)
    return ids, next_id


def bifurcation_diagram(
    alpha: float,
    sigma: float,
    T: float,
    L_grid: list[float] | np.ndarray,
    refine_events: int = 30,
    n_workers: int = 1,
) -> ExtremaDiagram:
    """
    Диаграмма экстремумов по сетке L с уточнением событий.

    Интервалы, где меняется число экстремумов, делятся пополам до
    refine_events раз; точка события записывается в сетку.

    Args:
        alpha: Индекс устойчивости
        sigma: Масштаб σ
        T: Время прибытия
        L_grid: Возрастающая сетка положительных L
        refine_events: Число делений пополам на событие
        n_workers: Потоки для расчёта по L

    Returns:
        ExtremaDiagram
    """
    grid = np.asarray(L_grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise DomainError("сетка L должна быть возрастающей и положительной")
    params = StableParams(alpha=alpha, sigma=sigma)
    standard_law(alpha)

    def extrema_at(L: float) -> MidpointExtrema:
        return midpoint_extrema(BridgeSpec(params=params, T=T, L=float(L)))

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(extrema_at, grid))
    else:
        results = [extrema_at(L) for L in grid]

    L_values: list[float] = [float(grid[0])]
    extrema: list[MidpointExtrema] = [results[0]]
    events: list[BifurcationEvent] = []
    for i in range(1, grid.size):
        lo_L, lo_ext = float(grid[i - 1]), results[i - 1]
        hi_L, hi_ext = float(grid[i]), results[i]
        if lo_ext.count != hi_ext.count:
            for _ in range(refine_events):
                mid_L = 0.5 * (lo_L + hi_L)
                mid_ext = extrema_at(mid_L)
                if mid_ext.count == lo_ext.count:
                    lo_L, lo_ext = mid_L, mid_ext
                else:
                    hi_L, hi_ext = mid_L, mid_ext
            kind = _event_kind(lo_ext, hi_ext)
            events.append(BifurcationEvent(kind=kind, L=0.5 * (lo_L + hi_L), count_before=lo_ext.count, count_after=hi_ext.count))
            logger.debug(f"Событие {kind} при L≈{0.5 * (lo_L + hi_L):.8g}: {lo_ext.count} -> {hi_ext.count}")
            if lo_L > L_values[-1]:
                L_values.append(lo_L)
                extrema.append(lo_ext)
            if hi_L < float(grid[i]):
                L_values.append(hi_L)
                extrema.append(hi_ext)
        L_values.append(float(grid[i]))
        extrema.append(results[i])

    branches: list[list[int]] = []
    next_id = 1
    previous, previous_ids = None, []
    for ext in extrema:
        ids, next_id = _assign_branches(previous, previous_ids, ext, next_id)
        branches.append(ids)
        previous, previous_ids = ext, ids

    logger.info(
        f"Диаграмма α={alpha}: {len(L_values)} значений L, события: "
        f"{[e.kind for e in events] or 'нет'}"
    )
    return ExtremaDiagram(
        alpha=alpha,
        sigma=sigma,
        T=T,
        L_values=L_values,
        extrema=extrema,
        branches=branches,
        events=events,
    )


def diagram_grid(L_min: float, L_max: float, n: int) -> np.ndarray:
    """Геометрическая сетка L."""
    return np.geomspace(L_min, L_max, n)
