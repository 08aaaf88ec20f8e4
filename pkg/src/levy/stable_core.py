"""
Плотности симметричных α-устойчивых законов.

Все вычисления ведутся для стандартного закона с характеристической
функцией exp(-|k|^α) (σ = t = 1). Закон в момент t получается
масштабированием: f(x; t) = g(x / c) / c, c = σ t^{1/α}. Поэтому одна
таблица на α обслуживает все времена и масштабы.

Методы вычисления:
- α = 1 (Коши) и α = 2 (Гаусс): замкнутые формулы
- α > NEAR_GAUSSIAN_ALPHA: нормированная модель "гаусс + хвост Нагаева"
- остальные α: квадратура осциллирующего интеграла (QAWO) в ядре и
  асимптотический ряд в хвосте; таблица эрмитовых сплайнов для скорости
"""

import math
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from loguru import logger
from scipy import integrate, optimize, special
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from src.config import EPS_DENSITY, EPS_DERIV, NEAR_GAUSSIAN_ALPHA, TABLE_STEP
from src.errors import AccuracyError, DomainError
from src.levy.rng import RngStream, cms_standard
from src.schemas.process import StableParams

# Верхний предел интегрирования K: K^α = 80, e^{-80} пренебрежимо
_CUTOFF_EXPONENT = 80.0

# Знаки ядер d^n/dz^n cos(kz): cos, -k sin, -k² cos, +k³ sin, +k⁴ cos
_KERNEL_SIGN = (1.0, -1.0, -1.0, 1.0, 1.0)

_SERIES_MAX_TERMS = 60
_SERIES_REL_TOL = 1e-10
_SWITCH_AGREEMENT = 1e-8

# Ширина ядра регуляризованного хвоста в модели около α = 2
NAGAEV_CORE_WIDTH = 0.5

_SQRT2 = math.sqrt(2.0)
_GAUSS_NORM = 1.0 / (2.0 * math.sqrt(math.pi))


def _as_array(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _restore(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 2.0) or not math.isfinite(alpha):
        raise DomainError(f"α должно лежать в (0, 2], получено: {alpha}")


def _check_time(t: float) -> None:
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"время t должно быть положительным, получено: {t}")


def _check_order(order: int, allow_zero: bool = False) -> None:
    allowed = (0, 1, 2, 3, 4) if allow_zero else (1, 2, 3, 4)
    if order not in allowed:
        raise DomainError(f"порядок производной должен быть в {allowed}, получено: {order}")


def stable_tail_constant(alpha: float) -> float:
    """
    Коэффициент хвоста стандартного закона: g(z) ~ C |z|^{-(α+1)}.

    C = Γ(α+1) sin(πα/2) / π; для α = 2 хвост отсутствует.
    """
    _check_alpha(alpha)
    if alpha == 2.0:
        return 0.0
    return math.gamma(alpha + 1.0) * math.sin(math.pi * alpha / 2.0) / math.pi


def _zero_value(alpha: float, order: int) -> float:
    """g^{(n)}(0): нечётные порядки равны 0, чётные ±Γ((n+1)/α)/(απ)."""
    if order % 2:
        return 0.0
    return _KERNEL_SIGN[order] * math.gamma((order + 1) / alpha) / (alpha * math.pi)


def inversion_integral(alpha: float, z: float, order: int = 0) -> tuple[float, float]:
    """
    Производная порядка n стандартной плотности обращением Фурье.

    g^{(n)}(z) = (1/π) ∫₀^K k^n e^{-k^α} · (ядро порядка n)(kz) dk,
    интеграл с весом cos/sin считается QUADPACK QAWO.

    Args:
        alpha: Индекс устойчивости
        z: Стандартизованная координата
        order: Порядок производной 0..4

    Returns:
        (значение, оценка абсолютной ошибки)
    """
    if z == 0.0:
        return _zero_value(alpha, order), 0.0

    sign = 1.0
    if z < 0.0:
        z = -z
        sign = (-1.0) ** order

    upper = _CUTOFF_EXPONENT ** (1.0 / alpha)
    weight = "sin" if order % 2 else "cos"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            lambda k: k**order * math.exp(-(k**alpha)),
            0.0,
            upper,
            weight=weight,
            wvar=z,
            epsabs=1e-14,
            epsrel=1e-12,
            limit=1000,
        )
    return sign * _KERNEL_SIGN[order] * value / math.pi, abserr / math.pi


class TailSeries:
    """
    Асимптотический (при α < 1 сходящийся) ряд стандартной плотности.

    g(z) = (1/π) Σ_{n≥1} (-1)^{n+1} Γ(nα+1)/n! sin(nπα/2) z^{-nα-1}, z > 0.
    Хранит n_terms рабочих членов и два следующих для оценки ошибки.
    """

    def __init__(self, alpha: float, n_terms: int):
        self.alpha = alpha
        self.n_terms = n_terms
        n = np.arange(1, n_terms + 3, dtype=float)
        sine = np.sin(n * np.pi * alpha / 2.0)
        with np.errstate(divide="ignore"):
            self._log_abs = (
                special.gammaln(n * alpha + 1.0)
                - special.gammaln(n + 1.0)
                - math.log(math.pi)
                + np.log(np.abs(sine))
            )
        self._sign = np.where(n % 2 == 1, 1.0, -1.0) * np.sign(sine)
        self._n = n
        self._powers = n * alpha + 1.0

    def _terms(self, z: np.ndarray, order: int, extra: bool = False) -> np.ndarray:
        count = self.n_terms + (2 if extra else 0)
        log_z = np.log(z)[:, None]
        pochhammer = np.ones(count)
        for j in range(1, order + 1):
            pochhammer = pochhammer * (self._n[:count] * self.alpha + j)
        log_mag = self._log_abs[:count] + np.log(pochhammer) - (self._powers[:count] + order) * log_z
        return (-1.0) ** order * self._sign[:count] * np.exp(log_mag)

    def value(self, z, order: int = 0):
        """n-я производная суммы ряда при z > 0."""
        arr, scalar = _as_array(z)
        return _restore(self._terms(arr, order).sum(axis=1), scalar)

    def error(self, z, order: int = 0):
        """Оценка ошибки обрыва: модуль наибольшего из двух следующих членов."""
        arr, scalar = _as_array(z)
        tail = np.abs(self._terms(arr, order, extra=True)[:, -2:])
        return _restore(tail.max(axis=1), scalar)

    def log_value(self, z):
        """log g(z) без переполнения при больших z."""
        arr, scalar = _as_array(z)
        log_z = np.log(arr)
        lead = self._log_abs[0] - self._powers[0] * log_z
        if self.n_terms > 1:
            rel = self._sign[1 : self.n_terms] * np.exp(
                self._log_abs[1 : self.n_terms]
                - self._log_abs[0]
                - (self._n[1 : self.n_terms] - 1.0) * self.alpha * log_z[:, None]
            )
            lead = lead + np.log1p(rel.sum(axis=1))
        return _restore(lead, scalar)

    def survival(self, z):
        """Хвостовая масса ∫_z^∞ g."""
        arr, scalar = _as_array(z)
        log_z = np.log(arr)[:, None]
        n = self._n[: self.n_terms]
        terms = self._sign[: self.n_terms] * np.exp(
            self._log_abs[: self.n_terms] - n * self.alpha * log_z - np.log(n * self.alpha)
        )
        return _restore(terms.sum(axis=1), scalar)


def _find_series_switch(alpha: float, start: float) -> tuple[float, int]:
    """
    Точка перехода с квадратуры на ряд.

    Первая точка геометрической сетки, где оптимально оборванный ряд имеет
    относительную ошибку ниже _SERIES_REL_TOL и совпадает с квадратурой.

    Returns:
        (z_switch, число членов ряда)
    """
    full = TailSeries(alpha, _SERIES_MAX_TERMS)
    for z in start * np.geomspace(1.5, 5000.0, 200):
        terms = full._terms(np.array([z]), 0, extra=True)[0]
        partial = np.cumsum(terms[:-2])
        magnitude = np.abs(terms)
        err = np.maximum(magnitude[1:-1], magnitude[2:])
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = err / np.abs(partial)
        rel = np.where(np.isfinite(rel), rel, np.inf)
        best = int(np.argmin(rel))
        if rel[best] > _SERIES_REL_TOL:
            continue
        series_value = partial[best]
        quad_value, _ = inversion_integral(alpha, float(z))
        if abs(series_value - quad_value) <= max(_SWITCH_AGREEMENT * abs(series_value), 1e-14):
            return float(z), best + 1

    raise AccuracyError(
        f"Не найдена точка сшивки квадратуры и ряда для α={alpha}",
        achieved_error=None,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# Стандартные законы
# ═══════════════════════════════════════════════════════════════════════════════


class StandardStableLaw:
    """
    Стандартный симметричный α-устойчивый закон (σ = t = 1).

    Подклассы реализуют pdf, log_pdf, derivative, evaluate, _upper и sample.
    Экземпляры неизменяемы после построения.
    """

    alpha: float

    @property
    def core_width(self) -> float:
        """Ширина ядра sqrt(g(0) / |g''(0)|)."""
        return math.sqrt(self.alpha * math.gamma(1.0 + 1.0 / self.alpha) / math.gamma(3.0 / self.alpha))

    def pdf(self, z):
        raise NotImplementedError

    def log_pdf(self, z):
        raise NotImplementedError

    def derivative(self, z, order: int):
        raise NotImplementedError

    def evaluate(self, z, order: int = 0):
        """Прямое вычисление без таблицы (для опорных проверок и решателей)."""
        return self.derivative(z, order) if order else self.pdf(z)

    def score(self, z):
        """ℓ(z) = g'(z) / g(z); где g исчезает, асимптотика -(α+1)/z."""
        arr, scalar = _as_array(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = self.derivative(arr, 1) / self.pdf(arr)
        fallback = -(self.alpha + 1.0) / np.where(arr == 0.0, 1.0, arr)
        return _restore(np.where(np.isfinite(values), values, fallback), scalar)

    def score_derivative(self, z):
        """ℓ'(z) = g''/g - ℓ²."""
        arr, scalar = _as_array(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = self.derivative(arr, 2) / self.pdf(arr) - self.score(arr) ** 2
        fallback = (self.alpha + 1.0) / np.where(arr == 0.0, 1.0, arr) ** 2
        return _restore(np.where(np.isfinite(values), values, fallback), scalar)

    def _upper(self, a: np.ndarray) -> np.ndarray:
        """P(X > a) при a ≥ 0."""
        raise NotImplementedError

    def sample(self, size, rng: RngStream) -> np.ndarray:
        return cms_standard(self.alpha, size, rng)

    def sf(self, z):
        arr, scalar = _as_array(z)
        upper = self._upper(np.abs(arr))
        out = np.where(arr < 0.0, 1.0 - upper, upper)
        return _restore(np.where(arr == 0.0, 0.5, out), scalar)

    def cdf(self, z):
        arr, scalar = _as_array(z)
        return _restore(self.sf(-arr), scalar)

    def quantile(self, p: float) -> float:
        """Обратная CDF решением sf(a) = min(p, 1-p) методом Брента."""
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"p должно лежать в (0, 1), получено: {p}")
        if p == 0.5:
            return 0.0
        q = min(p, 1.0 - p)
        hi = 1.0
        while float(self._upper(np.array([hi]))[0]) > q:
            hi *= 2.0
        root = optimize.brentq(
            lambda a: float(self._upper(np.array([a]))[0]) - q,
            0.0,
            hi,
            xtol=1e-300,
            rtol=4.0 * np.finfo(float).eps,
            maxiter=500,
        )
        return root if p > 0.5 else -root


class GaussianLaw(StandardStableLaw):
    """α = 2: нормальный закон с дисперсией 2."""

    alpha = 2.0

    _POLYNOMIALS = (
        lambda z: np.ones_like(z),
        lambda z: -z / 2.0,
        lambda z: z**2 / 4.0 - 0.5,
        lambda z: -(z**3) / 8.0 + 0.75 * z,
        lambda z: z**4 / 16.0 - 0.75 * z**2 + 0.75,
    )

    def pdf(self, z):
        arr, scalar = _as_array(z)
        return _restore(_GAUSS_NORM * np.exp(-(arr**2) / 4.0), scalar)

    def log_pdf(self, z):
        arr, scalar = _as_array(z)
        return _restore(math.log(_GAUSS_NORM) - arr**2 / 4.0, scalar)

    def derivative(self, z, order: int):
        arr, scalar = _as_array(z)
        values = self._POLYNOMIALS[order](arr) * _GAUSS_NORM * np.exp(-(arr**2) / 4.0)
        return _restore(values, scalar)

    def _upper(self, a):
        return 0.5 * special.erfc(a / 2.0)

    def quantile(self, p: float) -> float:
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"p должно лежать в (0, 1), получено: {p}")
        return float(_SQRT2 * special.ndtri(p))


class CauchyLaw(StandardStableLaw):
    """α = 1: закон Коши g(z) = 1/(π(1+z²))."""

    alpha = 1.0

    def pdf(self, z):
        arr, scalar = _as_array(z)
        return _restore(1.0 / (np.pi * (1.0 + arr**2)), scalar)

    def log_pdf(self, z):
        arr, scalar = _as_array(z)
        return _restore(-math.log(math.pi) - np.log1p(arr**2), scalar)

    def derivative(self, z, order: int):
        arr, scalar = _as_array(z)
        u = 1.0 + arr**2
        if order == 0:
            values = 1.0 / (np.pi * u)
        elif order == 1:
            values = -2.0 * arr / (np.pi * u**2)
        elif order == 2:
            values = (6.0 * arr**2 - 2.0) / (np.pi * u**3)
        elif order == 3:
            values = 24.0 * arr * (1.0 - arr**2) / (np.pi * u**4)
        else:
            values = 24.0 * (5.0 * arr**4 - 10.0 * arr**2 + 1.0) / (np.pi * u**5)
        return _restore(values, scalar)

    def _upper(self, a):
        return 0.5 - np.arctan(a) / np.pi

    def quantile(self, p: float) -> float:
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"p должно лежать в (0, 1), получено: {p}")
        return float(np.tan(np.pi * (p - 0.5)))


class NearGaussianLaw(StandardStableLaw):
    """
    Модель для α близких к 2.

    g(z) = (1 - 2δ/a²) f₂(z) + δ (a² + z²)^{-3/2}, a = NAGAEV_CORE_WIDTH.
    Хвост δ|z|^{-3} совпадает с асимптотикой Нагаева, ядро регуляризовано,
    масса равна 1 точно.
    """

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.delta = 2.0 - alpha
        self.core2 = NAGAEV_CORE_WIDTH**2
        self.tail_weight = 2.0 * self.delta / self.core2
        self.gauss_weight = 1.0 - self.tail_weight
        self._gauss = GaussianLaw()

    def _tail_derivative(self, z: np.ndarray, order: int) -> np.ndarray:
        q = self.core2 + z**2
        if order == 0:
            return q**-1.5
        if order == 1:
            return -3.0 * z * q**-2.5
        if order == 2:
            return -3.0 * q**-2.5 + 15.0 * z**2 * q**-3.5
        if order == 3:
            return 45.0 * z * q**-3.5 - 105.0 * z**3 * q**-4.5
        return 45.0 * q**-3.5 - 630.0 * z**2 * q**-4.5 + 945.0 * z**4 * q**-5.5

    def derivative(self, z, order: int):
        arr, scalar = _as_array(z)
        gauss = self._gauss.derivative(arr, order) if order else self._gauss.pdf(arr)
        values = self.gauss_weight * gauss + self.delta * self._tail_derivative(arr, order)
        return _restore(values, scalar)

    def pdf(self, z):
        return self.derivative(z, 0)

    def log_pdf(self, z):
        arr, scalar = _as_array(z)
        log_gauss = math.log(self.gauss_weight) + self._gauss.log_pdf(arr)
        log_tail = math.log(self.delta) - 1.5 * np.log(self.core2 + arr**2)
        return _restore(np.logaddexp(log_gauss, log_tail), scalar)

    def _upper(self, a):
        tail = (self.delta / self.core2) * (1.0 - a / np.sqrt(self.core2 + a**2))
        return self.gauss_weight * self._gauss._upper(a) + tail

    def sample(self, size, rng: RngStream) -> np.ndarray:
        """Смесь N(0, 2) и масштабированного t₂ с весом 2δ/a²."""
        gen = rng.generator
        core = _SQRT2 * gen.standard_normal(size)
        tail = (NAGAEV_CORE_WIDTH / _SQRT2) * gen.standard_t(2.0, size)
        pick = gen.uniform(size=size) < self.tail_weight
        return np.where(pick, tail, core)


class TabulatedStableLaw(StandardStableLaw):
    """
    Общий α: таблица в ядре, асимптотический ряд в хвосте.

    Узлы z = w sinh(u) с равномерным шагом TABLE_STEP по u, где w ширина
    ядра sqrt(g(0)/|g''(0)|). В узлах квадратурой считаются g, g', g'';
    g и g' интерполируются эрмитовыми сплайнами, g'' кубическим.
    За z_switch плотность и производные берутся из ряда.
    """

    def __init__(self, alpha: float):
        start = time.perf_counter()
        self.alpha = alpha
        self.z_switch, n_terms = _find_series_switch(alpha, self.core_width)
        self.series = TailSeries(alpha, n_terms)

        u_max = math.asinh(self.z_switch / self.core_width)
        n_nodes = max(int(math.ceil(u_max / TABLE_STEP)), 8) + 1
        nodes = self.core_width * np.sinh(np.linspace(0.0, u_max, n_nodes))
        nodes[-1] = self.z_switch
        values = np.array([[self._quadrature(z, order) for z in nodes] for order in range(3)])

        self._pdf = CubicHermiteSpline(nodes, values[0], values[1])
        self._d1 = CubicHermiteSpline(nodes, values[1], values[2])
        self._d2 = CubicSpline(nodes, values[2], bc_type=((1, 0.0), "not-a-knot"))
        self._mass = self._pdf.antiderivative()

        self.core_mass = float(self._mass(self.z_switch))
        self.tail_mass = float(self.series.survival(self.z_switch))
        logger.info(
            f"Таблица α={alpha:.6g}: {n_nodes} узлов, z_switch={self.z_switch:.4g}, "
            f"членов ряда {n_terms}, {time.perf_counter() - start:.2f}s"
        )
        logger.debug(f"Нормировка α={alpha:.6g}: 2(ядро + хвост) - 1 = {self.normalization_error:.3e}")

    @property
    def normalization_error(self) -> float:
        return 2.0 * (self.core_mass + self.tail_mass) - 1.0

    def _quadrature(self, z: float, order: int) -> float:
        value, abserr = inversion_integral(self.alpha, float(z), order)
        tolerance = EPS_DENSITY if order == 0 else EPS_DERIV
        if abserr > tolerance:
            raise AccuracyError(
                f"Квадратура не сошлась: α={self.alpha}, z={z}, порядок {order}",
                achieved_error=abserr,
            )
        return value

    def _split(self, z, inner, outer, order: int = 0):
        arr, scalar = _as_array(z)
        a = np.abs(arr)
        out = np.empty_like(a)
        mask = a <= self.z_switch
        if mask.any():
            out[mask] = inner(a[mask])
        if (~mask).any():
            out[~mask] = outer(a[~mask])
        if order % 2:
            out = np.where(arr < 0.0, -out, out)
        return _restore(out, scalar)

    def pdf(self, z):
        return self._split(z, self._pdf, lambda a: np.exp(self.series.log_value(a)))

    def log_pdf(self, z):
        return self._split(z, lambda a: np.log(self._pdf(a)), self.series.log_value)

    def derivative(self, z, order: int):
        if order == 0:
            return self.pdf(z)
        if order == 1:
            return self._split(z, self._d1, lambda a: self.series.value(a, 1), order=1)
        if order == 2:
            return self._split(z, self._d2, lambda a: self.series.value(a, 2), order=2)
        return self.evaluate(z, order)

    def evaluate(self, z, order: int = 0):
        inner = np.vectorize(lambda a: self._quadrature(a, order), otypes=[float])
        return self._split(z, inner, lambda a: self.series.value(a, order), order=order)

    def _upper(self, a):
        out = np.empty_like(a)
        mask = a <= self.z_switch
        out[mask] = 0.5 - self._mass(a[mask])
        out[~mask] = self.series.survival(a[~mask])
        return out


@lru_cache(maxsize=64)
def standard_law(alpha: float) -> StandardStableLaw:
    """Стандартный закон для α (кэшируется; таблица строится один раз)."""
    _check_alpha(alpha)
    if alpha == 2.0:
        return GaussianLaw()
    if alpha == 1.0:
        return CauchyLaw()
    if alpha > NEAR_GAUSSIAN_ALPHA:
        return NearGaussianLaw(alpha)
    return TabulatedStableLaw(alpha)


# ═══════════════════════════════════════════════════════════════════════════════
# Плотность в момент t
# ═══════════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class StableDensity:
    """Подготовленный вычислитель f_α(x; t) при фиксированных (α, σ, t)."""

    params: StableParams
    t: float
    scale: float = field(init=False)
    law: StandardStableLaw = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_time(self.t)
        object.__setattr__(self, "scale", self.params.scale(self.t))
        object.__setattr__(self, "law", standard_law(self.params.alpha))

    def pdf(self, x):
        return self.law.pdf(np.asarray(x, dtype=float) / self.scale) / self.scale

    def log_pdf(self, x):
        return self.law.log_pdf(np.asarray(x, dtype=float) / self.scale) - math.log(self.scale)

    def derivative(self, x, order: int):
        _check_order(order, allow_zero=True)
        z = np.asarray(x, dtype=float) / self.scale
        return self.law.derivative(z, order) / self.scale ** (order + 1)

    def cdf(self, x):
        return self.law.cdf(np.asarray(x, dtype=float) / self.scale)

    def sf(self, x):
        return self.law.sf(np.asarray(x, dtype=float) / self.scale)

    def quantile(self, p: float) -> float:
        return self.scale * self.law.quantile(p)

    def sample(self, size, rng: RngStream) -> np.ndarray:
        return self.scale * self.law.sample(size, rng)


def stable_pdf(params: StableParams, t: float, x):
    """
    Плотность f_α(x; t) прямым вычислением.

    Args:
        params: Параметры (α, σ)
        t: Время t > 0
        x: Точка или массив точек

    Returns:
        Значение плотности (float или массив)
    """
    _check_time(t)
    c = params.scale(t)
    return standard_law(params.alpha).evaluate(np.asarray(x, dtype=float) / c, 0) / c


def stable_pdf_derivative(params: StableParams, t: float, x, order: int):
    """Производная порядка 1..4 плотности f_α(x; t) по x."""
    _check_time(t)
    _check_order(order)
    c = params.scale(t)
    z = np.asarray(x, dtype=float) / c
    return standard_law(params.alpha).evaluate(z, order) / c ** (order + 1)


def stable_cdf(params: StableParams, t: float, x):
    """Функция распределения F_α(x; t)."""
    return StableDensity(params, t).cdf(x)


def stable_quantile(params: StableParams, t: float, p: float) -> float:
    """Квантиль уровня p ∈ (0, 1)."""
    return StableDensity(params, t).quantile(p)


def sample_stable_increment(
    params: StableParams,
    dt: float,
    rng: RngStream,
    size: int | tuple[int, ...] | None = None,
):
    """
    Приращения процесса за время dt методом Chambers-Mallows-Stuck.

    Returns:
        σ dt^{1/α} X, X стандартная устойчивая величина
    """
    if not (dt > 0.0) or not math.isfinite(dt):
        raise DomainError(f"шаг dt должен быть положительным, получено: {dt}")
    draws = params.scale(dt) * cms_standard(params.alpha, size if size is not None else 1, rng)
    return float(draws[0]) if size is None else draws


def standard_derivative(alpha: float, z: float, order: int = 0) -> float:
    """
    g^{(n)}(z) стандартного закона без построения таблицы.

    Для решателей, перебирающих много значений α.
    """
    _check_alpha(alpha)
    _check_order(order, allow_zero=True)
    if alpha in (1.0, 2.0) or alpha > NEAR_GAUSSIAN_ALPHA:
        return float(standard_law(alpha).derivative(float(z), order))
    value, abserr = inversion_integral(alpha, float(z), order)
    tolerance = EPS_DENSITY if order == 0 else EPS_DERIV
    if abserr > tolerance:
        raise AccuracyError(
            f"Квадратура не сошлась: α={alpha}, z={z}, порядок {order}",
            achieved_error=abserr,
        )
    return value
