"""Тесты стандартного устойчивого закона и плотности f_α(x; t).

Проверяет:
- Замкнутые формы Коши и Гаусса
- Нормировку, масштабирование и свойство Чепмена-Колмогорова
- Производные против конечных разностей
- Хвостовую асимптотику
- Генератор Chambers-Mallows-Stuck
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate, stats

from src.errors import DomainError
from src.levy.rng import RngStream, cms_standard, cms_transform
from src.levy.stable_core import (
    CauchyLaw,
    NearGaussianLaw,
    StableDensity,
    TabulatedStableLaw,
    inversion_integral,
    sample_stable_increment,
    stable_cdf,
    stable_pdf,
    stable_pdf_derivative,
    stable_quantile,
    stable_tail_constant,
    standard_law,
)
from src.schemas.process import StableParams

# ═══════════════════════════════════════════════════════════════════════════════
# Замкнутые формы
# ═══════════════════════════════════════════════════════════════════════════════


class TestClosedForms:
    """Сравнение с аналитическими плотностями."""

    def test_cauchy_at_zero(self, cauchy):
        """f_1(0; 1) = 1/π."""
        assert stable_pdf(cauchy, 1.0, 0.0) == pytest.approx(1.0 / math.pi, abs=1e-12)

    def test_gaussian_variance(self, gaussian):
        """α = 2: нормальный закон с дисперсией 2σ²t."""
        x = np.linspace(-4.0, 4.0, 17)
        t = 0.7
        expected = stats.norm.pdf(x, scale=math.sqrt(2.0 * t))
        np.testing.assert_allclose(stable_pdf(gaussian, t, x), expected, rtol=1e-12)

    @pytest.mark.parametrize("z", [0.3, 1.0, 2.5, 7.0])
    def test_quadrature_matches_cauchy(self, z):
        """Обращение Фурье воспроизводит плотность Коши и её производные."""
        law = CauchyLaw()
        for order in range(5):
            value, _ = inversion_integral(1.0, z, order)
            assert value == pytest.approx(float(law.derivative(z, order)), abs=1e-9), f"порядок {order}"

    @pytest.mark.parametrize("z", [0.5, 1.5, 3.0])
    def test_quadrature_matches_gaussian(self, z):
        """Обращение Фурье при α = 2 даёт exp(-z²/4) / (2√π)."""
        value, _ = inversion_integral(2.0, z)
        assert value == pytest.approx(math.exp(-(z**2) / 4.0) / (2.0 * math.sqrt(math.pi)), abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.7, 1.5])
    def test_value_at_zero(self, alpha):
        """g(0) = Γ(1 + 1/α) / π."""
        params = StableParams(alpha=alpha)
        assert stable_pdf(params, 1.0, 0.0) == pytest.approx(math.gamma(1.0 + 1.0 / alpha) / math.pi, rel=1e-12)


# ═══════════════════════════════════════════════════════════════════════════════
# Нормировка и масштаб
# ═══════════════════════════════════════════════════════════════════════════════


class TestNormalization:
    """Масса, масштабирование и полугрупповое свойство."""

    @pytest.mark.parametrize("alpha", [0.7, 1.5])
    def test_table_mass(self, alpha):
        """Ядро таблицы плюс хвост ряда дают единицу."""
        assert abs(standard_law(alpha).normalization_error) < 1e-6

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 1.9, 1.99, 2.0])
    def test_mass_reference_set(self, alpha):
        """Ядро плюс аналитический хвост дают единицу с точностью 1e-6."""
        law = standard_law(alpha)
        if isinstance(law, TabulatedStableLaw):
            error = law.normalization_error
        else:
            core, _ = integrate.quad(lambda z: float(law.pdf(z)), 0.0, 50.0, limit=400, epsabs=1e-13)
            error = 2.0 * (core + float(law.sf(50.0))) - 1.0
        assert abs(error) < 1e-6

    def test_near_gaussian_mass(self):
        """Модель около α = 2 нормирована точно."""
        law = NearGaussianLaw(1.99999)
        mass, _ = integrate.quad(lambda z: float(law.pdf(z)), -np.inf, np.inf, limit=400)
        assert mass == pytest.approx(1.0, abs=1e-8)
        assert float(law.sf(0.0)) == 0.5

    def test_scaling_covariance(self):
        """f(x; t) = g(x/c)/c, c = σ t^{1/α}."""
        params = StableParams(alpha=1.5, sigma=2.0)
        t = 3.0
        c = 2.0 * t ** (1.0 / 1.5)
        x = np.array([-4.0, 0.5, 2.0, 9.0])
        expected = stable_pdf(StableParams(alpha=1.5), 1.0, x / c) / c
        np.testing.assert_allclose(stable_pdf(params, t, x), expected, rtol=1e-12)

    def test_chapman_kolmogorov(self, stable15):
        """∫ f(y; ½) f(x - y; ½) dy = f(x; 1)."""
        half = StableDensity(stable15, 0.5)
        x = 0.8

        def integrand(y):
            return float(half.pdf(y)) * float(half.pdf(x - y))

        total = sum(
            integrate.quad(integrand, a, b, limit=400, epsabs=1e-12)[0]
            for a, b in [(-np.inf, -30.0), (-30.0, 30.0), (30.0, np.inf)]
        )
        assert total == pytest.approx(float(stable_pdf(stable15, 1.0, x)), abs=1e-6)

    def test_table_matches_quadrature(self, stable15):
        """Интерполяция таблицы согласована с прямой квадратурой."""
        density = StableDensity(stable15, 1.0)
        x = np.array([0.13, 0.9, 2.2, 5.5])
        np.testing.assert_allclose(density.pdf(x), stable_pdf(stable15, 1.0, x), atol=1e-8)

    def test_law_is_cached(self):
        assert standard_law(1.5) is standard_law(1.5)


# ═══════════════════════════════════════════════════════════════════════════════
# Производные
# ═══════════════════════════════════════════════════════════════════════════════


class TestDerivatives:
    """Производные по x."""

    @pytest.mark.parametrize("x", [0.4, 1.7, -2.3])
    def test_first_derivative_finite_difference(self, stable15, x):
        h = 1e-3
        fd = (stable_pdf(stable15, 1.0, x + h) - stable_pdf(stable15, 1.0, x - h)) / (2.0 * h)
        assert stable_pdf_derivative(stable15, 1.0, x, 1) == pytest.approx(fd, abs=1e-6)

    @pytest.mark.parametrize("x", [0.4, 1.7])
    def test_second_derivative_finite_difference(self, stable15, x):
        h = 1e-3
        f = [stable_pdf(stable15, 1.0, x + k * h) for k in (-1, 0, 1)]
        fd = (f[0] - 2.0 * f[1] + f[2]) / h**2
        assert stable_pdf_derivative(stable15, 1.0, x, 2) == pytest.approx(fd, abs=1e-5)

    @pytest.mark.slow
    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_random_points_against_lower_order(self, order):
        """Порядок n против центральной разности аналитического порядка n - 1 в 20 случайных (α, x)."""
        gen = np.random.default_rng(20 + order)
        alphas = gen.choice([1.0, 1.2, 1.5, 1.7, 1.9], size=20)
        xs = gen.uniform(-4.0, 4.0, size=20)
        h = 2e-4

        def lower(params, x):
            if order == 1:
                return float(stable_pdf(params, 1.0, x))
            return float(stable_pdf_derivative(params, 1.0, x, order - 1))

        for alpha, x in zip(alphas, xs):
            params = StableParams(alpha=float(alpha))
            fd = (lower(params, x + h) - lower(params, x - h)) / (2.0 * h)
            value = float(stable_pdf_derivative(params, 1.0, x, order))
            assert value == pytest.approx(fd, abs=1e-5), f"α={alpha}, x={x:.4f}"

    def test_derivative_scaling(self):
        """f^{(n)}(x; t) = g^{(n)}(x/c) / c^{n+1}."""
        params = StableParams(alpha=1.0, sigma=1.5)
        c = 1.5 * 2.0
        value = stable_pdf_derivative(params, 2.0, 1.2, 3)
        assert value == pytest.approx(float(CauchyLaw().derivative(1.2 / c, 3)) / c**4, rel=1e-12)

    def test_odd_symmetry(self, stable15):
        np.testing.assert_allclose(
            stable_pdf_derivative(stable15, 1.0, 1.1, 1),
            -stable_pdf_derivative(stable15, 1.0, -1.1, 1),
            rtol=1e-12,
        )


# ═══════════════════════════════════════════════════════════════════════════════
# Хвосты и функция распределения
# ═══════════════════════════════════════════════════════════════════════════════


class TestTailsAndCdf:
    """Асимптотика, CDF и квантили."""

    def test_tail_constant_cauchy(self):
        assert stable_tail_constant(1.0) == pytest.approx(1.0 / math.pi)
        assert stable_tail_constant(2.0) == 0.0

    def test_power_law_tail(self, stable15):
        """g(z) z^{α+1} -> Γ(α+1) sin(πα/2) / π."""
        z = 200.0
        value = float(StableDensity(stable15, 1.0).pdf(z)) * z**2.5
        assert value == pytest.approx(stable_tail_constant(1.5), rel=0.01)

    def test_near_gaussian_tail(self):
        """За ядром плотность близка к δ|z|^{-3}."""
        law = NearGaussianLaw(1.999995)
        z = 100.0
        assert float(law.pdf(z)) == pytest.approx(5e-6 * z**-3, rel=1e-3)

    def test_cauchy_cdf(self, cauchy):
        assert float(stable_cdf(cauchy, 1.0, 1.0)) == pytest.approx(0.75, abs=1e-14)
        assert stable_quantile(cauchy, 1.0, 0.75) == pytest.approx(1.0, abs=1e-12)

    def test_cdf_matches_integral(self, stable15):
        x = 1.3
        mass, _ = integrate.quad(lambda y: float(stable_pdf(stable15, 1.0, y)), 0.0, x, epsabs=1e-12)
        assert float(stable_cdf(stable15, 1.0, 0.0)) == 0.5
        assert float(stable_cdf(stable15, 1.0, x)) == pytest.approx(0.5 + mass, abs=1e-7)

    @pytest.mark.parametrize("p", [0.05, 0.3, 0.9, 0.999])
    def test_quantile_inverts_cdf(self, stable15, p):
        x = stable_quantile(stable15, 1.0, p)
        assert float(stable_cdf(stable15, 1.0, x)) == pytest.approx(p, abs=1e-10)

    def test_heavy_tail_quantile(self):
        """α = 0.5, p = 0.99: квантиль в тяжёлом хвосте обращает CDF и симметричен."""
        params = StableParams(alpha=0.5)
        x = stable_quantile(params, 1.0, 0.99)
        assert x > 10.0
        assert float(stable_cdf(params, 1.0, x)) == pytest.approx(0.99, abs=1e-10)
        assert stable_quantile(params, 1.0, 0.01) == pytest.approx(-x, rel=1e-12)


# ═══════════════════════════════════════════════════════════════════════════════
# Генератор CMS
# ═══════════════════════════════════════════════════════════════════════════════


class TestSampling:
    """Chambers-Mallows-Stuck и приращения процесса."""

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_cms_distribution(self, alpha):
        """KS тест выборки против CDF закона."""
        law = standard_law(alpha)
        samples = cms_standard(alpha, 20_000, RngStream(7, 0))
        result = stats.kstest(samples, lambda x: np.asarray(law.cdf(x)))
        assert result.pvalue > 1e-3, f"α={alpha}: p-value {result.pvalue:.2e}"

    def test_cms_zero_angle(self):
        U = np.array([0.0, 0.3])
        W = np.array([0.5, 1.0])
        assert cms_transform(1.5, U, W)[0] == 0.0
        np.testing.assert_allclose(cms_transform(1.0, U, W), np.tan(U))

    def test_increment_scale(self, gaussian, rng):
        """Приращения за dt при α = 2 имеют дисперсию 2σ²dt."""
        dt = 0.01
        draws = sample_stable_increment(gaussian, dt, rng, size=50_000)
        assert draws.shape == (50_000,)
        assert np.var(draws) == pytest.approx(2.0 * dt, rel=0.03)

    def test_scalar_increment(self, stable15, rng):
        assert isinstance(sample_stable_increment(stable15, 0.1, rng), float)


# ═══════════════════════════════════════════════════════════════════════════════
# Область определения
# ═══════════════════════════════════════════════════════════════════════════════


class TestDomain:
    """Ошибки на входах вне области определения."""

    @pytest.mark.parametrize("alpha", [0.0, -1.0, 2.5, float("nan")])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(ValidationError):
            StableParams(alpha=alpha)

    def test_invalid_sigma(self):
        with pytest.raises(ValidationError):
            StableParams(alpha=1.5, sigma=0.0)

    def test_standard_law_alpha(self):
        with pytest.raises(DomainError):
            standard_law(2.5)

    def test_nonpositive_time(self, stable15):
        with pytest.raises(DomainError):
            stable_pdf(stable15, 0.0, 1.0)

    @pytest.mark.parametrize("order", [0, 5])
    def test_derivative_order(self, stable15, order):
        with pytest.raises(DomainError):
            stable_pdf_derivative(stable15, 1.0, 1.0, order)

    def test_quantile_level(self, stable15):
        with pytest.raises(DomainError):
            stable_quantile(stable15, 1.0, 1.0)

    def test_increment_step(self, stable15, rng):
        with pytest.raises(DomainError):
            sample_stable_increment(stable15, 0.0, rng)
