"""Тесты построения мостов Леви.

Проверяет:
- Плотность середины: замкнутые формы, симметрию, нормировку
- Семплеры середины: обратная CDF и точный rejection-отбор
- Рекурсивные мосты: сетку, закрепление концов, гауссову ковариацию
- Растянутые мосты и исчерпание попыток
- Подсчёт длинных скачков
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.errors import DomainError, RejectionExhaustedError
from src.levy.bifurcation import bifurcation_length
from src.levy.bridge_kernel import (
    MidpointDensity,
    Path,
    dyadic_times,
    effective_jump_census,
    jump_counts,
    long_jump_threshold,
    midpoint_density,
    midpoint_pdf,
    recursive_bridge_batch,
    sample_bridge_recursive,
    sample_bridge_stretched,
    sample_midpoint,
    sample_midpoint_offsets,
    sample_unconditioned_path,
    stretch_to_arrival,
    stretched_bridge_batch,
    uniform_times,
)
from src.levy.rng import RngStream
from src.levy.stable_core import StableDensity, stable_cdf
from src.schemas.process import BridgeSpec, StableParams


def cauchy_pdf(x, t):
    """f_1(x; t) при σ = 1."""
    return t / (math.pi * (t**2 + x**2))


# ═══════════════════════════════════════════════════════════════════════════════
# Плотность середины
# ═══════════════════════════════════════════════════════════════════════════════


class TestMidpointDensity:
    """Условная плотность x(T/2) при x(T) = L."""

    def test_cauchy_at_origin(self, cauchy):
        """L = 0, x = 0: f(0; ½)² / f(0; 1) = 4/π."""
        spec = BridgeSpec(params=cauchy, T=1.0, L=0.0)
        assert midpoint_pdf(spec, 0.0) == pytest.approx(4.0 / math.pi, rel=1e-12)

    @pytest.mark.parametrize("x", [-1.0, 0.3, 1.0, 2.7])
    def test_cauchy_product_formula(self, cauchy_bridge, x):
        expected = cauchy_pdf(x, 0.5) * cauchy_pdf(2.0 - x, 0.5) / cauchy_pdf(2.0, 1.0)
        assert midpoint_pdf(cauchy_bridge, x) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("L", [0.0, 1.3, -4.0])
    def test_gaussian_peak(self, gaussian, L):
        """α = 2: пик 1/√(πσ²T) в точке L/2."""
        spec = BridgeSpec(params=gaussian, T=1.0, L=L)
        assert midpoint_pdf(spec, L / 2.0) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)

    @pytest.mark.parametrize("x", [0.2, 0.9, 3.5])
    def test_symmetry(self, stable15, x):
        spec = BridgeSpec(params=stable15, T=1.0, L=2.0)
        assert midpoint_pdf(spec, x) == pytest.approx(midpoint_pdf(spec, 2.0 - x), rel=1e-10)

    @pytest.mark.parametrize("L", [0.5, 2.0, 6.0])
    def test_normalization(self, stable15, L):
        """Масса плотности середины равна 1 (Чепмен-Колмогоров)."""
        spec = BridgeSpec(params=stable15, T=1.0, L=L)
        density = midpoint_density(spec)
        assert density.normalization == pytest.approx(1.0, abs=1e-6)

        total = sum(
            integrate.quad(lambda x: midpoint_pdf(spec, x), a, b, limit=400, epsabs=1e-12)[0]
            for a, b in [(-np.inf, -20.0), (-20.0, L + 20.0), (L + 20.0, np.inf)]
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_cdf_center_and_quantiles(self, stable15):
        density = MidpointDensity(BridgeSpec(params=stable15, T=1.0, L=2.0))
        assert density.cdf(1.0) == pytest.approx(0.5, abs=1e-15)
        for p in (0.01, 0.3, 0.5, 0.9, 0.999):
            assert density.cdf(density.quantile(p)) == pytest.approx(p, abs=1e-6)

    def test_quantile_level(self, stable15):
        density = midpoint_density(BridgeSpec(params=stable15, T=1.0, L=1.0))
        with pytest.raises(DomainError):
            density.quantile(0.0)


# ═══════════════════════════════════════════════════════════════════════════════
# Семплирование середины
# ═══════════════════════════════════════════════════════════════════════════════


class TestMidpointSampling:
    """Обратная CDF и rejection-отбор."""

    def test_gaussian_moments(self, gaussian, rng):
        """α = 2: среднее L/2 и дисперсия σ²T/2."""
        spec = BridgeSpec(params=gaussian, T=1.0, L=1.4)
        n = 100_000
        draws = midpoint_density(spec).sample(n, rng)
        assert abs(draws.mean() - 0.7) < 4.0 * math.sqrt(0.5 / n)
        assert abs(draws.var() - 0.5) < 4.0 * 0.5 * math.sqrt(2.0 / n)

    def test_scalar_draw(self, stable15, rng):
        spec = BridgeSpec(params=stable15, T=1.0, L=1.0)
        assert isinstance(sample_midpoint(spec, rng), float)

    def test_inverse_cdf_consistency(self, stable15):
        """KS тест выборки обратной CDF против табулированной CDF."""
        density = midpoint_density(BridgeSpec(params=stable15, T=1.0, L=2.0))
        draws = density.sample(20_000, RngStream(3, 0))
        assert stats.kstest(draws, lambda x: np.asarray(density.cdf(x))).pvalue > 1e-3

    @pytest.mark.parametrize("alpha,L", [(1.5, 2.0), (1.0, 4.0), (0.8, 0.5)])
    def test_rejection_matches_density(self, alpha, L):
        """Точный rejection-отбор распределён по плотности середины."""
        params = StableParams(alpha=alpha)
        spec = BridgeSpec(params=params, T=1.0, L=L)
        density = midpoint_density(spec)
        draws = sample_midpoint_offsets(params, 1.0, np.full(20_000, L), RngStream(4, 0))
        assert stats.kstest(draws, lambda x: np.asarray(density.cdf(x))).pvalue > 1e-3

    def test_cauchy_bimodal(self, cauchy, rng):
        """α = 1, L = 4: моды около 2 ± √3."""
        spec = BridgeSpec(params=cauchy, T=1.0, L=4.0)
        draws = midpoint_density(spec).sample(100_000, rng)
        counts, edges = np.histogram(draws, bins=np.arange(-1.0, 5.0001, 0.1))
        centers = 0.5 * (edges[:-1] + edges[1:])
        left = centers[np.argmax(np.where(centers < 2.0, counts, -1))]
        right = centers[np.argmax(np.where(centers > 2.0, counts, -1))]
        assert abs(left - (2.0 - math.sqrt(3.0))) <= 0.15
        assert abs(right - (2.0 + math.sqrt(3.0))) <= 0.15


# ═══════════════════════════════════════════════════════════════════════════════
# Рекурсивные мосты
# ═══════════════════════════════════════════════════════════════════════════════


class TestRecursiveBridge:
    """Рекурсивное деление пополам."""

    def test_dyadic_grid(self, stable15, rng):
        spec = BridgeSpec(params=stable15, T=2.0, L=0.7)
        path = sample_bridge_recursive(spec, 10, rng)
        assert path.n_points == 1025
        np.testing.assert_array_equal(path.times, dyadic_times(2.0, 10))
        assert path.times[-1] == 2.0

    def test_depth_zero(self, stable15, rng):
        spec = BridgeSpec(params=stable15, T=1.0, L=0.7)
        path = sample_bridge_recursive(spec, 0, rng)
        np.testing.assert_array_equal(path.times, [0.0, 1.0])
        np.testing.assert_array_equal(path.positions, [0.0, 0.7])

    @pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5, 2.0])
    def test_endpoints_pinned(self, alpha, rng):
        """Концы ровно (0, 0) и (T, L)."""
        L = 0.1 + 0.2
        spec = BridgeSpec(params=StableParams(alpha=alpha), T=1.0, L=L)
        positions = recursive_bridge_batch(spec, 6, 50, rng)
        assert positions.shape == (50, 65)
        assert np.all(positions[:, 0] == 0.0)
        assert np.all(positions[:, -1] == L)

    def test_coarse_levels_are_prefix(self, stable15):
        """Узлы глубины 2 не зависят от дальнейшего деления."""
        spec = BridgeSpec(params=stable15, T=1.0, L=1.0)
        coarse = recursive_bridge_batch(spec, 2, 200, RngStream(5, 0))
        fine = recursive_bridge_batch(spec, 5, 200, RngStream(5, 0))
        np.testing.assert_array_equal(coarse, fine[:, ::8])

    @pytest.mark.parametrize("node,t", [(1, 0.25), (3, 0.75)])
    def test_quarter_point_marginal(self, stable15, node, t):
        """
        Склейка двух полумостов глубины 2 даёт точный закон x(T/4) и x(3T/4).

        Плотность f(y; t) f(L - y; T - t) / f(L; T), KS на уровне 1%.
        """
        L = 1.0
        spec = BridgeSpec(params=stable15, T=1.0, L=L)
        positions = recursive_bridge_batch(spec, 2, 100_000, RngStream(31, 0))
        grid = np.linspace(-80.0, 80.0, 320_001)
        weight = StableDensity(stable15, t).pdf(grid) * StableDensity(stable15, 1.0 - t).pdf(L - grid)
        cdf = integrate.cumulative_trapezoid(weight, grid, initial=0.0)
        cdf /= cdf[-1]
        result = stats.kstest(positions[:, node], lambda x: np.interp(x, grid, cdf))
        assert result.pvalue > 0.01

    def test_depth_one_marginal(self, stable15):
        """Середина глубины 1 распределена по плотности середины."""
        spec = BridgeSpec(params=stable15, T=1.0, L=2.0)
        density = midpoint_density(spec)
        positions = recursive_bridge_batch(spec, 1, 20_000, RngStream(6, 0))
        assert stats.kstest(positions[:, 1], lambda x: np.asarray(density.cdf(x))).pvalue > 1e-3

    def test_gaussian_bridge_covariance(self, gaussian):
        """α = 2: среднее tL/T, дисперсия 2σ² t(T - t)/T."""
        spec = BridgeSpec(params=gaussian, T=1.0, L=0.8)
        positions = recursive_bridge_batch(spec, 4, 20_000, RngStream(8, 0))
        quarter = positions[:, 4]
        assert abs(quarter.mean() - 0.2) < 4.0 * math.sqrt(0.375 / 20_000)
        assert quarter.var() == pytest.approx(0.375, rel=0.05)

    def test_negative_depth(self, stable15, rng):
        with pytest.raises(DomainError):
            recursive_bridge_batch(BridgeSpec(params=stable15), -1, 1, rng)

    @pytest.mark.slow
    def test_single_long_jump_above_lb(self):
        """α = 1.9, L = 1.5 L_b: у большинства траекторий одно приращение больше L/2."""
        params = StableParams(alpha=1.9)
        L = 1.5 * bifurcation_length(1.9).L_b
        spec = BridgeSpec(params=params, T=1.0, L=L)
        positions = recursive_bridge_batch(spec, 10, 2000, RngStream(9, 0))
        single = jump_counts(positions, L / 2.0) == 1
        assert single.mean() > 0.5


# ═══════════════════════════════════════════════════════════════════════════════
# Растянутые мосты
# ═══════════════════════════════════════════════════════════════════════════════


class TestStretchedBridge:
    """W(t) + (t/T)(L - W(T)) с отбраковкой."""

    def test_stretch_endpoints(self):
        times = uniform_times(1.0, 0.25)
        positions = np.array([[0.0, 0.4, -0.2, 1.0, 2.0]])
        stretched = stretch_to_arrival(positions, times, 0.5)
        np.testing.assert_allclose(stretched[0], [0.0, 0.025, -0.95, -0.125, 0.5])
        assert stretched[0, -1] == 0.5

    def test_no_stretch_when_arrived(self):
        times = uniform_times(1.0, 0.25)
        positions = np.array([[0.0, 0.3, -0.1, 0.2, 0.5]])
        np.testing.assert_array_equal(stretch_to_arrival(positions, times, 0.5), positions)

    def test_infinite_threshold_accepts_all(self, gaussian, rng):
        spec = BridgeSpec(params=gaussian, T=1.0, L=0.3)
        batch = stretched_bridge_batch(spec, 0.01, math.inf, 100, rng)
        assert batch.attempts == 100
        assert batch.acceptance_rate == 1.0
        assert np.all(batch.positions[:, -1] == 0.3)

    def test_acceptance_matches_endpoint_law(self):
        """Доля принятых равна массе закона x(T) в окне |x - L| ≤ L_thresh."""
        params = StableParams(alpha=0.5)
        spec = BridgeSpec(params=params, T=1.0, L=0.0)
        L_thresh = 0.5
        batch = stretched_bridge_batch(spec, 0.1, L_thresh, 2000, RngStream(10, 0))
        p = float(stable_cdf(params, 1.0, L_thresh) - stable_cdf(params, 1.0, -L_thresh))
        n = batch.attempts
        stderr = math.sqrt(p * (1.0 - p) / n)
        assert abs(batch.acceptance_rate - p) < 4.0 * stderr

    def test_acceptance_monotone_in_threshold(self, stable15):
        spec = BridgeSpec(params=stable15, T=1.0, L=0.0)
        rates = [
            stretched_bridge_batch(spec, 0.1, thr, 500, RngStream(11, 0)).acceptance_rate
            for thr in (0.1, 0.5, 2.0, math.inf)
        ]
        assert rates == sorted(rates)

    def test_single_path(self, stable15, rng):
        spec = BridgeSpec(params=stable15, T=1.0, L=1.0)
        path, attempts = sample_bridge_stretched(spec, 0.01, 1.0, rng)
        assert path.n_points == 101
        assert path.positions[-1] == 1.0
        assert path.attempts == attempts >= 1

    def test_rejection_exhausted(self, stable15, rng):
        spec = BridgeSpec(params=stable15, T=1.0, L=3.0)
        with pytest.raises(RejectionExhaustedError) as exc_info:
            stretched_bridge_batch(spec, 0.1, 1e-12, 3, rng, max_attempts=5)
        error = exc_info.value
        assert error.attempts == 15
        assert error.accepted == 0
        assert error.acceptance_rate == 0.0
        assert error.partial.shape == (0, 11)

    def test_invalid_step(self, stable15, rng):
        with pytest.raises(DomainError):
            stretched_bridge_batch(BridgeSpec(params=stable15), 0.3, 1.0, 1, rng)
        with pytest.raises(DomainError):
            stretched_bridge_batch(BridgeSpec(params=stable15), 0.1, 0.0, 1, rng)


# ═══════════════════════════════════════════════════════════════════════════════
# Длинные скачки
# ═══════════════════════════════════════════════════════════════════════════════


class TestJumpCensus:
    """Приращения выше порога L_b (Δt/T)^{1/α}."""

    def test_constant_path(self):
        path = Path(np.linspace(0.0, 1.0, 11), np.zeros(11))
        assert effective_jump_census(path, threshold=0.1).count == 0

    def test_single_step(self):
        path = Path(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        census = effective_jump_census(path, threshold=1.0)
        assert census.count == 1
        np.testing.assert_array_equal(census.sizes, [2.0])

    def test_default_threshold(self, cauchy):
        """α = 1: порог σT (Δt/T) = Δt."""
        assert long_jump_threshold(cauchy, 1.0, 0.01) == pytest.approx(0.01, rel=1e-6)
        path = Path(uniform_times(1.0, 0.25), np.array([0.0, 0.1, 0.2, 1.5, 1.4]))
        census = effective_jump_census(path, params=cauchy)
        assert census.threshold == pytest.approx(0.25, rel=1e-6)
        np.testing.assert_array_equal(census.indices, [2])

    def test_requires_threshold_or_params(self):
        path = Path(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        with pytest.raises(DomainError):
            effective_jump_census(path)

    def test_unconditioned_path(self, stable15, rng):
        path = sample_unconditioned_path(stable15, 1.0, 0.002, rng)
        assert path.n_points == 501
        assert path.positions[0] == 0.0
        assert path.stream == 0

    def test_jump_counts(self):
        positions = np.array([[0.0, 0.1, 1.0, 1.1], [0.0, 0.0, 0.0, 0.0]])
        np.testing.assert_array_equal(jump_counts(positions, 0.5), [1, 0])

    @pytest.mark.slow
    def test_fewer_jumps_below_lb(self):
        """Ниже L_b длинных скачков в среднем меньше, чем выше."""
        params = StableParams(alpha=1.9)
        lb = bifurcation_length(1.9).L_b
        threshold = long_jump_threshold(params, 1.0, 2.0**-10)
        means = []
        for factor in (0.5, 1.5):
            spec = BridgeSpec(params=params, T=1.0, L=factor * lb)
            positions = recursive_bridge_batch(spec, 10, 1000, RngStream(12, 0))
            means.append(jump_counts(positions, threshold).mean())
        assert means[0] < means[1]


# ═══════════════════════════════════════════════════════════════════════════════
# Траектория
# ═══════════════════════════════════════════════════════════════════════════════


class TestPath:
    """Валидация траекторий."""

    def test_must_start_at_zero(self):
        with pytest.raises(DomainError):
            Path(np.array([0.1, 1.0]), np.array([0.0, 1.0]))

    def test_strictly_increasing(self):
        with pytest.raises(DomainError):
            Path(np.array([0.0, 0.5, 0.5]), np.array([0.0, 1.0, 2.0]))

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            Path(np.array([0.0, 1.0]), np.array([0.0]))

    def test_to_frame(self):
        frame = Path(np.array([0.0, 1.0]), np.array([0.0, 2.0])).to_frame()
        assert list(frame.columns) == ["t", "x"]
