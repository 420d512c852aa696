"""Proceso de Bessel(3), tiempos de llegada y haces de trayectorias acopladas."""

import math

import numpy as np
import pytest
from scipy import stats

from src.coupling.dyadic_core import DyadicContext, disagreement_level, new_context
from src.coupling.path_sim import (
    PASSAGE_CHUNK,
    TimeGrid,
    bes3_first_passage,
    coalescence_time,
    dyadic_paths,
    hitting_times,
    simulate_bes3,
    simulate_bes3_until,
    top_level_reached,
    values_at_hitting_level,
)
from src.utils.numerics import kolmogorov_sup_cdf

SUP_DT = 1e-4


def _bundle(seed, starts, horizon, dt, j_min=-10):
    ctx_seed, path_seed = np.random.SeedSequence(seed).spawn(2)
    path = simulate_bes3(path_seed, TimeGrid.uniform(horizon, dt))
    alpha_range = (float(min(starts)), float(max(starts)))
    ctx = new_context(ctx_seed, j_min=j_min, alpha_range=alpha_range)
    try:
        return dyadic_paths(ctx, path, starts, horizon)
    except DyadicContext.WindowError:
        ctx = new_context(ctx_seed, j_min=j_min, alpha_range=alpha_range,
                          min_j_max=top_level_reached(path, ctx.theta) + 1)
        return dyadic_paths(ctx, path, starts, horizon)


@pytest.fixture(scope="module")
def sup_at_one():
    grid = TimeGrid.uniform(1.0, SUP_DT)
    return np.array([simulate_bes3(seed, grid).running_sup[-1] for seed in range(3000)])


class TestTimeGrid:
    def test_uniform(self):
        grid = TimeGrid.uniform(1.0, 0.1)
        assert grid.t.size == 11
        assert grid.horizon == 1.0
        assert grid.dt_max == pytest.approx(0.1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            TimeGrid(t=np.array([0.1, 0.2]), dt_max=1.0)
        with pytest.raises(ValueError):
            TimeGrid(t=np.array([0.0, 0.5, 0.4]), dt_max=1.0)
        with pytest.raises(ValueError):
            TimeGrid(t=np.array([0.0, 1.0]), dt_max=0.5)
        with pytest.raises(ValueError):
            TimeGrid.uniform(0.0, 0.1)


class TestBes3:
    def test_deterministic_and_non_negative(self):
        grid = TimeGrid.uniform(1.0, 1e-3)
        a = simulate_bes3(5, grid)
        b = simulate_bes3(5, grid)
        np.testing.assert_array_equal(a.y, b.y)
        assert a.y[0] == 0.0
        assert np.all(a.y >= 0.0)
        assert np.all(np.diff(a.running_sup) >= 0.0)

    def test_hitting_times_interpolate_level(self):
        path = simulate_bes3(8, TimeGrid.uniform(4.0, 1e-3))
        theta = 0.3
        hits = hitting_times(path, theta, range(-6, 6))
        reached = sorted(hits.times)
        times = [hits.time(level) for level in reached]
        assert times == sorted(times)
        for level in reached:
            y = np.interp(hits.time(level), path.grid.t, path.y)
            assert y == pytest.approx(2.0 ** (level + theta), rel=1e-9)
        for level in hits.absent:
            assert 2.0 ** (level + theta) > path.running_sup[-1]
            assert hits.time(level) == math.inf

    def test_top_level(self):
        path = simulate_bes3(3, TimeGrid.uniform(1.0, 1e-3))
        theta = 0.7
        top = top_level_reached(path, theta)
        sup = path.running_sup[-1]
        assert 2.0 ** (top - 1 + theta) < sup <= 2.0 ** (top + theta)

    def test_second_moment_at_one(self):
        """E[Y_1²] = 3: Y_1² es suma de tres gaussianas al cuadrado, sin sesgo de malla."""
        n = 20_000
        grid = TimeGrid.uniform(1.0, 0.05)
        y2 = np.array([simulate_bes3(seed, grid).y[-1] ** 2 for seed in range(n)])
        assert abs(y2.mean() - 3.0) <= 4.0 * math.sqrt(6.0 / n)

    @pytest.mark.parametrize("z", [0.8, 1.2, 2.0])
    def test_supremum_law(self, sup_at_one, z):
        # El máximo sobre la malla subestima el supremo: la frecuencia sólo puede
        # quedar por encima, en a lo sumo un corrimiento de orden 0.5826·√dt en z
        n = sup_at_one.size
        empirical = np.mean(sup_at_one <= z)
        low = kolmogorov_sup_cdf(z)
        high = kolmogorov_sup_cdf(z + 2.0 * 0.5826 * math.sqrt(SUP_DT))
        sigma = math.sqrt(max(high * (1.0 - high), 1.0 / n) / n)
        assert low - 4.0 * sigma <= empirical <= high + 4.0 * sigma

    def test_hitting_time_scaling(self):
        """T a nivel 2 con paso 4·dt se distribuye como 4 veces T a nivel 1 con paso dt."""
        n = 2000
        rng_unit, rng_double = np.random.default_rng(1), np.random.default_rng(2)
        unit = np.array([bes3_first_passage(rng_unit, 1.0, 1e-3, 10.0)[0] for _ in range(n)])
        scaled = np.array([bes3_first_passage(rng_double, 2.0, 4e-3, 40.0)[0]
                           for _ in range(n)]) / 4.0
        assert stats.ks_2samp(unit, scaled).pvalue > 1e-3
        # E[T_1] = 1/3 y Var[T_1] = 2/45; la malla retrasa el cruce levemente
        assert abs(unit.mean() - 1.0 / 3.0) <= 4.0 * math.sqrt(2.0 / 45.0 / n) + 0.02

    def test_simulation_stops_at_first_crossing(self):
        grid = TimeGrid.uniform(5.0, 1e-3)
        full = simulate_bes3(4, grid)
        cut = simulate_bes3_until(4, grid, 0.8)
        k = int(np.flatnonzero(full.y >= 0.8)[0])
        assert cut.y.size == k + 1
        np.testing.assert_allclose(cut.y, full.y[:k + 1], rtol=1e-12)
        np.testing.assert_array_equal(cut.grid.t, grid.t[:k + 1])
        assert cut.y[-2] < 0.8 <= cut.y[-1]

    def test_simulation_without_crossing_covers_grid(self):
        grid = TimeGrid.uniform(4.0, 1e-4)
        assert grid.t.size > PASSAGE_CHUNK
        path = simulate_bes3_until(9, grid, 1e3)
        assert path.y.size == grid.t.size
        assert path.grid.horizon == grid.horizon

    def test_first_passage(self):
        rng = np.random.default_rng(0)
        time, censored = bes3_first_passage(rng, 0.5, 1e-3, 10.0)
        assert not censored
        assert 0.0 < time <= 10.0

    def test_first_passage_censored(self):
        rng = np.random.default_rng(0)
        assert bes3_first_passage(rng, 1e3, 1e-3, 0.01) == (0.01, True)


class TestDyadicPaths:
    def test_rows_start_at_their_points(self):
        starts = np.linspace(0.0, 1.0, 9)
        bundle = _bundle(1, starts, 1.0, 1e-3)
        np.testing.assert_array_equal(bundle.x[:, 0], starts)

    def test_unsorted_starts_rejected(self):
        ctx = new_context(0)
        path = simulate_bes3(0, TimeGrid.uniform(1.0, 1e-2))
        with pytest.raises(ValueError):
            dyadic_paths(ctx, path, [0.5, 0.1], 1.0)

    def test_coalescence_right_after_disagreement_level(self):
        """Dos filas coinciden bit a bit desde el primer tiempo posterior a T_{θ,K}."""
        horizon = 20.0
        for seed in range(10):
            bundle = _bundle(seed, [0.0, 0.05], horizon, 1e-3)
            level = disagreement_level(bundle.context, 0.0, 0.05).level
            hit = bundle.hitting.time(level)
            if hit >= bundle.grid.t[-1]:
                continue
            expected = float(bundle.grid.t[bundle.grid.t > hit][0])
            assert coalescence_time(bundle, 0, 1) == expected
            after = bundle.grid.t > hit
            np.testing.assert_array_equal(bundle.x[0, after], bundle.x[1, after])
            break
        else:
            pytest.fail("Ningún par coalescente en las semillas probadas")

    def test_values_at_hitting_level_are_spaced_by_multiples(self):
        starts = np.linspace(0.0, 1.0, 41)
        bundle = _bundle(12, starts, 1.0, 1e-3, j_min=-8)
        ctx = bundle.context
        for level in ctx.levels:
            values = np.unique(values_at_hitting_level(bundle, int(level)))
            if values.size < 2:
                continue
            multiples = np.diff(values) / 2.0 ** (level + ctx.theta + 1.0)
            np.testing.assert_allclose(multiples, np.round(multiples), atol=1e-9 * multiples.max())
            assert np.all(np.round(multiples) >= 1)

    def test_paths_continuous_at_hitting_times(self):
        starts = np.linspace(0.0, 1.0, 5)
        bundle = _bundle(21, starts, 1.0, 1e-4)
        # Incrementos de orden √dt salvo por el cruce de nivel interpolado
        steps = np.abs(np.diff(bundle.x, axis=1))
        assert steps.max() < 0.1

    def test_marginal_is_brownian(self):
        """X_{θ,α,1} − α tiene media 0 y varianza 1 sobre realizaciones independientes."""
        n = 2000
        endpoints = np.empty(n)
        for seed in range(n):
            bundle = _bundle(seed, [0.3], 1.0, 2e-3)
            endpoints[seed] = bundle.x[0, -1] - 0.3
        assert abs(endpoints.mean()) <= 4.0 / math.sqrt(n)
        assert abs(endpoints.var() - 1.0) <= 4.0 * math.sqrt(2.0 / n) + 0.03

    def test_coalescence_preserves_order(self):
        """Para γ₁ < γ₂ < γ₃, las filas γ₁ y γ₃ no se funden antes que ningún par intermedio."""
        for seed in range(20):
            bundle = _bundle(seed, [0.0, 0.3, 0.7], 10.0, 1e-3)
            outer = coalescence_time(bundle, 0, 2)
            assert outer >= coalescence_time(bundle, 0, 1)
            assert outer >= coalescence_time(bundle, 1, 2)

    def test_coalescence_edge_cases(self):
        bundle = _bundle(2, [0.2, 0.2, 0.9], 1e-3, 1e-4)
        assert coalescence_time(bundle, 0, 1) == 0.0
        assert coalescence_time(bundle, 0, 2) == math.inf
