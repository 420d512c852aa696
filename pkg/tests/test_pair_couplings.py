"""Acoplamientos de pares de referencia: reflexión y red browniana."""

import math

import numpy as np
import pytest

from src.analysis.analytics import failure_prob_brownian_web, failure_prob_reflection
from src.coupling.pair_couplings import (
    BrownianWebCoupling,
    PairCoupling,
    PairCouplingFactory,
    ReflectionCoupling,
    brownian_web_pair,
    reflection_pair,
)
from src.coupling.path_sim import TimeGrid


@pytest.fixture(scope="module")
def web_unit_pairs():
    grid = TimeGrid.uniform(2.0, 1e-4)
    return [brownian_web_pair(seed, 0.0, 1.0, grid) for seed in range(2000)]


class TestFactory:
    def test_create_by_name(self):
        assert isinstance(PairCouplingFactory.create("reflection"), ReflectionCoupling)
        assert isinstance(PairCouplingFactory.create("WEB"), BrownianWebCoupling)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            PairCouplingFactory.create("dyadic")

    def test_equal_points_rejected(self):
        grid = TimeGrid.uniform(1.0, 1e-2)
        with pytest.raises(PairCoupling.CouplingError):
            reflection_pair(0, 0.5, 0.5, grid)
        with pytest.raises(PairCoupling.CouplingError):
            brownian_web_pair(0, 0.5, 0.5, grid)


class TestReflection:
    def test_mirror_until_midpoint(self):
        grid = TimeGrid.uniform(5.0, 1e-3)
        pair = reflection_pair(3, 0.0, 1.0, grid)
        before = grid.t < pair.coupling_time
        after = grid.t > pair.coupling_time
        np.testing.assert_allclose(pair.x_alpha[before] + pair.x_beta[before], 1.0, atol=1e-12)
        np.testing.assert_array_equal(pair.x_alpha[after], pair.x_beta[after])
        assert pair.x_alpha[0] == 0.0 and pair.x_beta[0] == 1.0

    def test_censored_when_horizon_short(self):
        grid = TimeGrid.uniform(1e-4, 1e-5)
        pair = reflection_pair(1, 0.0, 10.0, grid)
        assert pair.censored
        assert pair.coupling_time == grid.horizon

    def test_failure_probability(self):
        n = 2000
        grid = TimeGrid.uniform(1.0, 1e-4)
        rng = np.random.default_rng(42)
        coupling = ReflectionCoupling()
        failed = np.mean([coupling.couple(rng, 0.0, 1.0, grid).censored for _ in range(n)])
        expected = failure_prob_reflection(1.0)
        assert abs(failed - expected) <= 3.0 * math.sqrt(expected * (1 - expected) / n) + 0.01

    def test_swapped_points(self):
        """Con α > β la trayectoria reflejada sigue siendo browniana desde β."""
        n = 2000
        grid = TimeGrid.uniform(0.5, 1e-3)
        pairs = [reflection_pair(seed, 1.0, 0.0, grid) for seed in range(n)]
        end = np.array([p.x_beta[-1] for p in pairs])
        assert abs(end.mean()) <= 4.0 * math.sqrt(0.5 / n)
        failed = np.mean([p.censored for p in pairs])
        expected = failure_prob_reflection(1.0 / math.sqrt(0.5))
        assert abs(failed - expected) <= 3.0 * math.sqrt(expected * (1 - expected) / n) + 0.01



class TestBrownianWeb:
    def test_identical_after_meeting(self):
        grid = TimeGrid.uniform(5.0, 1e-3)
        pair = next(p for p in (brownian_web_pair(seed, 0.0, 0.5, grid) for seed in range(20))
                    if not p.censored)
        after = grid.t > pair.coupling_time
        assert after.any()
        np.testing.assert_array_equal(pair.x_alpha[after], pair.x_beta[after])

    def test_failure_probability(self):
        n = 2000
        grid = TimeGrid.uniform(1.0, 1e-4)
        rng = np.random.default_rng(43)
        coupling = BrownianWebCoupling()
        failed = np.mean([coupling.couple(rng, 0.0, 1.0, grid).censored for _ in range(n)])
        expected = failure_prob_brownian_web(1.0)
        assert abs(failed - expected) <= 3.0 * math.sqrt(expected * (1 - expected) / n) + 0.01

    @pytest.mark.parametrize("s", [0.5, 2.0])
    def test_failure_distribution(self, web_unit_pairs, s):
        """P(T > s) = erf(1/(2√s)) para puntos a distancia 1."""
        n = len(web_unit_pairs)
        failed = np.mean([p.censored or p.coupling_time > s for p in web_unit_pairs])
        expected = failure_prob_brownian_web(1.0 / math.sqrt(s))
        assert abs(failed - expected) <= 3.0 * math.sqrt(expected * (1 - expected) / n) + 0.01

    def test_difference_variance_before_meeting(self):
        """Lejos del encuentro, X̂_β − X̂_α tiene varianza 2t."""
        n = 2000
        grid = TimeGrid.uniform(1.0, 1e-2)
        pairs = [brownian_web_pair(seed, 0.0, 100.0, grid) for seed in range(n)]
        assert all(p.censored for p in pairs)
        for t in (0.5, 1.0):
            k = int(np.argmin(np.abs(grid.t - t)))
            gap = np.array([p.x_beta[k] - p.x_alpha[k] for p in pairs])
            assert abs(gap.var() - 2.0 * t) <= 4.0 * 2.0 * t * math.sqrt(2.0 / n)

