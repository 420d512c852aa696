"""Funciones especiales, distribución del supremo de Bessel(3), cuadratura e inversión."""

import math

import numpy as np
import pytest
from scipy import special

from src.utils.numerics import (
    BracketError,
    DomainError,
    QuadratureError,
    QuadratureSpec,
    SeriesAccuracy,
    erf,
    erfc,
    erfc_inverse,
    exp_integral_ei,
    expand_bracket,
    integrate,
    invert_monotone,
    kolmogorov_sup_cdf,
    kolmogorov_sup_sf,
)


class TestSpecialFunctions:
    def test_erf_reference_values(self):
        assert erf(0.0) == 0.0
        assert erfc(0.0) == 1.0
        assert erf(1.0) == pytest.approx(0.8427007929497149, rel=1e-15)

    def test_scalar_in_scalar_out(self):
        assert isinstance(erf(0.5), float)
        assert erf(np.array([0.5, 1.0])).shape == (2,)

    def test_erfc_inverse_round_trip(self):
        x = np.array([0.01, 0.3, 1.0, 3.0])
        np.testing.assert_allclose(erfc_inverse(erfc(x)), x, rtol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 2.0, -1.0])
    def test_erfc_inverse_domain(self, p):
        with pytest.raises(DomainError):
            erfc_inverse(p)

    def test_exp_integral_reference(self):
        assert exp_integral_ei(-1.0) == pytest.approx(-0.21938393439552062, rel=1e-14)

    def test_exp_integral_rejects_non_negative(self):
        with pytest.raises(DomainError):
            exp_integral_ei(0.0)
        with pytest.raises(DomainError):
            exp_integral_ei(np.array([-1.0, 2.0]))


class TestSupremumDistribution:
    """P(sup_{t≤1} Y ≤ z) coincide con la distribución de Kolmogorov en π/(2z)."""

    def test_matches_kolmogorov_distribution(self):
        z = np.geomspace(0.2, 5.0, 50)
        np.testing.assert_allclose(kolmogorov_sup_cdf(z), special.kolmogorov(math.pi / (2.0 * z)),
                                   rtol=1e-10, atol=1e-14)

    def test_cdf_and_sf_complement(self):
        z = np.geomspace(0.1, 4.0, 40)
        np.testing.assert_allclose(kolmogorov_sup_cdf(z) + kolmogorov_sup_sf(z), 1.0, atol=1e-14)

    def test_continuous_across_representation_switch(self):
        below = kolmogorov_sup_cdf(1.0 - 1e-12)
        above = kolmogorov_sup_cdf(1.0 + 1e-12)
        assert abs(below - above) < 1e-11

    def test_tail_keeps_relative_precision(self):
        sf = kolmogorov_sup_sf(10.0)
        assert 0.0 < sf < 1e-20
        leading = 2.0 * math.sqrt(2.0 / math.pi) * 10.0 * math.exp(-50.0)
        assert sf == pytest.approx(leading, rel=1e-12)

    def test_monotone(self):
        values = kolmogorov_sup_cdf(np.linspace(0.05, 6.0, 300))
        assert np.all(np.diff(values) >= 0.0)
        assert values[0] >= 0.0 and values[-1] <= 1.0

    @pytest.mark.parametrize("z", [0.0, -1.0])
    def test_domain(self, z):
        with pytest.raises(DomainError):
            kolmogorov_sup_cdf(z)
        with pytest.raises(DomainError):
            kolmogorov_sup_sf(z)

    def test_truncation_tolerance_is_respected(self):
        z = np.linspace(0.1, 5.0, 100)
        coarse = kolmogorov_sup_cdf(z, SeriesAccuracy(abs_tol=1e-12))
        fine = kolmogorov_sup_cdf(z, SeriesAccuracy(abs_tol=1e-16))
        np.testing.assert_allclose(coarse, fine, rtol=0.0, atol=1e-12)

    def test_accuracy_validation(self):
        with pytest.raises(ValueError):
            SeriesAccuracy(abs_tol=0.0)
        with pytest.raises(ValueError):
            SeriesAccuracy(max_terms=2)


class TestIntegrate:
    def test_finite_interval(self):
        assert integrate(lambda x: x * x, (0.0, 1.0)) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_semi_infinite_power_tail(self):
        assert integrate(lambda x: 1.0 / (x * x), (1.0, math.inf)) == pytest.approx(1.0, rel=1e-10)

    def test_semi_infinite_with_breakpoints(self):
        value = integrate(lambda x: math.exp(-x), (0.5, math.inf), points=[1.0, 3.0])
        assert value == pytest.approx(math.exp(-0.5), rel=1e-10)

    @pytest.mark.parametrize("degree", range(6))
    def test_polynomials_are_exact(self, degree):
        poly = np.polynomial.Polynomial(np.arange(1.0, degree + 2.0) * (-0.7) ** np.arange(degree + 1))
        primitive = poly.integ()
        expected = primitive(2.1) - primitive(-1.3)
        assert integrate(poly, (-1.3, 2.1)) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_semi_infinite_from_zero(self):
        # a ≤ 0: se delega en la transformación de QUADPACK
        assert integrate(lambda x: math.exp(-x), (0.0, math.inf)) == pytest.approx(1.0, abs=1e-10)

    def test_kinked_integrand(self):
        value = integrate(lambda theta: min(2.0 ** -theta, 1.0), (0.0, 1.0))
        assert value == pytest.approx(1.0 / (2.0 * math.log(2.0)), rel=1e-10)

    def test_non_convergence_raises(self):
        spec = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-14, max_subdivisions=1)
        with pytest.raises(QuadratureError) as info:
            integrate(lambda x: x ** -0.9, (0.0, 1.0), spec)
        assert info.value.error > 0.0

    def test_quadrature_settings_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(max_subdivisions=0)


class TestInversion:
    @staticmethod
    def exponential_cdf(s):
        return 1.0 - math.exp(-s)

    def test_bisection_root(self):
        s = invert_monotone(self.exponential_cdf, 0.5, (1e-3, 10.0))
        assert s == pytest.approx(math.log(2.0), rel=1e-12)

    def test_endpoint_returned_exactly(self):
        F = self.exponential_cdf
        assert invert_monotone(F, F(2.0), (2.0, 5.0)) == 2.0

    def test_bracket_must_enclose(self):
        with pytest.raises(BracketError):
            invert_monotone(self.exponential_cdf, 0.99, (0.1, 1.0))

    def test_expand_bracket(self):
        F = lambda s: s / (1.0 + s)
        for p in (1e-6, 0.5, 1.0 - 1e-6):
            lo, hi = expand_bracket(F, p)
            assert F(lo) <= p <= F(hi)

    def test_expand_bracket_gives_up(self):
        with pytest.raises(BracketError):
            expand_bracket(lambda s: 0.5, 0.9)
