"""
Tests for decomposed distributions, pairings, point-value certificates and density points.
"""
import numpy as np
import pytest
from scipy import special

from src.catalog import build_generalized_function
from src.densities import AbsPowerDensity, AtomicMeasure, CantorMeasure, HeavisideDensity, MonomialDensity
from src.errors import EpsilonNonpositive, GrowthMismatch, InsufficientScales, OrderTooHigh
from src.generalized_functions import (
    GeneralizedFunction,
    MeasureTerm,
    ball_measure,
    certify_point_value,
    delta,
    density_point_check,
    from_density,
    pair,
    pair_scaled,
    small_ball_mass,
)
from src.growth_spaces import bump, gaussian, rational, x_gaussian
from src.kernel import kernel_testfn

EPS = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]


class TestPairing:
    """Tests for <f, psi> and <f(x0 + eps .), psi>."""

    def test_delta(self):
        """<delta, psi> = psi(0)."""
        assert pair(delta(), gaussian()) == pytest.approx(1.0)

    def test_delta_derivative(self):
        """<delta', psi> = -psi'(0)."""
        assert pair(delta(order=1), x_gaussian()) == pytest.approx(-1.0)

    def test_heaviside(self):
        """<H, e^{-x^2}> = sqrt(pi) / 2."""
        assert pair(from_density(HeavisideDensity()), gaussian()) == pytest.approx(np.sqrt(np.pi) / 2, rel=1e-8)

    def test_scaled_delta(self):
        """<delta(eps x), psi> = psi(0) / eps."""
        assert pair_scaled(delta(), 0.0, 1e-2, gaussian()) == pytest.approx(100.0)

    def test_scaled_power(self):
        """<|eps x|^(1/2), e^{-x^2}> = eps^(1/2) Gamma(3/4)."""
        f = from_density(AbsPowerDensity(0.5))
        value = pair_scaled(f, 0.0, 1e-2, gaussian())
        assert value == pytest.approx(0.1 * special.gamma(0.75), rel=1e-5)

    def test_constant_term(self):
        """A constant gamma contributes gamma int psi."""
        f = GeneralizedFunction((), constant=3.0)
        assert pair(f, gaussian()) == pytest.approx(3.0 * np.sqrt(np.pi), rel=1e-8)

    def test_translation(self):
        """f(. - x0) moves the atom to x0."""
        assert pair(delta().translated(2.0), gaussian()) == pytest.approx(np.exp(-4.0))

    def test_sum(self):
        """Pairings are additive."""
        f = delta() + from_density(HeavisideDensity())
        assert f.order == 0
        assert pair(f, gaussian()) == pytest.approx(1.0 + np.sqrt(np.pi) / 2, rel=1e-8)

    def test_linearity(self):
        """<a f + b g, psi> = a <f, psi> + b <g, psi> with a complex weight."""
        psi = gaussian().translated(0.3)
        f = from_density(HeavisideDensity())
        g = from_density(AbsPowerDensity(0.5))
        combined = from_density(HeavisideDensity(), weight=2.0) + from_density(AbsPowerDensity(0.5), weight=-3.0 + 1.0j)
        expected = 2.0 * pair(f, psi) + (-3.0 + 1.0j) * pair(g, psi)
        assert pair(combined, psi) == pytest.approx(expected, rel=1e-12)

    def test_far_field_decay(self):
        """H(x - 1) vanishes on B(0, 1), so its scaled pairings at 0 fall faster than eps^4."""
        f = from_density(HeavisideDensity()).translated(1.0)
        scales = [0.5, 0.4, 0.3, 0.25, 0.2, 0.1]
        values = np.array([abs(pair_scaled(f, 0.0, e, gaussian())) for e in scales])
        exact = 0.5 * np.sqrt(np.pi) * special.erfc(1.0 / np.array(scales))
        np.testing.assert_allclose(values, exact, atol=1e-9)
        bound = values[0] / scales[0] ** 4
        assert np.all(values <= bound * np.array(scales) ** 4 * (1.0 + 1e-9))

    def test_two_dimensional_delta(self):
        """delta at a planar point against a tensor Gaussian."""
        psi = gaussian().tensor(gaussian())
        assert pair(delta((0.5, -0.5)), psi) == pytest.approx(np.exp(-0.5))

    def test_cantor_total_mass(self):
        """The Cantor measure has unit mass and CDF 1/2 at 1/3."""
        mu = CantorMeasure()
        assert mu.mass(-1.0, 2.0) == pytest.approx(1.0)
        assert mu.cdf(1.0 / 3.0) == pytest.approx(0.5)
        assert mu.cdf(0.25) == pytest.approx(1.0 / 3.0, abs=1e-8)

    def test_nonpositive_scale(self):
        """eps must be positive."""
        with pytest.raises(EpsilonNonpositive):
            pair_scaled(delta(), 0.0, 0.0, gaussian())

    def test_order_above_test_function(self, d4_kernel):
        """delta' cannot be paired with a kernel profile of D4 (no derivative)."""
        with pytest.raises(OrderTooHigh):
            pair(delta(order=1), kernel_testfn(d4_kernel, 0.0, 0.0, 0.5))

    def test_growth_mismatch(self):
        """x^4 outgrows a test function decaying like |x|^-2."""
        with pytest.raises(GrowthMismatch):
            pair(from_density(MonomialDensity(4)), rational(2.0))

    def test_dimension_mismatch(self):
        """A planar distribution needs a planar test function."""
        with pytest.raises(ValueError, match="2-D distribution"):
            pair(delta((0.0, 0.0)), gaussian())

    def test_order_shape_checked(self):
        """Term orders must match the base dimension."""
        with pytest.raises(ValueError):
            MeasureTerm(AtomicMeasure([0.0]), (1, 1))


class TestBallMeasure:
    """Tests for signed ball masses."""

    def test_delta_ball(self):
        """delta has mass 1 on every ball around its atom."""
        assert ball_measure(delta(), 0.0, 1e-3) == pytest.approx(1.0)

    def test_power_ball(self):
        """|x|^(-1/2) dx has mass 4 eps^(1/2) on B(0, eps)."""
        mu = from_density(AbsPowerDensity(-0.5))
        assert ball_measure(mu, 0.0, 1e-2) == pytest.approx(0.4, rel=1e-6)

    def test_cantor_triadic_balls(self):
        """The Cantor measure gives B(0, 3^-k) mass 2^-k."""
        term = build_generalized_function("cantor").terms[0]
        radii = [3.0 ** -k for k in range(1, 9)]
        masses = small_ball_mass(term, 0.0, radii)
        np.testing.assert_allclose(masses, [2.0 ** -k for k in range(1, 9)], rtol=1e-9)
        assert ball_measure(build_generalized_function("cantor"), 0.0, radii[3]) == pytest.approx(masses[3])

    def test_higher_order_rejected(self):
        """Ball masses are defined for order-0 distributions."""
        with pytest.raises(ValueError):
            ball_measure(delta(order=1), 0.0, 0.1)


class TestPointValueCertificate:
    """Tests for certify_point_value."""

    def test_oscillating_remainder_certified(self):
        """3 + x^2 sin(1/x) has the point value 3 at the origin."""
        f = build_generalized_function({"constant": 3.0, "terms": [{"name": "pow_sin_inv", "params": {"p": 2}}]})
        certificate = certify_point_value(f, 0.0, EPS)
        assert certificate.passed
        assert certificate.gamma == 3.0
        assert certificate.exponents[0] == pytest.approx(3.0, abs=0.1)

    def test_power_certified(self):
        """|x|^(1/2) has mass exponent 3/2 > 1 at the origin."""
        certificate = certify_point_value(from_density(AbsPowerDensity(0.5)), 0.0, EPS)
        assert certificate.passed
        assert certificate.exponents[0] == pytest.approx(1.5, abs=1e-6)

    def test_delta_not_certified(self):
        """An atom does not shrink, so no point value exists."""
        certificate = certify_point_value(delta(), 0.0, EPS)
        assert not certificate.passed
        assert certificate.to_dict()["passed_terms"] == (False,)

    def test_heaviside_at_jump_not_certified(self):
        """The Heaviside mass exponent 1 is below the threshold 1 + slack."""
        assert not certify_point_value(from_density(HeavisideDensity()), 0.0, EPS).passed

    def test_insufficient_scales(self):
        """Four scales are the minimum."""
        with pytest.raises(InsufficientScales):
            certify_point_value(delta(), 0.0, [1e-1, 1e-2, 1e-3])


class TestDensityPoint:
    """Tests for the Lebesgue density-point check."""

    def test_sign_balls_cancel(self):
        """Centered balls see sgn(x) dx as density 0."""
        mu = build_generalized_function("sgn")
        report = density_point_check(mu, 0.0, "balls")
        assert abs(report.gamma_hat) <= 1e-10
        assert max(abs(r) for ratios in report.ratios for r in ratios) <= 1e-10

    def test_sign_hyperrectangles_disperse(self):
        """Off-center boxes containing 0 give ratios spread over (-1, 1)."""
        mu = build_generalized_function("sgn")
        report = density_point_check(mu, 0.0, "hyperrectangles")
        assert report.dispersion >= 0.5

    def test_smooth_density(self):
        """(2 + cos x) dx has density 2 + cos(x0) at every point."""
        mu = build_generalized_function({"name": "offset_cos", "params": {"c": 2.0}})
        report = density_point_check(mu, 0.37, "hyperrectangles")
        assert report.gamma_hat == pytest.approx(2.0 + np.cos(0.37), abs=1e-3)
        assert report.scale_ranges[-1] <= 1e-3
        assert report.dispersion <= 1e-2

    def test_planar_product(self):
        """Boxes around the origin see dx * e^{-y^2} dy with density 1."""
        mu = build_generalized_function(
            {"name": "product", "params": {"first": "lebesgue", "second": "gaussian"}}, dimension=2
        )
        report = density_point_check(mu, (0.0, 0.0), "hyperrectangles", samples=8)
        assert report.gamma_hat == pytest.approx(1.0, abs=1e-3)

    def test_deterministic(self):
        """The same seed draws the same sets."""
        mu = build_generalized_function("sgn")
        first = density_point_check(mu, 0.0, "hyperrectangles", seed=7)
        second = density_point_check(mu, 0.0, "hyperrectangles", seed=7)
        assert first.ratios == second.ratios

    def test_unknown_family(self):
        """Only balls and hyperrectangles are supported."""
        with pytest.raises(ValueError, match="family"):
            density_point_check(delta(), 0.0, "cubes")

    def test_higher_order_rejected(self):
        """Density points are defined for order-0 distributions."""
        with pytest.raises(ValueError):
            density_point_check(delta(order=1), 0.0)

    def test_dispersion_pools_the_finest_scales(self):
        """The dispersion is the range of every ratio drawn at the three finest scales."""
        mu = build_generalized_function({"name": "offset_cos", "params": {"c": 2.0}})
        report = density_point_check(mu, 0.37, "hyperrectangles")
        pooled = [r for ratios in report.ratios[-3:] for r in ratios]
        assert report.tail == 3
        assert report.dispersion == pytest.approx(max(pooled) - min(pooled), abs=1e-15)
        assert report.dispersion >= max(report.scale_ranges[-3:])
        finest_only = density_point_check(mu, 0.37, "hyperrectangles", tail=1)
        assert finest_only.dispersion == pytest.approx(report.scale_ranges[-1], abs=1e-15)

    def test_tail_must_be_positive(self):
        with pytest.raises(ValueError, match="tail"):
            density_point_check(build_generalized_function("sgn"), 0.0, tail=0)

    def test_bump_is_a_test_function(self):
        """A compact bump pairs with the Lebesgue measure to its integral."""
        f = build_generalized_function("lebesgue")
        assert pair(f, bump()) == pytest.approx(bump().integral(), rel=1e-8)
