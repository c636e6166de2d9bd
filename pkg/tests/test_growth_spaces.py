"""
Tests for test functions, growth weights and grid seminorms.
"""
import numpy as np
import pytest

from src.errors import DivergentSeminorm, EmptyFamily, OrderTooHigh
from src.growth_spaces import (
    DecayClass,
    Growth,
    GrowthWeight,
    SeminormGrid,
    bounded_family_seminorm_sweep,
    bump,
    envelope_consistent,
    gaussian,
    nu_seminorm,
    rational,
    rho_seminorm,
    weight_axiom_check,
    x_gaussian,
)


class TestTestFunctions:
    """Tests for the built-in test functions and their transforms."""

    def test_gaussian_integral(self):
        """int e^{-x^2} = sqrt(pi)."""
        assert gaussian().integral() == pytest.approx(np.sqrt(np.pi), rel=1e-8)

    def test_bump_peak_and_support(self):
        """The bump peaks at 1 in the middle and vanishes outside [a, b]."""
        psi = bump(1.0, 3.0)
        assert psi.evaluate(2.0) == pytest.approx(1.0)
        np.testing.assert_array_equal(psi.evaluate(np.array([0.5, 1.0, 3.0, 3.5])), 0.0)
        assert psi.window() == (1.0, 3.0)

    def test_bump_needs_ordered_ends(self):
        """A bump on an empty interval is rejected."""
        with pytest.raises(ValueError, match="a < b"):
            bump(1.0, 1.0)

    def test_x_gaussian_derivative(self):
        """The analytic first derivative matches a centered difference."""
        psi = x_gaussian()
        h = 1e-5
        x = 0.7
        numeric = (psi.evaluate(x + h) - psi.evaluate(x - h)) / (2 * h)
        assert psi.evaluate(x, 1) == pytest.approx(numeric, rel=1e-6)

    def test_dilation_preserves_integral(self):
        """psi_a = a^-1 psi(. / a) keeps the integral."""
        assert gaussian().dilated(2.0).integral() == pytest.approx(np.sqrt(np.pi), rel=1e-8)
        with pytest.raises(ValueError):
            gaussian().dilated(0.0)

    def test_translation(self):
        """translated(c) evaluates psi(x - c)."""
        psi = gaussian().translated(1.5)
        assert psi.evaluate(1.5) == pytest.approx(1.0)
        assert psi.window() == pytest.approx((-8.5, 11.5))

    def test_tensor_product(self):
        """The tensor product is two-dimensional with product integral."""
        psi = gaussian().tensor(gaussian())
        assert psi.dimension == 2
        assert psi.integral() == pytest.approx(np.pi, rel=1e-8)
        assert psi.evaluate(np.array([0.0, 0.0])) == pytest.approx(1.0)

    def test_order_beyond_derivatives(self):
        """Rational test functions carry two derivatives."""
        with pytest.raises(OrderTooHigh):
            rational(4.0).evaluate(0.0, 3)

    @pytest.mark.parametrize("psi", [gaussian(), x_gaussian(), bump(), rational(4.0)])
    def test_envelopes_consistent(self, psi):
        """Every built-in function stays under its declared decay."""
        assert envelope_consistent(psi)


class TestGrowth:
    """Tests for growth weights and absorption by decay classes."""

    def test_weight_exponent_positive(self):
        """M(t) = t^p needs p > 0."""
        with pytest.raises(ValueError):
            GrowthWeight(0.0)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_weight_axioms_hold(self, p):
        """t^p with p >= 1 satisfies the weight axioms on the grid."""
        assert weight_axiom_check(GrowthWeight(p)).worst == 0.0

    def test_square_root_weight_fails(self):
        """sqrt(t) is subadditive, so superadditivity is violated."""
        report = weight_axiom_check(GrowthWeight(0.5))
        assert report.superadditivity > 0.0

    def test_absorption(self):
        """Polynomial growth of order k is absorbed by rational decay of power > k + 1."""
        growth = Growth("polynomial", 2.0)
        assert growth.absorbed_by(DecayClass("rational", power=4.0))
        assert not growth.absorbed_by(DecayClass("rational", power=2.0))
        assert growth.absorbed_by(DecayClass("compact", radius=1.0))
        assert not Growth("exponential").absorbed_by(DecayClass("rational", power=10.0))


class TestSeminorms:
    """Tests for nu and rho seminorms on grids."""

    def test_rho_of_gaussian(self):
        """rho_{0,0}(e^{-x^2}) is the peak value 1."""
        report = rho_seminorm(gaussian(), 0, 0)
        assert report.value == pytest.approx(1.0)
        assert report.boundary_ratio <= 1e-3

    def test_rho_order_beyond_derivatives(self):
        """Seminorms of order r need r derivatives."""
        with pytest.raises(OrderTooHigh):
            rho_seminorm(rational(4.0), 3, 0)

    def test_nu_of_gaussian(self):
        """nu_{0,1}(e^{-x^2}) with M(t) = t is sup e^{|x| - x^2} = e^{1/4}."""
        report = nu_seminorm(gaussian(), GrowthWeight(1.0), 0, 1.0)
        assert report.value == pytest.approx(np.exp(0.25), rel=1e-5)

    def test_nu_monotone_in_order_and_rate(self):
        """Raising r or l never lowers the seminorm on a fixed grid."""
        grid = SeminormGrid(8.0)
        base = nu_seminorm(x_gaussian(), GrowthWeight(1.0), 0, 1.0, grid).value
        assert nu_seminorm(x_gaussian(), GrowthWeight(1.0), 1, 1.0, grid).value >= base
        assert nu_seminorm(x_gaussian(), GrowthWeight(1.0), 0, 2.0, grid).value >= base

    def test_nu_of_bump_is_finite(self):
        """A bump on [-1, 1] has nu_{0,l} <= e^{M(l)} for any weight."""
        report = nu_seminorm(bump(), GrowthWeight(2.0), 0, 3.0)
        assert 0.0 < report.value <= np.exp(9.0)

    def test_exponential_weight_on_rational_decay_diverges(self):
        """e^{|x|} (1 + x^2)^-1 grows past every grid edge."""
        with pytest.raises(DivergentSeminorm):
            nu_seminorm(rational(2.0), GrowthWeight(1.0), 0, 1.0)

    def test_sweep_takes_largest(self):
        """The family sweep reports the largest member seminorm."""
        family = [bump(), gaussian().dilated(0.5)]
        report = bounded_family_seminorm_sweep(family, 0, 0)
        assert report.value == pytest.approx(2.0, rel=1e-6)

    def test_sweep_needs_members(self):
        """An empty family raises EmptyFamily."""
        with pytest.raises(EmptyFamily):
            bounded_family_seminorm_sweep([], 0, 0)
