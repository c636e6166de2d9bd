"""
Tests for quasiasymptotic fits, projected-expansion experiments and alpha-densities.
"""
import numpy as np
import pytest

from src.asymptotics import (
    SlowlyVarying,
    alpha_density,
    omega,
    qbc2_pipeline,
    qbth2_check,
    qbth3_equivalence,
    quasi_fit,
)
from src.catalog import build_battery, build_generalized_function
from src.densities import AbsPowerDensity
from src.errors import (
    AllPairingsVanish,
    EmptyFamily,
    HypothesisFailed,
    InconsistentDegree,
    InsufficientScales,
    NegativeMeasure,
)
from src.generalized_functions import delta, from_density
from src.projection import projected_density

EPS = np.geomspace(1e-1, 1e-3, 7)
THETA_ABS_POW = 2.723286


@pytest.fixture(scope="module")
def battery():
    return build_battery("default4")


class TestQuasiFit:
    """Tests for degree recovery from scaled pairings."""

    @pytest.mark.parametrize("name, expected", [
        ("delta", -1.0),
        ("heaviside", 0.0),
        ({"name": "abs_pow", "params": {"a": 0.5}}, 0.5),
    ])
    def test_degree_recovered(self, battery, name, expected):
        """delta, H and |x|^(1/2) have degrees -1, 0 and 1/2 at the origin."""
        fit = quasi_fit(build_generalized_function(name), 0.0, EPS, battery)
        assert fit.alpha_hat == pytest.approx(expected, abs=0.02)
        assert fit.slope_spread <= 0.05

    def test_odd_member_is_degenerate_for_delta(self, battery):
        """x e^{-x^2} vanishes at 0, so its delta pairings are left out."""
        fit = quasi_fit(delta(), 0.0, EPS, battery)
        assert fit.degenerate[1]
        assert fit.to_dict()["slopes"][1] is None

    def test_limit_samples(self, battery):
        """The limit of delta(eps x) eps is delta, sampled as psi(0)."""
        fit = quasi_fit(delta(), 0.0, EPS, battery)
        assert fit.g_samples[0] == pytest.approx(1.0)
        assert fit.homogeneity <= 1e-10

    def test_projected_delta_has_degree_zero(self, battery, haar_kernel):
        """q_0 delta is a function near 0, not a degree -1 distribution."""
        projected = projected_density(delta(), haar_kernel, 0.0, 0.0, (-3.0, 3.0))
        fit = quasi_fit(projected, 0.0, EPS, battery, max_outliers=1)
        assert abs(fit.alpha_hat) <= 0.05

    def test_all_pairings_vanish(self, battery):
        """A far-away atom pairs to zero with every member."""
        with pytest.raises(AllPairingsVanish):
            quasi_fit(delta().translated(50.0), 0.0, EPS, battery)

    def test_mixed_degrees_inconsistent(self, battery):
        """delta + H mixes degrees -1 and 0 across the battery."""
        f = delta() + build_generalized_function("heaviside")
        with pytest.raises(InconsistentDegree):
            quasi_fit(f, 0.0, EPS, battery)

    def test_too_few_scales(self, battery):
        """Six scales are the minimum."""
        with pytest.raises(InsufficientScales):
            quasi_fit(delta(), 0.0, EPS[:5], battery)

    def test_narrow_scale_range(self, battery):
        """The scales must span two decades."""
        with pytest.raises(InsufficientScales, match="decades"):
            quasi_fit(delta(), 0.0, np.geomspace(1e-1, 1e-2, 6), battery)

    def test_battery_size(self, battery):
        """Batteries need four members and may not be empty."""
        with pytest.raises(ValueError, match="at least"):
            quasi_fit(delta(), 0.0, EPS, battery[:2])
        with pytest.raises(EmptyFamily):
            quasi_fit(delta(), 0.0, EPS, [])


class TestSlowlyVarying:
    """Tests for the L models and omega conventions."""

    def test_constant_model(self):
        """L = 1 has no dilation deviation."""
        assert SlowlyVarying().ratio_deviation(EPS) == 0.0

    def test_log_power_model(self):
        """|log eps| varies slowly but not trivially."""
        L = SlowlyVarying("log_power", 1.0)
        assert L(np.exp(-2.0)) == pytest.approx(2.0)
        assert 0.0 < L.ratio_deviation(EPS) <= 0.31
        assert L.name == "log_power(1)"

    def test_unknown_model(self):
        """Only constant and log_power are known."""
        with pytest.raises(ValueError):
            SlowlyVarying("exp")

    @pytest.mark.parametrize("alpha, convention, expected", [
        (1.0, "unit_ball", 2.0),
        (2.0, "unit_ball", np.pi),
        (1.0, "printed", np.pi / 2.0),
    ])
    def test_omega(self, alpha, convention, expected):
        """omega matches the unit-ball volumes and the printed constant."""
        assert omega(alpha, convention) == pytest.approx(expected)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            omega(1.0, "other")


class TestProjectedExpansions:
    """Tests for projected scaled pairings and expansion residuals."""

    @pytest.mark.parametrize("name, alpha", [("delta", -1.0), ("heaviside", 0.0)])
    def test_projected_pairings_match_direct(self, battery, d6_kernel, name, alpha):
        """<(q_{1/eps} f)(eps .), psi> follows <f(eps .), psi>."""
        report = qbth3_equivalence(build_generalized_function(name), 0.0, d6_kernel, [0.1, 0.05], battery,
                                   alpha=alpha)
        assert report.passed
        assert report.max_gap <= 5e-2
        assert np.isfinite(report.o_bound)

    @pytest.mark.parametrize("kernel", ["haar_kernel", "d4_kernel"])
    @pytest.mark.parametrize("distribution, alpha", [
        ("delta", -1.0),
        ({"name": "abs_pow", "params": {"a": 0.5}}, 0.5),
    ])
    def test_rough_kernels_match_direct(self, request, battery, kernel, distribution, alpha):
        """The equivalence holds for kernels without derivatives too."""
        K = request.getfixturevalue(kernel)
        report = qbth3_equivalence(build_generalized_function(distribution), 0.0, K, [0.1, 0.05], battery,
                                   alpha=alpha)
        assert report.passed
        assert report.max_gap <= 5e-2

    def test_power_matches_direct_under_d6(self, battery, d6_kernel):
        """|x|^(1/2) with D6 over the scales 0.1 to 0.01."""
        f = build_generalized_function({"name": "abs_pow", "params": {"a": 0.5}})
        report = qbth3_equivalence(f, 0.0, d6_kernel, np.geomspace(1e-1, 1e-2, 3), battery, alpha=0.5)
        assert report.passed
        assert report.max_gap <= 5e-2

    def test_expansion_residual(self, d6_kernel):
        """|x|^(1/2)(1 + x^2) expands like |x|^(1/2) at the origin."""
        f = build_generalized_function({"name": "abs_pow_poly", "params": {"a": 0.5, "c2": 1.0}})
        g = from_density(AbsPowerDensity(0.5))
        series = qbth2_check(f, 0.0, d6_kernel, range(13), g, 0.5)
        assert series.passed
        assert series.residuals[-1] < 0.1
        gap = abs(series.scaled_values[-1] - series.limit_constant) / abs(series.limit_constant)
        assert gap <= 5e-2


class TestAlphaDensity:
    """Tests for alpha-density ratios and the two-hypothesis pipeline."""

    def test_power_density_ratio(self):
        """|x|^(-1/2) dx has 1/2-density 4 / omega_{1/2} at the origin."""
        mu = from_density(AbsPowerDensity(-0.5))
        report = alpha_density(mu, 0.0, 0.5, EPS, ell=1.0)
        assert report.theta_hat == pytest.approx(THETA_ABS_POW, rel=1e-5)
        assert report.expected == pytest.approx(report.theta_hat, rel=1e-5)
        assert report.trend <= 1e-6

    def test_cantor_ratios_oscillate(self):
        """Cantor ratios at alpha = log 2 / log 3 swing between 2^-alpha / omega and 1 / omega."""
        alpha = np.log(2.0) / np.log(3.0)
        eps = [3.0 ** -2, 2.0 * 3.0 ** -3, 3.0 ** -3, 2.0 * 3.0 ** -4, 3.0 ** -4, 2.0 * 3.0 ** -5, 3.0 ** -5]
        report = alpha_density(build_generalized_function("cantor"), 0.0, alpha, eps)
        low = 2.0 ** -alpha
        np.testing.assert_allclose(np.array(report.ratios) * report.omega_alpha, [1.0, low] * 3 + [1.0], rtol=1e-9)
        assert report.band == pytest.approx((low / report.omega_alpha, 1.0 / report.omega_alpha), rel=1e-9)
        assert report.trend == pytest.approx(1.0 - low, rel=1e-6)

    def test_exponent_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            alpha_density(delta(), 0.0, 0.0, EPS)

    def test_negative_measure_rejected(self):
        """sgn(x) dx has negative mass left of the origin."""
        with pytest.raises(NegativeMeasure):
            alpha_density(build_generalized_function("sgn"), -0.5, 1.0, EPS)

    def test_pipeline_recovers_theta(self, battery, d6_kernel):
        """Both hypotheses hold for |x|^(-1/2) dx with ell = 1."""
        mu = from_density(AbsPowerDensity(-0.5))
        verdict = qbc2_pipeline(mu, 0.0, 0.5, d6_kernel, EPS, battery)
        assert verdict.ell == pytest.approx(1.0, rel=1e-2)
        assert verdict.theta_hat == pytest.approx(THETA_ABS_POW, rel=5e-2)
        assert verdict.theta_direct == pytest.approx(THETA_ABS_POW, rel=1e-5)

    def test_atom_fails_small_ball_bound(self, battery, d6_kernel):
        """delta keeps unit mass on every ball, so mu(B) = O(eps^(1/2)) fails."""
        with pytest.raises(HypothesisFailed) as excinfo:
            qbc2_pipeline(delta(), 0.0, 0.5, d6_kernel, EPS, battery)
        assert excinfo.value.clause == "small-ball-bound"

    def test_pipeline_reports_the_tail(self, battery, d6_kernel):
        """ell and the shape misfit are reported for each of the three finest scales."""
        mu = from_density(AbsPowerDensity(-0.5))
        verdict = qbc2_pipeline(mu, 0.0, 0.5, d6_kernel, EPS, battery)
        np.testing.assert_allclose(verdict.tail_eps, EPS[-3:])
        assert len(verdict.tail_ells) == len(verdict.tail_gaps) == 3
        assert max(verdict.tail_gaps) <= 5e-2
        assert verdict.projected_gap == max(verdict.tail_gaps)
        assert verdict.ell_spread <= 5e-2
        assert verdict.to_dict()["tail_ells"][-1] == verdict.ell

    def test_drifting_limit_fails(self, battery, d6_kernel):
        """A wrong L(eps) = |log eps| makes ell drift over the tail although the finest scale fits."""
        mu = from_density(AbsPowerDensity(-0.5))
        L = SlowlyVarying("log_power", 1.0)
        finest_only = qbc2_pipeline(mu, 0.0, 0.5, d6_kernel, EPS, battery, L, tail=1)
        assert finest_only.ell > 0.0
        with pytest.raises(HypothesisFailed) as excinfo:
            qbc2_pipeline(mu, 0.0, 0.5, d6_kernel, EPS, battery, L)
        assert excinfo.value.clause == "projected-limit"
        assert "spread" in str(excinfo.value)

    def test_limit_tail_must_be_positive(self, battery, d6_kernel):
        with pytest.raises(ValueError, match="tail"):
            qbc2_pipeline(from_density(AbsPowerDensity(-0.5)), 0.0, 0.5, d6_kernel, EPS, battery, tail=0)
