"""
Tests for building distributions, batteries and L models from config specs.
"""
import numpy as np
import pytest

from src.catalog import (
    build_battery,
    build_generalized_function,
    build_slowly_varying,
    build_test_function,
    list_catalog,
)
from src.errors import ConfigError
from src.generalized_functions import pair
from src.growth_spaces import gaussian


class TestCatalog:
    """Tests for the named building blocks."""

    def test_listing(self):
        """The listing is sorted and names parameters."""
        catalog = list_catalog()
        assert catalog["filters"] == ["d4", "d6", "d8", "haar"]
        assert "abs_pow(a)" in catalog["distributions"]
        assert "product(first, second)" in catalog["distributions"]
        assert catalog["distributions"] == sorted(catalog["distributions"])
        assert catalog["batteries"] == ["default4", "gaussians"]

    def test_single_term(self):
        """A name with parameters builds one term."""
        f = build_generalized_function({"name": "abs_pow", "params": {"a": 0.5}})
        assert len(f.terms) == 1
        assert f.terms[0].base.exponent == 0.5

    def test_decomposition(self):
        """Constants and several terms add up."""
        f = build_generalized_function({"constant": 2.0, "terms": ["delta", {"name": "delta_prime"}]})
        assert f.constant == 2.0
        assert [t.degree for t in f.terms] == [0, 1]
        assert f.name == "delta+delta_prime"

    def test_complex_weight(self):
        """Weights written as [re, im] are complex."""
        f = build_generalized_function({"terms": [{"name": "delta", "weight": [0.0, 2.0]}]})
        assert pair(f, gaussian()) == pytest.approx(2.0j)

    def test_planar_delta(self):
        """delta in two dimensions sits at the origin of the plane."""
        f = build_generalized_function("delta", dimension=2)
        assert f.dimension == 2
        assert f.terms[0].order == (0, 0)

    def test_unknown_distribution(self):
        """Unknown names list the alternatives."""
        with pytest.raises(ConfigError, match="available"):
            build_generalized_function("dirac")

    def test_missing_parameter(self):
        """abs_pow needs its exponent."""
        with pytest.raises(ConfigError, match="expects parameters"):
            build_generalized_function("abs_pow")

    def test_unexpected_parameter(self):
        with pytest.raises(ConfigError, match="unexpected"):
            build_generalized_function({"name": "heaviside", "params": {"a": 1.0}})

    def test_invalid_parameter_value(self):
        """|x|^-1 is not locally integrable."""
        with pytest.raises(ConfigError, match="locally integrable"):
            build_generalized_function({"name": "abs_pow", "params": {"a": -1.0}})

    def test_one_dimensional_density_in_plane(self):
        with pytest.raises(ConfigError, match="one-dimensional"):
            build_generalized_function("heaviside", dimension=2)

    def test_product_needs_plane(self):
        with pytest.raises(ConfigError, match="dimension 2"):
            build_generalized_function({"name": "product", "params": {"first": "gaussian", "second": "gaussian"}})

    def test_product_density(self):
        """A product of two 1-D densities pairs with tensor test functions."""
        f = build_generalized_function(
            {"name": "product", "params": {"first": "gaussian", "second": "lebesgue"}}, dimension=2
        )
        psi = gaussian().tensor(gaussian())
        assert pair(f, psi).real == pytest.approx(np.sqrt(np.pi / 2.0) * np.sqrt(np.pi), rel=1e-7)


class TestBatteries:
    """Tests for test functions, batteries and L models."""

    def test_default_battery(self):
        battery = build_battery("default4")
        assert [psi.name for psi in battery][:2] == [gaussian().name, build_test_function("x_gaussian").name]
        assert len(battery) == 4

    def test_explicit_battery(self):
        """A list of specs builds the members in order."""
        battery = build_battery(["gaussian", {"name": "rational", "params": {"power": 6.0}}])
        assert len(battery) == 2
        assert battery[1].decay.power == 6.0

    def test_unknown_battery(self):
        with pytest.raises(ConfigError, match="battery"):
            build_battery("default5")

    def test_empty_bump_rejected(self):
        """A bump on an empty interval is a config error."""
        with pytest.raises(ConfigError):
            build_test_function({"name": "bump", "params": {"a": 1.0, "b": 1.0}})

    def test_slowly_varying(self):
        L = build_slowly_varying({"name": "log_power", "params": {"beta": 2.0}})
        assert L(np.exp(-3.0)) == pytest.approx(9.0)
        assert build_slowly_varying().name == "constant"
