"""
Named building blocks for experiment configs: distributions, test-function
batteries and slowly varying models.

A distribution spec is either a single term
    {"name": "abs_pow", "params": {"a": 0.5}}
or a decomposition
    {"constant": 3.0, "terms": [{"name": "pow_sin_inv", "params": {"p": 2}, "order": 0, "weight": 1.0}]}
"""
from src.asymptotics import SlowlyVarying
from src.config import BUILTIN_FILTERS
from src.densities import (
    AbsPowerDensity,
    AtomicMeasure,
    CantorMeasure,
    ConstantDensity,
    GaussianDensity,
    HeavisideDensity,
    MonomialDensity,
    OffsetCosineDensity,
    PowSinInvDensity,
    ProductDensity,
    SignDensity,
)
from src.errors import ConfigError
from src.generalized_functions import GeneralizedFunction, MeasureTerm
from src.growth_spaces import bump, gaussian, rational, x_gaussian


def _atomic(dimension):
    return AtomicMeasure([[0.0, 0.0]] if dimension == 2 else [0.0], name="delta")


# name -> (parameter names, defaults, builder(params, dimension) -> (base, default order))
DISTRIBUTIONS = {
    "abs_pow": (("a",), {}, lambda p, d: (AbsPowerDensity(p["a"]), 0)),
    "abs_pow_poly": (("a", "c2"), {"c2": 1.0}, lambda p, d: (AbsPowerDensity(p["a"], (1.0, 0.0, p["c2"])), 0)),
    "cantor": ((), {}, lambda p, d: (CantorMeasure(), 0)),
    "constant": (("c",), {"c": 1.0}, lambda p, d: (ConstantDensity(p["c"]), 0)),
    "delta": ((), {}, lambda p, d: (_atomic(d), 0)),
    "delta_prime": ((), {}, lambda p, d: (_atomic(d), 1)),
    "gaussian": (("width",), {"width": 1.0}, lambda p, d: (GaussianDensity(p["width"]), 0)),
    "heaviside": ((), {}, lambda p, d: (HeavisideDensity(), 0)),
    "lebesgue": ((), {}, lambda p, d: (ConstantDensity(1.0), 0)),
    "monomial": (("k",), {}, lambda p, d: (MonomialDensity(int(p["k"])), 0)),
    "offset_cos": (("c",), {"c": 2.0}, lambda p, d: (OffsetCosineDensity(p["c"]), 0)),
    "pow_sin_inv": (("p",), {"p": 1}, lambda p, d: (PowSinInvDensity(int(p["p"])), 0)),
    "sgn": ((), {}, lambda p, d: (SignDensity(), 0)),
}

TEST_FUNCTIONS = {
    "bump": (("a", "b"), {"a": -1.0, "b": 1.0}, lambda p: bump(p["a"], p["b"])),
    "gaussian": ((), {}, lambda p: gaussian()),
    "rational": (("power",), {"power": 4.0}, lambda p: rational(p["power"])),
    "x_gaussian": ((), {}, lambda p: x_gaussian()),
}

BATTERIES = {
    "default4": ("gaussian", {"name": "x_gaussian"}, {"name": "bump", "params": {"a": -1.0, "b": 1.0}},
                 {"name": "bump", "params": {"a": 1.0, "b": 3.0}}),
    "gaussians": ("gaussian", "x_gaussian"),
}

L_MODELS = {
    "constant": ((), {}, lambda p: SlowlyVarying("constant")),
    "log_power": (("beta",), {"beta": 1.0}, lambda p: SlowlyVarying("log_power", p["beta"])),
}


def _signature(name, params):
    return f"{name}({', '.join(params)})" if params else name


def _resolve(table, kind, spec):
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec.get("name")
    if name not in table:
        raise ConfigError(f"Unknown {kind} '{name}'; available: {', '.join(sorted(table))}")
    names, defaults, builder = table[name]
    params = {**defaults, **dict(spec.get("params", {}))}
    missing = [p for p in names if p not in params]
    unknown = [p for p in params if p not in names]
    if missing or unknown:
        raise ConfigError(f"{kind.capitalize()} '{name}' expects parameters ({', '.join(names)}); "
                          f"missing {missing}, unexpected {unknown}")
    return builder, params


def build_test_function(spec):
    builder, params = _resolve(TEST_FUNCTIONS, "test function", spec)
    try:
        return builder(params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_battery(spec):
    """A battery by name, or a list of test-function specs."""
    if isinstance(spec, str):
        if spec not in BATTERIES:
            raise ConfigError(f"Unknown battery '{spec}'; available: {', '.join(sorted(BATTERIES))}")
        spec = BATTERIES[spec]
    return [build_test_function(item) for item in spec]


def build_slowly_varying(spec="constant"):
    builder, params = _resolve(L_MODELS, "L model", spec)
    return builder(params)


def _build_base(spec, dimension):
    if isinstance(spec, str):
        spec = {"name": spec}
    if spec.get("name") == "product":
        params = spec.get("params", {})
        if dimension != 2 or set(params) != {"first", "second"}:
            raise ConfigError("'product' needs dimension 2 and parameters (first, second)")
        first, _ = _build_base(params["first"], 1)
        second, _ = _build_base(params["second"], 1)
        return ProductDensity(first, second), 0
    builder, params = _resolve(DISTRIBUTIONS, "distribution", spec)
    try:
        base, order = builder(params, dimension)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if base.dimension != dimension:
        raise ConfigError(f"Distribution '{spec.get('name')}' is one-dimensional")
    return base, order


def _number(value):
    """Real when the imaginary part vanishes; configs write complex values as [re, im]."""
    if isinstance(value, (list, tuple)):
        value = complex(*value)
    value = complex(value)
    return value.real if value.imag == 0 else value


def build_generalized_function(spec, dimension=1):
    """GeneralizedFunction from a single-term or decomposed distribution spec."""
    if isinstance(spec, str):
        spec = {"name": spec}
    term_specs = spec.get("terms")
    if term_specs is None:
        term_specs = [spec] if "name" in spec else []
    term_specs = [{"name": t} if isinstance(t, str) else t for t in term_specs]
    terms = []
    for term in term_specs:
        base, default_order = _build_base(term, dimension)
        try:
            terms.append(MeasureTerm(base, term.get("order", default_order), _number(term.get("weight", 1.0)),
                                     term.get("shift", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    name = "+".join(t.get("name", "?") for t in term_specs) or "constant"
    return GeneralizedFunction(tuple(terms), _number(spec.get("constant", 0.0)), dimension, name)


def list_catalog():
    """Sorted names of filters, distributions, batteries and L models."""
    distributions = [_signature(name, entry[0]) for name, entry in DISTRIBUTIONS.items()]
    distributions.append("product(first, second)")
    return {
        "filters": sorted(BUILTIN_FILTERS),
        "distributions": sorted(distributions),
        "test_functions": sorted(_signature(name, entry[0]) for name, entry in TEST_FUNCTIONS.items()),
        "batteries": sorted(BATTERIES),
        "l_models": sorted(_signature(name, entry[0]) for name, entry in L_MODELS.items()),
    }
