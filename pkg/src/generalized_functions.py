"""
Distributions in decomposed form f = gamma + sum_a d^a mu_a and their pairings.

Derivatives are always moved onto the test function:
<d^a mu, psi> = (-1)^|a| int d^a psi dmu.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

from src.config import LIMIT_TAIL, MIN_SCALES, RANDOM_STATE, SLACK_MARGIN
from src.densities import AtomicMeasure
from src.errors import EpsilonNonpositive, GrowthMismatch, InsufficientScales, OrderTooHigh
from src.logger import get_logger
from src.regression import fit_log_slope

logger = get_logger("Distributions")


def unit_ball_volume(dimension):
    return 2.0 if dimension == 1 else np.pi


@dataclass(frozen=True)
class MeasureTerm:
    """One summand d^order (weight * base translated by shift)."""

    base: object
    order: tuple = (0,)
    weight: complex = 1.0
    shift: object = 0.0

    def __post_init__(self):
        order = (int(self.order),) if np.isscalar(self.order) else tuple(int(k) for k in self.order)
        if len(order) == 1 and self.base.dimension == 2:
            order = (order[0], 0)
        if len(order) != self.base.dimension:
            raise ValueError(f"Order {order} does not match the {self.base.dimension}-D base '{self.base.name}'")
        object.__setattr__(self, "order", order)
        if self.base.dimension == 2:
            object.__setattr__(self, "shift", tuple(np.broadcast_to(np.asarray(self.shift, dtype=float), (2,))))
        else:
            object.__setattr__(self, "shift", float(self.shift))

    @property
    def degree(self):
        return sum(self.order)

    @property
    def dimension(self):
        return self.base.dimension

    def translated(self, c):
        shift = np.asarray(self.shift, dtype=float) + np.asarray(c, dtype=float)
        return MeasureTerm(self.base, self.order, self.weight, shift if self.dimension == 2 else float(shift))

    def scaled(self, c):
        return MeasureTerm(self.base, self.order, self.weight * c, self.shift)


@dataclass(frozen=True)
class GeneralizedFunction:
    """gamma + sum of measure terms, in one or two dimensions."""

    terms: tuple = ()
    constant: complex = 0.0
    dimension: int = 1
    name: str = "f"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.dimension != self.dimension:
                raise ValueError(f"Term '{term.base.name}' is {term.dimension}-D in a {self.dimension}-D distribution")

    @property
    def order(self):
        return max((term.degree for term in self.terms), default=0)

    def __add__(self, other):
        if other.dimension != self.dimension:
            raise ValueError("Cannot add distributions of different dimensions")
        return GeneralizedFunction(self.terms + other.terms, self.constant + other.constant,
                                   self.dimension, f"{self.name}+{other.name}")

    def scaled(self, c):
        return GeneralizedFunction(tuple(t.scaled(c) for t in self.terms), self.constant * c,
                                   self.dimension, f"{c}*{self.name}")

    def translated(self, x0):
        """f(. - x0)."""
        return GeneralizedFunction(tuple(t.translated(x0) for t in self.terms), self.constant,
                                   self.dimension, f"{self.name}(.-{x0})")


def delta(point=0.0, order=0, weight=1.0):
    """weight * d^order delta_point in one dimension, or at a 2-D point."""
    pts = np.atleast_1d(np.asarray(point, dtype=float))
    dim = pts.size
    base = AtomicMeasure(pts.reshape(1, -1) if dim == 2 else pts, name="delta")
    name = "delta" + "'" * (order if np.isscalar(order) else sum(order))
    return GeneralizedFunction((MeasureTerm(base, order, weight),), dimension=dim, name=name)


def from_density(density, order=0, weight=1.0, constant=0.0):
    return GeneralizedFunction((MeasureTerm(density, order, weight),), constant=constant,
                               dimension=density.dimension, name=density.name)


def _check_term(term, psi):
    if term.degree > psi.max_order:
        raise OrderTooHigh(
            f"Term '{term.base.name}' of order {term.degree} needs test-function derivatives "
            f"up to {term.degree}; '{psi.name}' has {psi.max_order}"
        )
    decays = [f.decay for f in psi.factors] if psi.factors else [psi.decay]
    if psi.profile is None and not all(term.base.growth.absorbed_by(d, term.dimension) for d in decays):
        raise GrowthMismatch(f"Test function '{psi.name}' decays too slowly for term '{term.base.name}'")


def pair_scaled(f, x0, eps, psi):
    """<f(x0 + eps x), psi(x)>.

    Each term contributes (-1)^|a| eps^(-n-|a|) int (d^a psi)((x - x0)/eps) dmu(x).
    """
    if eps <= 0:
        raise EpsilonNonpositive(f"Scale must be positive, got {eps}")
    if psi.dimension != f.dimension:
        raise ValueError(f"{psi.dimension}-D test function paired with a {f.dimension}-D distribution")
    n = f.dimension
    total = f.constant * psi.integral() if f.constant != 0 else 0.0
    for term in f.terms:
        _check_term(term, psi)
        center = np.asarray(x0, dtype=float) - np.asarray(term.shift, dtype=float)
        center = float(center) if n == 1 else tuple(center)
        value = term.base.integrate_test(psi, term.order, center, eps)
        total += term.weight * (-1.0) ** term.degree * eps ** (-n - term.degree) * value
    return complex(total)


def pair(f, psi):
    """<f, psi>."""
    origin = 0.0 if f.dimension == 1 else (0.0, 0.0)
    return pair_scaled(f, origin, 1.0, psi)


def small_ball_mass(term, x0, eps_list):
    """|mu|(B(x0, eps)) of the term's weighted base for every eps."""
    center = np.asarray(x0, dtype=float) - np.asarray(term.shift, dtype=float)
    center = float(center) if term.dimension == 1 else tuple(center)
    return [abs(term.weight) * term.base.abs_mass_ball(center, float(eps)) for eps in eps_list]


def ball_measure(mu, x0, eps):
    """Signed mu(B(x0, eps)) for an order-0 distribution."""
    if mu.order != 0:
        raise ValueError("Ball measures need an order-0 distribution")
    total = mu.constant * unit_ball_volume(mu.dimension) * eps ** mu.dimension
    for term in mu.terms:
        center = np.asarray(x0, dtype=float) - np.asarray(term.shift, dtype=float)
        if term.base.nonnegative:
            center = float(center) if term.dimension == 1 else tuple(center)
            total += term.weight * term.base.abs_mass_ball(center, eps)
        elif term.dimension == 1:
            total += term.weight * term.base.mass(float(center) - eps, float(center) + eps)
        else:
            raise ValueError(f"Signed disk measure of '{term.base.name}' is not available")
    return total


def _mass_exponent(masses, eps):
    masses = np.asarray(masses, dtype=float)
    positive = masses > 0.0
    if positive.sum() < 2:
        return float("inf")
    slope, _ = fit_log_slope(np.asarray(eps)[positive], masses[positive])
    return slope


def _check_scales(eps):
    eps = np.sort(np.asarray(eps, dtype=float))[::-1]
    if np.any(eps <= 0):
        raise EpsilonNonpositive("Every scale must be positive")
    if eps.size < MIN_SCALES:
        raise InsufficientScales(f"Need at least {MIN_SCALES} scales, got {eps.size}")
    return eps


@dataclass(frozen=True)
class PointValueCertificate:
    x0: object
    gamma: complex
    order: int
    exponents: tuple
    thresholds: tuple
    passed_terms: tuple
    passed: bool

    def to_dict(self):
        data = asdict(self)
        data["gamma"] = [self.gamma.real, self.gamma.imag]
        return data


def certify_point_value(f, x0, eps, slack=SLACK_MARGIN):
    """Certificate that f has the point value gamma at x0.

    Every term must satisfy |mu_a|(B(x0, eps)) ~ eps^sigma with
    sigma >= n + |a| + slack.
    """
    eps = _check_scales(eps)
    exponents, thresholds, verdicts = [], [], []
    for term in f.terms:
        sigma = _mass_exponent(small_ball_mass(term, x0, eps), eps)
        threshold = f.dimension + term.degree + slack
        exponents.append(sigma)
        thresholds.append(threshold)
        verdicts.append(bool(sigma >= threshold))
        logger.info(f"Term '{term.base.name}': small-ball exponent {sigma:.4f} (needs {threshold:.2f})")
    return PointValueCertificate(
        x0=x0,
        gamma=complex(f.constant),
        order=f.order,
        exponents=tuple(exponents),
        thresholds=tuple(thresholds),
        passed_terms=tuple(verdicts),
        passed=all(verdicts),
    )


@dataclass(frozen=True)
class DensityPointReport:
    x0: object
    family: str
    gamma_hat: float
    dispersion: float
    scales: tuple
    scale_ranges: tuple
    tail: int = 1
    ratios: tuple = field(repr=False, default=())

    def to_dict(self):
        data = asdict(self)
        data["ratios"] = [list(r) for r in self.ratios]
        return data


def _box_measure(mu, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    total = mu.constant * float(np.prod(hi - lo))
    for term in mu.terms:
        shift = np.asarray(term.shift, dtype=float)
        a, b = lo - shift, hi - shift
        if term.dimension == 1:
            total += term.weight * term.base.mass(float(a), float(b))
        else:
            total += term.weight * term.base.mass(tuple(a), tuple(b))
    return total


def _sample_sets(rng, family, x0, eps, a, samples, dimension):
    """Admissible sets inside B(x0, eps) with measure >= a eps^n, as (lo, hi) boxes."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    boxes = []
    if family == "balls":
        if dimension != 1:
            raise ValueError("The ball family is available in one dimension")
        radii = rng.uniform(0.5 * a * eps, eps, size=samples)
        return [(x0 - r, x0 + r) for r in radii]
    reach = eps if dimension == 1 else eps / np.sqrt(2.0)
    while len(boxes) < samples:
        s = rng.uniform(0.0, reach, size=dimension)
        t = rng.uniform(0.0, reach, size=dimension)
        if np.prod(s + t) >= a * eps ** dimension:
            boxes.append((x0 - s, x0 + t))
    return boxes


def density_point_check(mu, x0, family="hyperrectangles", a=0.5, scales=None, samples=32, seed=RANDOM_STATE,
                        tail=LIMIT_TAIL):
    """Ratios mu(B)/m(B) over random admissible sets shrinking to x0.

    Args:
        mu: Order-0 distribution.
        x0: Point under test.
        family: "balls" (centered) or "hyperrectangles" containing x0.
        a: Regularity constant, m(B) >= a eps^n.
        scales: Decreasing scales eps.
        samples: Sets drawn per scale.
        seed: Seed of the numpy generator.
        tail: Finest scales pooled into the dispersion.

    Returns:
        DensityPointReport with the finest-scale mean and the range of all ratios
        over the `tail` finest scales.
    """
    if family not in ("balls", "hyperrectangles"):
        raise ValueError(f"Unknown shrinking family '{family}'")
    if mu.order != 0:
        raise ValueError("Density points are defined for order-0 distributions")
    if tail < 1:
        raise ValueError(f"The dispersion tail needs at least one scale, got {tail}")
    scales = np.sort(np.asarray(scales if scales is not None else np.geomspace(1e-1, 1e-4, 4), dtype=float))[::-1]
    rng = np.random.default_rng(seed)
    all_ratios, ranges = [], []
    for eps in scales:
        ratios = []
        for lo, hi in _sample_sets(rng, family, x0, eps, a, samples, mu.dimension):
            volume = float(np.prod(hi - lo))
            value = _box_measure(mu, lo if mu.dimension == 2 else lo[0], hi if mu.dimension == 2 else hi[0])
            ratios.append(float(np.real(value)) / volume)
        all_ratios.append(tuple(ratios))
        ranges.append(float(max(ratios) - min(ratios)))
    finest = np.asarray(all_ratios[-1])
    tail = min(tail, len(all_ratios))
    pooled = np.concatenate([np.asarray(r) for r in all_ratios[-tail:]])
    return DensityPointReport(
        x0=x0,
        family=family,
        gamma_hat=float(finest.mean()),
        dispersion=float(pooled.max() - pooled.min()),
        scales=tuple(float(e) for e in scales),
        scale_ranges=tuple(ranges),
        tail=tail,
        ratios=tuple(all_ratios),
    )
