"""
Growth weights, test-function classes and the grid seminorms nu_{r,l}, rho_{r,l}.
"""
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from numpy.polynomial import hermite

from src.config import BOUNDARY_RATIO, MAX_GRID_DOUBLINGS, SEMINORM_POINTS
from src.errors import DivergentSeminorm, EmptyFamily, OrderTooHigh
from src.quadrature import adaptive_integral

GAUSSIAN_WINDOW = 10.0


@dataclass(frozen=True)
class GrowthWeight:
    """Weight M(t) = t^p used as exp(M(l|x|))."""

    p: float = 1.0

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError(f"Weight exponent must be positive, got {self.p}")

    @property
    def kind(self):
        return "exponential_weight" if self.p == 1.0 else "polynomial_weight"

    def __call__(self, t):
        return np.abs(np.asarray(t, dtype=float)) ** self.p


@dataclass(frozen=True)
class Growth:
    """Growth class of a distribution term: |g(x)| <= C (1+|x|)^order, or exponential."""

    kind: str = "polynomial"
    order: float = 0.0

    def absorbed_by(self, decay, dimension=1):
        if decay.kind == "compact":
            return True
        if decay.kind == "gaussian":
            return True
        if self.kind == "exponential":
            return False
        return decay.power - self.order > dimension


@dataclass(frozen=True)
class DecayClass:
    """Declared decay of a test function: compact, gaussian, or rational(power)."""

    kind: str = "gaussian"
    center: float = 0.0
    radius: float = 0.0
    power: float = 0.0
    width: float = 1.0

    def window(self):
        if self.kind == "compact":
            return (self.center - self.radius, self.center + self.radius)
        if self.kind == "gaussian":
            return (self.center - GAUSSIAN_WINDOW * self.width, self.center + GAUSSIAN_WINDOW * self.width)
        return (-np.inf, np.inf)

    def envelope(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        if self.kind == "compact":
            return (np.abs(u) * self.width <= self.radius).astype(float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * u ** 2)
        return (1.0 + np.abs(u)) ** -self.power

    def default_extent(self):
        if self.kind == "compact":
            return abs(self.center) + self.radius
        if self.kind == "gaussian":
            return abs(self.center) + 6.0 * self.width
        return abs(self.center) + 50.0 * self.width


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Smooth function with derivatives to `max_order` and a declared decay.

    Exactly one representation is used: analytic derivative callables, a
    piecewise profile, or two one-dimensional factors (tensor product).
    """

    __test__ = False

    name: str
    derivatives: tuple = ()
    decay: DecayClass = field(default_factory=DecayClass)
    profile: object = None
    factors: tuple = ()

    @property
    def dimension(self):
        return 2 if self.factors else 1

    @property
    def max_order(self):
        if self.factors:
            return min(f.max_order for f in self.factors)
        if self.profile is not None:
            return self.profile.max_order
        return len(self.derivatives) - 1

    def _check_order(self, order):
        total = sum(order) if isinstance(order, tuple) else order
        if total > self.max_order:
            raise OrderTooHigh(f"Test function '{self.name}' has derivatives only up to {self.max_order}")

    def evaluate(self, x, order=0):
        if self.factors:
            order = order if isinstance(order, tuple) else (order, 0)
            pts = np.asarray(x, dtype=float)
            out = self.factors[0].evaluate(pts[..., 0], order[0]) * self.factors[1].evaluate(pts[..., 1], order[1])
            return out if np.ndim(out) else float(out)
        order = order[0] if isinstance(order, tuple) else order
        self._check_order(order)
        if self.profile is not None:
            return self.profile.evaluate(x, order)
        out = self.derivatives[order](np.asarray(x, dtype=float))
        return out if np.ndim(out) else float(out)

    def window(self):
        if self.profile is not None:
            return (self.profile.lo, self.profile.hi)
        return self.decay.window()

    def integral(self):
        """int psi over R^n."""
        if self.factors:
            return self.factors[0].integral() * self.factors[1].integral()
        if self.profile is not None:
            return self.profile.integral()
        lo, hi = self.window()
        return adaptive_integral(lambda t: self.evaluate(t), lo, hi, points=(0.0,))

    def dilated(self, a):
        """psi_a(x) = a^-n psi(x / a)."""
        if a <= 0:
            raise ValueError(f"Dilation factor must be positive, got {a}")
        if self.factors:
            return TestFunction(name=f"{self.name}@{a:g}", factors=tuple(f.dilated(a) for f in self.factors))
        decay = DecayClass(self.decay.kind, self.decay.center * a, self.decay.radius * a, self.decay.power,
                           self.decay.width * a)
        if self.profile is not None:
            return TestFunction(name=f"{self.name}@{a:g}", decay=decay, profile=self.profile.affine(0.0, a, 1.0 / a))
        derivatives = tuple(_dilate(d, a, k) for k, d in enumerate(self.derivatives))
        return TestFunction(name=f"{self.name}@{a:g}", derivatives=derivatives, decay=decay)

    def translated(self, c):
        """x -> psi(x - c)."""
        decay = DecayClass(self.decay.kind, self.decay.center + c, self.decay.radius, self.decay.power,
                           self.decay.width)
        if self.profile is not None:
            return TestFunction(name=f"{self.name}+{c:g}", decay=decay, profile=self.profile.affine(c, 1.0))
        derivatives = tuple(_shift(d, c) for d in self.derivatives)
        return TestFunction(name=f"{self.name}+{c:g}", derivatives=derivatives, decay=decay)

    def tensor(self, other):
        return TestFunction(name=f"{self.name}*{other.name}", factors=(self, other))


def _dilate(func, a, order):
    return lambda x: func(np.asarray(x, dtype=float) / a) / a ** (1 + order)


def _shift(func, c):
    return lambda x: func(np.asarray(x, dtype=float) - c)


def gaussian():
    """e^{-x^2} with derivatives to order 3."""
    def derivative(k):
        coef = np.zeros(k + 1)
        coef[k] = (-1.0) ** k
        return lambda x: hermite.hermval(x, coef) * np.exp(-x ** 2)
    return TestFunction(name="gaussian", derivatives=tuple(derivative(k) for k in range(4)))


def x_gaussian():
    """x e^{-x^2} = -(1/2) d/dx e^{-x^2}, derivatives to order 3."""
    def derivative(k):
        coef = np.zeros(k + 2)
        coef[k + 1] = 0.5 * (-1.0) ** k
        return lambda x: hermite.hermval(x, coef) * np.exp(-x ** 2)
    return TestFunction(name="x_gaussian", derivatives=tuple(derivative(k) for k in range(4)))


def bump(a=-1.0, b=1.0):
    """C-infinity bump supported in [a, b] with maximum 1 at the midpoint."""
    if not b > a:
        raise ValueError(f"Bump needs a < b, got [{a}, {b}]")
    center = 0.5 * (a + b)
    width = 0.5 * (b - a)

    def parts(x):
        t = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(t) < 1.0
        s = np.where(inside, 1.0 - t ** 2, 1.0)
        value = np.where(inside, np.exp(1.0 - 1.0 / s), 0.0)
        g1 = -2.0 * t / s ** 2
        g2 = -2.0 / s ** 2 - 8.0 * t ** 2 / s ** 3
        return value, g1, g2

    def d0(x):
        return parts(x)[0]

    def d1(x):
        value, g1, _ = parts(x)
        return value * g1 / width

    def d2(x):
        value, g1, g2 = parts(x)
        return value * (g1 ** 2 + g2) / width ** 2

    return TestFunction(
        name=f"bump[{a:g},{b:g}]",
        derivatives=(d0, d1, d2),
        decay=DecayClass("compact", center=center, radius=width),
    )


def rational(power=2.0):
    """(1 + x^2)^(-power/2), derivatives to order 2."""
    q = power / 2.0

    def d0(x):
        return (1.0 + x ** 2) ** -q

    def d1(x):
        return -2.0 * q * x * (1.0 + x ** 2) ** (-q - 1.0)

    def d2(x):
        return -2.0 * q * (1.0 + x ** 2) ** (-q - 1.0) + 4.0 * q * (q + 1.0) * x ** 2 * (1.0 + x ** 2) ** (-q - 2.0)

    return TestFunction(name=f"rational({power:g})", derivatives=(d0, d1, d2),
                        decay=DecayClass("rational", power=power))


def envelope_consistent(psi, extent=None, points=SEMINORM_POINTS):
    """True when every available derivative stays under the declared envelope shape."""
    decay = psi.decay
    extent = extent or max(decay.default_extent(), 1.0) * 1.5
    x = np.linspace(-extent, extent, points)
    for order in range(psi.max_order + 1):
        values = np.abs(psi.evaluate(x, order))
        envelope = decay.envelope(x)
        if decay.kind == "compact":
            if np.any(values[envelope == 0.0] > 0.0):
                return False
            continue
        ratio = values / envelope
        edge = np.abs(x) >= 0.75 * extent
        if np.max(ratio[edge]) > np.max(ratio[~edge]) * (1.0 + 1e-9) + 1e-300:
            return False
    return True


@dataclass(frozen=True)
class SeminormGrid:
    extent: float
    points: int = SEMINORM_POINTS

    def samples(self, dimension):
        axis = np.linspace(-self.extent, self.extent, self.points if dimension == 1 else min(self.points, 401))
        if dimension == 1:
            return axis
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        return np.stack([xx, yy], axis=-1)

    def ring(self, dimension):
        """Samples just beyond the grid edge, out to twice the extent."""
        outer = np.linspace(self.extent, 2.0 * self.extent, 64)
        radial = np.concatenate([-outer, outer])
        if dimension == 1:
            return radial
        return np.stack([radial, np.zeros_like(radial)], axis=-1)

    def doubled(self):
        return SeminormGrid(2.0 * self.extent, self.points)


@dataclass(frozen=True)
class SeminormReport:
    kind: str
    r: int
    l: float
    value: float
    extent: float
    points: int
    boundary_ratio: float


def _multi_indices(r, dimension):
    if dimension == 1:
        return [k for k in range(r + 1)]
    return [a for a in product(range(r + 1), repeat=2) if sum(a) <= r]


def _weighted_values(psi, r, weight, x):
    radius = np.abs(x) if psi.dimension == 1 else np.linalg.norm(x, axis=-1)
    w = weight(radius)
    best = np.zeros(np.shape(radius))
    for order in _multi_indices(r, psi.dimension):
        best = np.maximum(best, np.abs(psi.evaluate(x, order)) * w)
    return best


def _edge_values(values, dimension):
    if dimension == 1:
        return max(values[0], values[-1])
    return max(values[0, :].max(), values[-1, :].max(), values[:, 0].max(), values[:, -1].max())


def _seminorm(psi, r, l, weight, kind, grid):
    if r > psi.max_order:
        raise OrderTooHigh(f"Seminorm of order {r} needs derivatives of '{psi.name}' up to {r}")
    auto = grid is None
    if auto:
        extent = psi.decay.default_extent() if not psi.factors else max(
            f.decay.default_extent() for f in psi.factors) * np.sqrt(2.0)
        grid = SeminormGrid(extent)
    dim = psi.dimension
    for attempt in range(MAX_GRID_DOUBLINGS + 1):
        values = _weighted_values(psi, r, weight, grid.samples(dim))
        peak = float(values.max())
        edge = float(_edge_values(values, dim))
        ratio = edge / peak if peak > 0 else 0.0
        if ratio <= BOUNDARY_RATIO:
            break
        beyond = float(_weighted_values(psi, r, weight, grid.ring(dim)).max())
        if beyond > edge * (1.0 + 1e-9):
            raise DivergentSeminorm(
                f"Weighted values of '{psi.name}' grow past the grid edge at {grid.extent:g} "
                f"({edge:.3e} -> {beyond:.3e})"
            )
        if not auto or attempt == MAX_GRID_DOUBLINGS:
            break
        grid = grid.doubled()
    return SeminormReport(kind=kind, r=r, l=l, value=peak, extent=grid.extent, points=grid.points,
                          boundary_ratio=ratio)


def nu_seminorm(psi, weight, r, l, grid=None):
    """sup_{|a| <= r, x} e^{M(l|x|)} |psi^(a)(x)| on a grid."""
    return _seminorm(psi, r, l, lambda t: np.exp(weight(l * t)), "nu", grid)


def rho_seminorm(psi, r, l, grid=None):
    """sup_{|a| <= r, x} (1+|x|)^l |psi^(a)(x)| on a grid."""
    return _seminorm(psi, r, l, lambda t: (1.0 + t) ** l, "rho", grid)


@dataclass(frozen=True)
class WeightAxiomReport:
    superadditivity: float
    doubling: float
    dilation: float

    @property
    def worst(self):
        return max(self.superadditivity, self.doubling, self.dilation)


def weight_axiom_check(weight, grid=None):
    """Largest positive violation of the three growth-weight axioms on a grid of t, s >= 0."""
    t_values = np.linspace(0.0, 10.0, 41) if grid is None else np.asarray(grid, dtype=float)
    t, s = np.meshgrid(t_values, t_values, indexing="ij")
    superadditivity = np.max(weight(t) + weight(s) - weight(t + s))
    doubling = np.max(weight(t + s) - weight(2 * t) - weight(2 * s))
    x = t_values[:, None, None]
    dilation = np.max(weight(t * x) + weight(s * x) - weight((t + s) * x))
    return WeightAxiomReport(
        superadditivity=max(0.0, float(superadditivity)),
        doubling=max(0.0, float(doubling)),
        dilation=max(0.0, float(dilation)),
    )


def bounded_family_seminorm_sweep(family, r, l, weight=None, grid=None):
    """Largest nu (with `weight`) or rho seminorm over a family of test functions."""
    family = list(family)
    if not family:
        raise EmptyFamily("Seminorm sweep needs at least one test function")
    reports = [
        nu_seminorm(psi, weight, r, l, grid) if weight is not None else rho_seminorm(psi, r, l, grid)
        for psi in family
    ]
    return max(reports, key=lambda rep: rep.value)
