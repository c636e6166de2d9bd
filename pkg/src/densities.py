"""
Base measures for distribution terms: densities, atomic measures and the Cantor measure.

Every base answers the same three questions: the integral of a (rescaled) test
function derivative against it, the signed mass of an interval or box, and the
total-variation mass of a ball.
"""
from abc import ABC, abstractmethod

import numpy as np
from scipy import integrate, special

from src.config import CANTOR_LEVEL, MASS_CELLS
from src.growth_spaces import Growth
from src.quadrature import (
    adaptive_integral,
    gauss_moments,
    graded_moments,
    integrate_cells,
    stieltjes_sum,
)

# Half periods of |sin| summed exactly before switching to the mean value 2/pi.
_HALF_PERIODS = 4000


class MeasureBase(ABC):
    """Common interface of the base measures a MeasureTerm can carry."""

    kind = "density"
    dimension = 1
    name = "measure"
    growth = Growth()
    nonnegative = False

    @abstractmethod
    def integrate_test(self, psi, order, center, scale):
        """int (d^order psi)((x - center) / scale) dmu(x)."""

    @abstractmethod
    def mass(self, lo, hi):
        """Signed mass of [lo, hi] (a box in two dimensions)."""

    @abstractmethod
    def abs_mass_ball(self, center, radius):
        """Total-variation mass of the closed ball B(center, radius)."""


class Density(MeasureBase):
    """Locally integrable function g on the line, integrated cell by cell."""

    singular_points = ()
    has_primitive = False
    support = (-np.inf, np.inf)

    @abstractmethod
    def __call__(self, x):
        """g(x), vectorized."""

    def primitive(self, x, k):
        """Antiderivative of x^k g(x), k in {0, 1}; only when `has_primitive`."""
        raise NotImplementedError

    def oscillation_period(self, x):
        return None

    def breakpoints(self, lo, hi):
        return [s for s in self.singular_points if lo < s < hi]

    def _special_cells(self, a, b):
        special = np.zeros(a.size, dtype=bool)
        for s in self.singular_points:
            special |= (a == s) | (b == s)
        period = self.oscillation_period(0.5 * (a + b))
        if period is not None:
            special |= period < 4.0 * (b - a)
        return special

    def cell_moments(self, a, b):
        """(M0, M1) per cell, M1 taken about the left edge."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        m0 = np.zeros(a.size)
        m1 = np.zeros(a.size)
        special = self._special_cells(a, b)
        regular = ~special
        if regular.any():
            m0[regular], m1[regular] = gauss_moments(self, a[regular], b[regular])
        if special.any():
            sa, sb = a[special], b[special]
            if self.has_primitive:
                m0[special] = self.primitive(sb, 0) - self.primitive(sa, 0)
                m1[special] = self.primitive(sb, 1) - self.primitive(sa, 1) - sa * m0[special]
            else:
                toward_left = np.isin(sa, self.singular_points)
                m0[special], m1[special] = graded_moments(self, sa, sb, toward_left)
        return m0, m1

    def _edges(self, lo, hi, base):
        lo = max(lo, self.support[0])
        hi = min(hi, self.support[1])
        if not hi > lo:
            return np.array([])
        return np.union1d(base, [lo, hi, *self.breakpoints(lo, hi)])

    def integrate_profile(self, profile, order, center, scale):
        """int p^(order)((x - center) / scale) g(x) dx for a piecewise profile p."""
        x_nodes = center + scale * profile.nodes
        inside = (x_nodes >= self.support[0]) & (x_nodes <= self.support[1])
        edges = self._edges(x_nodes[0], x_nodes[-1], x_nodes[inside])
        if edges.size < 2:
            return 0.0
        u = (edges - center) / scale
        if profile.mode == "step":
            left = profile.evaluate(0.5 * (u[:-1] + u[1:]), order)
            right = left
        else:
            values = profile.evaluate(u, order)
            left, right = values[:-1], values[1:]
        live = (left != 0.0) | (right != 0.0)
        if not live.any():
            return 0.0
        a, b = edges[:-1][live], edges[1:][live]
        m0, m1 = self.cell_moments(a, b)
        return integrate_cells(a, b, left[live], right[live], m0, m1, profile.mode)

    def integrate_test(self, psi, order, center, scale):
        if psi.factors:
            raise ValueError(f"One-dimensional density '{self.name}' paired with a two-dimensional test function")
        order = order[0] if isinstance(order, tuple) else order
        if psi.profile is not None:
            return self.integrate_profile(psi.profile, order, center, scale)
        lo, hi = psi.window()
        lo = max(lo, (self.support[0] - center) / scale)
        hi = min(hi, (self.support[1] - center) / scale)
        if not hi > lo:
            return 0.0
        points = [0.0] + [(s - center) / scale for s in self.breakpoints(center + scale * lo, center + scale * hi)]
        return scale * adaptive_integral(
            lambda u: psi.evaluate(u, order) * self(center + scale * u), lo, hi, points
        )

    def mass(self, lo, hi):
        edges = self._edges(lo, hi, np.linspace(lo, hi, MASS_CELLS + 1))
        if edges.size < 2:
            return 0.0
        m0, _ = self.cell_moments(edges[:-1], edges[1:])
        return float(m0.sum())

    def abs_mass_ball(self, center, radius):
        if self.nonnegative:
            return self.mass(center - radius, center + radius)
        edges = self._edges(center - radius, center + radius,
                            np.linspace(center - radius, center + radius, MASS_CELLS + 1))
        if edges.size < 2:
            return 0.0
        a, b = edges[:-1], edges[1:]
        special = np.zeros(a.size, dtype=bool)
        for s in self.singular_points:
            special |= (a == s) | (b == s)

        def magnitude(x):
            return np.abs(self(x))

        total = 0.0
        if (~special).any():
            total += gauss_moments(magnitude, a[~special], b[~special])[0].sum()
        if special.any():
            toward_left = np.isin(a[special], self.singular_points)
            total += graded_moments(magnitude, a[special], b[special], toward_left)[0].sum()
        return float(total)


class ConstantDensity(Density):
    def __init__(self, value=1.0):
        self.value = float(value)
        self.name = "lebesgue" if value == 1.0 else f"constant({value:g})"
        self.nonnegative = self.value >= 0.0

    def __call__(self, x):
        return np.full(np.shape(x), self.value)


class HeavisideDensity(Density):
    name = "heaviside"
    singular_points = (0.0,)
    nonnegative = True

    def __call__(self, x):
        return (np.asarray(x) >= 0.0).astype(float)


class SignDensity(Density):
    name = "sgn"
    singular_points = (0.0,)

    def __call__(self, x):
        return np.sign(np.asarray(x, dtype=float))


class AbsPowerDensity(Density):
    """|x|^a (c_0 + c_1 x + c_2 x^2 + ...), a > -1."""

    singular_points = (0.0,)
    has_primitive = True

    def __init__(self, exponent, poly=(1.0,)):
        if exponent <= -1.0:
            raise ValueError(f"|x|^a is not locally integrable for a = {exponent}")
        self.exponent = float(exponent)
        self.poly = tuple(float(c) for c in poly)
        self.name = f"abs_pow({exponent:g})" if self.poly == (1.0,) else f"abs_pow_poly({exponent:g})"
        self.growth = Growth("polynomial", self.exponent + len(self.poly) - 1)
        self.nonnegative = all(c >= 0.0 for c in self.poly[::2]) and not any(self.poly[1::2])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            base = np.abs(x) ** self.exponent
        return base * np.polynomial.polynomial.polyval(x, self.poly)

    def primitive(self, x, k):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for j, c in enumerate(self.poly):
            m = j + k
            power = self.exponent + m + 1.0
            total += c * np.sign(x) ** (m + 1) * np.abs(x) ** power / power
        return total


class GaussianDensity(Density):
    nonnegative = True

    def __init__(self, width=1.0):
        self.width = float(width)
        self.name = f"gaussian({width:g})"

    def __call__(self, x):
        return np.exp(-(np.asarray(x, dtype=float) / self.width) ** 2)


class OffsetCosineDensity(Density):
    """c + cos(x)."""

    def __init__(self, offset=2.0):
        self.offset = float(offset)
        self.name = f"offset_cos({offset:g})"
        self.nonnegative = self.offset >= 1.0

    def __call__(self, x):
        return self.offset + np.cos(np.asarray(x, dtype=float))


class MonomialDensity(Density):
    def __init__(self, power):
        self.power = int(power)
        self.name = f"monomial({self.power})"
        self.growth = Growth("polynomial", float(self.power))
        self.nonnegative = self.power % 2 == 0

    def __call__(self, x):
        return np.asarray(x, dtype=float) ** self.power


def _sine_integrals(t, n):
    """Antiderivatives (S_n, C_n) of sin(t)/t^n and cos(t)/t^n; t may be +inf."""
    t = np.asarray(t, dtype=float)
    finite = np.isfinite(t)
    safe = np.where(finite, t, 1.0)
    si, ci = special.sici(safe)
    s_val = np.where(finite, si, np.pi / 2.0)
    c_val = np.where(finite, ci, 0.0)
    for k in range(2, n + 1):
        boundary_sin = np.where(finite, np.sin(safe) / safe ** (k - 1), 0.0)
        boundary_cos = np.where(finite, np.cos(safe) / safe ** (k - 1), 0.0)
        s_val, c_val = (
            -boundary_sin / (k - 1) + c_val / (k - 1),
            -boundary_cos / (k - 1) - s_val / (k - 1),
        )
    return s_val, c_val


class PowSinInvDensity(Density):
    """x^p sin(1/x) for integer p >= 0, oscillating without bound near 0."""

    singular_points = (0.0,)
    has_primitive = True

    def __init__(self, power=1):
        self.power = int(power)
        self.name = f"pow_sin_inv({self.power})"
        self.growth = Growth("polynomial", max(0.0, self.power - 1.0))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        safe = np.where(x == 0.0, 1.0, x)
        return np.where(x == 0.0, 0.0, safe ** self.power * np.sin(1.0 / safe))

    def oscillation_period(self, x):
        return 2.0 * np.pi * np.asarray(x, dtype=float) ** 2

    def primitive(self, x, k):
        # F(x) = int_0^x u^m sin(1/u) du = int_{1/|x|}^inf t^-(m+2) sin t dt for x > 0,
        # extended to x < 0 by the parity (-1)^m.
        m = self.power + k
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            t = np.where(ax == 0.0, np.inf, 1.0 / np.where(ax == 0.0, 1.0, ax))
        s_inf, _ = _sine_integrals(np.array(np.inf), m + 2)
        s_t, _ = _sine_integrals(t, m + 2)
        positive = s_inf - s_t
        return np.where(x >= 0.0, positive, (-1.0) ** m * positive)

    def _abs_positive(self, lo, hi):
        """int_lo^hi x^p |sin(1/x)| dx for 0 <= lo < hi."""
        q = self.power + 2.0
        t_lo = 1.0 / hi
        t_hi = np.inf if lo == 0.0 else 1.0 / lo
        k0 = int(np.floor(t_lo / np.pi))
        k_end = k0 + _HALF_PERIODS
        if np.isfinite(t_hi):
            k_end = min(k_end, int(np.floor(t_hi / np.pi)))
        ks = np.arange(k0, k_end + 1)
        a = np.maximum(ks * np.pi, t_lo)
        b = np.minimum((ks + 1) * np.pi, t_hi)
        keep = b > a
        total = gauss_moments(lambda t: t ** -q * np.abs(np.sin(t)), a[keep], b[keep])[0].sum()
        tail = (k_end + 1) * np.pi
        if tail < t_hi:
            upper = 0.0 if not np.isfinite(t_hi) else t_hi ** (1.0 - q)
            total += (2.0 / np.pi) * (tail ** (1.0 - q) - upper) / (q - 1.0)
        return float(total)

    def abs_mass_ball(self, center, radius):
        lo, hi = center - radius, center + radius
        total = 0.0
        if hi > 0.0:
            total += self._abs_positive(max(lo, 0.0), hi)
        if lo < 0.0:
            total += self._abs_positive(max(-hi, 0.0), -lo)
        return total


class CallableDensity(Density):
    """Density wrapping a vectorized callable."""

    def __init__(self, func, name="callable", singular_points=(), breakpoints=None, support=None,
                 growth=None, nonnegative=False):
        self.func = func
        self.name = name
        self.singular_points = tuple(singular_points)
        self._breakpoints = breakpoints
        if support is not None:
            self.support = tuple(support)
        if growth is not None:
            self.growth = growth
        self.nonnegative = nonnegative

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def breakpoints(self, lo, hi):
        extra = [] if self._breakpoints is None else [p for p in self._breakpoints(lo, hi) if lo < p < hi]
        return sorted(set(super().breakpoints(lo, hi)) | set(extra))


class SampledDensity(Density):
    """Piecewise-linear (or step) density given by samples on nodes; zero outside."""

    def __init__(self, nodes, values, mode="linear", name="sampled"):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.mode = mode
        self.name = name
        self.support = (float(self.nodes[0]), float(self.nodes[-1]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.mode == "step":
            idx = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.values.size - 1)
            return np.where((x >= self.nodes[0]) & (x < self.nodes[-1]), self.values[idx], 0.0)
        return np.interp(x, self.nodes, self.values, left=0.0, right=0.0)

    def breakpoints(self, lo, hi):
        inside = self.nodes[(self.nodes > lo) & (self.nodes < hi)]
        return list(inside)


class ProductDensity(MeasureBase):
    """Separable two-dimensional density g1(x1) g2(x2)."""

    dimension = 2

    def __init__(self, first, second):
        self.factors = (first, second)
        self.name = f"{first.name}*{second.name}"
        self.growth = Growth("polynomial", first.growth.order + second.growth.order)
        self.nonnegative = first.nonnegative and second.nonnegative

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return self.factors[0](pts[..., 0]) * self.factors[1](pts[..., 1])

    def integrate_test(self, psi, order, center, scale):
        order = order if isinstance(order, tuple) else (order, 0)
        if psi.factors:
            return (self.factors[0].integrate_test(psi.factors[0], order[0], center[0], scale)
                    * self.factors[1].integrate_test(psi.factors[1], order[1], center[1], scale))
        raise ValueError("Product densities pair only with tensor-product test functions")

    def mass(self, lo, hi):
        return self.factors[0].mass(lo[0], hi[0]) * self.factors[1].mass(lo[1], hi[1])

    def abs_mass_ball(self, center, radius):
        c0, c1 = center

        def integrand(y, x):
            return abs(float(self(np.array([x, y]))))

        def lower(x):
            return c1 - np.sqrt(max(radius ** 2 - (x - c0) ** 2, 0.0))

        def upper(x):
            return c1 + np.sqrt(max(radius ** 2 - (x - c0) ** 2, 0.0))

        value, _ = integrate.dblquad(integrand, c0 - radius, c0 + radius, lower, upper)
        return float(value)


class AtomicMeasure(MeasureBase):
    """Finite sum of weighted point masses."""

    kind = "atomic"

    def __init__(self, points, weights=None, name="atomic"):
        pts = np.asarray(points, dtype=float)
        self.dimension = 1 if pts.ndim == 1 else pts.shape[-1]
        self.points = pts.reshape(-1) if self.dimension == 1 else pts.reshape(-1, self.dimension)
        count = self.points.shape[0]
        self.weights = np.ones(count) if weights is None else np.asarray(weights, dtype=complex)
        if self.weights.shape[0] != count:
            raise ValueError("Atomic measure needs one weight per point")
        if np.all(np.imag(self.weights) == 0.0):
            self.weights = np.real(self.weights)
        self.name = name
        self.nonnegative = bool(np.all(np.real(self.weights) >= 0.0) and np.all(np.imag(self.weights) == 0.0))

    def integrate_test(self, psi, order, center, scale):
        shifted = (self.points - np.asarray(center, dtype=float)) / scale
        return np.dot(self.weights, np.atleast_1d(psi.evaluate(shifted, order)))

    def _inside_box(self, lo, hi):
        if self.dimension == 1:
            return (self.points >= lo) & (self.points <= hi)
        return np.all((self.points >= np.asarray(lo)) & (self.points <= np.asarray(hi)), axis=1)

    def mass(self, lo, hi):
        return np.sum(self.weights[self._inside_box(lo, hi)])

    def abs_mass_ball(self, center, radius):
        offsets = self.points - np.asarray(center, dtype=float)
        dist = np.abs(offsets) if self.dimension == 1 else np.linalg.norm(offsets, axis=1)
        return float(np.sum(np.abs(self.weights[dist <= radius])))


class CantorMeasure(MeasureBase):
    """Middle-thirds Cantor measure on [0, 1], known through its CDF."""

    kind = "singular_cdf"
    name = "cantor"
    nonnegative = True

    def __init__(self, level=CANTOR_LEVEL):
        self.level = int(level)
        left = np.zeros(1)
        for i in range(1, self.level + 1):
            left = np.concatenate([left, left + 2.0 * 3.0 ** -i])
        self.midpoints = left + 0.5 * 3.0 ** -self.level
        self.weights = np.full(self.midpoints.size, 2.0 ** -self.level)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        y = np.clip(x, 0.0, 1.0)
        result = np.zeros_like(y)
        done = np.zeros(y.shape, dtype=bool)
        factor = 0.5
        for _ in range(52):
            y = 3.0 * y
            digit = np.clip(np.floor(y), 0.0, 2.0)
            y = y - digit
            result += np.where(~done & (digit >= 1.0), factor, 0.0)
            done |= digit == 1.0
            factor *= 0.5
        result = np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, result))
        return result if result.ndim else float(result)

    def integrate_test(self, psi, order, center, scale):
        return stieltjes_sum(lambda p: psi.evaluate((p - center) / scale, order), self.midpoints, self.weights)

    def mass(self, lo, hi):
        return float(self.cdf(hi) - self.cdf(lo))

    def abs_mass_ball(self, center, radius):
        return self.mass(center - radius, center + radius)


def density_from_test_function(psi):
    """View a one-dimensional test function as a density."""
    window = psi.window()
    return CallableDensity(lambda x: psi.evaluate(x), name=psi.name, support=window)

