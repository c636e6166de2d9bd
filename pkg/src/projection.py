"""
Multiresolution projections (q_{lambda,z} f)(x) = <f(y), q_{lambda,z}(x, y)>_y.

Two evaluation paths exist: pairing f with the kernel slice y -> q_{lambda,z}(x, y)
and the rescaled pairing <f(x + 2^-lambda u), q0(X, X + u)>_u with X = 2^lambda x + z.
Resampling goes through scaling coefficients c_m = 2^lambda <f, phi(2^lambda . + z - m)>,
so that q_{lambda,z} f = sum_m c_m phi(2^lambda . + z - m).
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.config import FLOAT_FORMAT, MRDIST_THREADS
from src.densities import Density, SampledDensity, density_from_test_function
from src.errors import OrderTooHigh
from src.generalized_functions import from_density, pair, pair_scaled
from src.growth_spaces import DecayClass, TestFunction
from src.kernel import kernel_slice_testfn, kernel_testfn
from src.logger import get_logger
from src.quadrature import GL_NODES, GL_WEIGHTS, PiecewiseProfile

logger = get_logger("Projection")

_COEFFICIENT_CHUNK = 64


def _check_order(f, K):
    if f.order > K.regularity:
        raise OrderTooHigh(
            f"Distribution '{f.name}' of order {f.order} needs kernel regularity {f.order}, "
            f"'{K.sf.filter.name}' has {K.regularity}"
        )


def project_at(f, K, lam, z, x, path="kernel"):
    """(q_{lambda,z} f)(x) by pairing f with y -> q_{lambda,z}(x, y)."""
    if path == "rescaled":
        return project_at_rescaled(f, K, lam, z, x)
    if path != "kernel":
        raise ValueError(f"Unknown evaluation path '{path}'")
    _check_order(f, K)
    return pair(f, kernel_testfn(K, lam, z, x))


def project_at_rescaled(f, K, lam, z, x):
    """(q_{lambda,z} f)(x) = <f(x + 2^-lambda u), q0(X, X + u)>_u."""
    _check_order(f, K)
    return pair_scaled(f, x, 2.0 ** -lam, kernel_slice_testfn(K, lam, z, x))


@dataclass(frozen=True)
class ProjectionSequence:
    """Values (q_lambda f)(x0) along an increasing lambda grid."""

    name: str
    x0: object
    z: object
    lambdas: tuple
    values: tuple

    def __post_init__(self):
        lambdas = np.asarray(self.lambdas, dtype=float)
        if lambdas.size > 1 and np.any(np.diff(lambdas) <= 0):
            raise ValueError("Lambda grid must be strictly increasing")
        if not np.all(np.isfinite(np.asarray(self.values, dtype=complex))):
            raise ValueError(f"Projection of '{self.name}' produced non-finite values")

    @property
    def differences(self):
        """|v_k - v_{k-1}|, NaN for the first entry."""
        values = np.asarray(self.values, dtype=complex)
        return np.concatenate(([np.nan], np.abs(np.diff(values))))

    def cauchy_spread(self, tail=4):
        """max |v_i - v_j| over the last `tail` values."""
        values = np.asarray(self.values[-tail:], dtype=complex)
        return float(np.max(np.abs(values[:, None] - values[None, :])))

    def to_frame(self):
        values = np.asarray(self.values, dtype=complex)
        return pd.DataFrame({
            "lambda": np.asarray(self.lambdas, dtype=float),
            "re": values.real,
            "im": values.imag,
            "abs_diff": self.differences,
        })

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)

    def to_dict(self):
        values = np.asarray(self.values, dtype=complex)
        return {
            "name": self.name,
            "lambdas": [float(v) for v in self.lambdas],
            "re": values.real.tolist(),
            "im": values.imag.tolist(),
            "cauchy_spread": self.cauchy_spread(min(4, len(self.values))),
        }


def expansion_sequence(f, K, x0, z, lambdas, path="kernel", n_jobs=MRDIST_THREADS):
    """project_at over a lambda grid, in grid order."""
    lambdas = tuple(float(v) for v in lambdas)
    values = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(project_at)(f, K, lam, z, x0, path) for lam in lambdas
    )
    sequence = ProjectionSequence(f.name, x0, z, lambdas, tuple(complex(v) for v in values))
    logger.info(f"Expansion of '{f.name}' at {x0}: last value {sequence.values[-1]:.6g}")
    return sequence


def _phi_profile(sf):
    tables = tuple(sf.table(k) for k in range(sf.regularity + 1))
    return PiecewiseProfile(nodes=sf.grid, values=tables, mode=sf.interpolation)


def basis_testfn(K, lam, z, m):
    """y -> 2^lambda phi(2^lambda y + z - m)."""
    factor = 2.0 ** lam
    profile = _phi_profile(K.axis().sf).affine((m - z) / factor, 1.0 / factor, factor)
    decay = DecayClass("compact", center=0.5 * (profile.lo + profile.hi), radius=0.5 * (profile.hi - profile.lo))
    return TestFunction(name=f"phi[{lam:g},{z:g}]_{m}", decay=decay, profile=profile)


def _smooth_density(f):
    """The single smooth order-0 density term of f, or None."""
    if len(f.terms) != 1:
        return None
    term = f.terms[0]
    base = term.base
    smooth = (isinstance(base, Density) and term.degree == 0 and not base.singular_points
              and base.oscillation_period(0.0) is None and base.breakpoints(-np.inf, np.inf) == [])
    return term if smooth else None


def _smooth_coefficients(term, sf, lam, z, ms):
    """c_m = int phi(t) g((t + m - z) / 2^lambda) dt with Gauss-Legendre on every table cell."""
    nodes = sf.grid
    half = 0.5 * np.diff(nodes)
    t = (0.5 * (nodes[:-1] + nodes[1:]))[:, None] + half[:, None] * GL_NODES[None, :]
    weights = (half[:, None] * GL_WEIGHTS[None, :] * sf.interpolate(sf.values, t)).ravel()
    t = t.ravel()
    factor = 2.0 ** lam
    lo, hi = term.base.support
    out = np.empty(ms.size, dtype=complex)
    for start in range(0, ms.size, _COEFFICIENT_CHUNK):
        chunk = ms[start:start + _COEFFICIENT_CHUNK]
        x = (t[None, :] + chunk[:, None] - z) / factor - term.shift
        inside = (x >= lo) & (x <= hi)
        out[start:start + chunk.size] = term.weight * ((term.base(x) * inside) @ weights)
    return out


def scaling_coefficients(f, K, lam, z, ms):
    """c_m = 2^lambda <f, phi(2^lambda . + z - m)> for the integers ms."""
    if f.dimension != 1:
        raise ValueError("Scaling coefficients are available in one dimension")
    _check_order(f, K)
    ms = np.asarray(ms, dtype=int)
    sf = K.axis().sf
    term = _smooth_density(f)
    if term is not None:
        coefficients = _smooth_coefficients(term, sf, lam, z, ms)
        if f.constant != 0:
            coefficients = coefficients + f.constant * np.sum(sf.values) / sf.scale
        return coefficients
    return np.array([pair(f, basis_testfn(K, lam, z, int(m))) for m in ms], dtype=complex)


@dataclass(frozen=True, eq=False)
class ProjectedFunction:
    """q_{lambda,z} f on a window, as sum_m c_m phi(2^lambda x + z - m)."""

    K: object
    lam: float
    z: float
    first_index: int
    coefficients: np.ndarray
    window: tuple

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.window[0]) or np.any(x > self.window[1]):
            raise ValueError(f"Points outside the projection window {self.window}")
        sf = self.K.axis().sf
        X = 2.0 ** self.lam * x + self.z
        base = np.floor(X).astype(int)
        total = np.zeros(x.shape, dtype=complex)
        for offset in range(sf.support_length + 1):
            m = base - offset
            idx = np.clip(m - self.first_index, 0, self.coefficients.size - 1)
            total = total + self.coefficients[idx] * sf.interpolate(sf.values, X - m)
        return total if total.ndim else complex(total)

    def nodes(self):
        """Points of the window where 2^lambda x + z lies on the dyadic table grid."""
        sf = self.K.axis().sf
        factor = 2.0 ** self.lam
        lo = int(np.ceil((factor * self.window[0] + self.z) * sf.scale))
        hi = int(np.floor((factor * self.window[1] + self.z) * sf.scale))
        return np.clip((np.arange(lo, hi + 1) / sf.scale - self.z) / factor, *self.window)

    def _real_samples(self):
        nodes = self.nodes()
        values = self.evaluate(nodes)
        if np.any(np.abs(values.imag) > 0.0):
            raise ValueError("Resampling needs a real projection")
        return nodes, values.real

    def as_density(self):
        nodes, values = self._real_samples()
        return SampledDensity(nodes, values, mode=self.K.axis().sf.interpolation,
                              name=f"q[{self.lam:g}]")

    def as_test_function(self):
        nodes, values = self._real_samples()
        profile = PiecewiseProfile(nodes=nodes, values=(values,), mode=self.K.axis().sf.interpolation)
        decay = DecayClass("compact", center=0.5 * (nodes[0] + nodes[-1]), radius=0.5 * (nodes[-1] - nodes[0]))
        return TestFunction(name=f"q[{self.lam:g}]psi", decay=decay, profile=profile)


def expand(f, K, lam, z, window):
    """q_{lambda,z} f on `window` through its scaling coefficients."""
    sf = K.axis().sf
    factor = 2.0 ** lam
    first = int(np.floor(factor * window[0] + z)) - sf.support_length
    last = int(np.floor(factor * window[1] + z))
    ms = np.arange(first, last + 1)
    return ProjectedFunction(K, float(lam), float(z), first, scaling_coefficients(f, K, lam, z, ms),
                             (float(window[0]), float(window[1])))


def projected_density(f, K, lam, z, window):
    """q_{lambda,z} f as an order-0 distribution supported on `window`."""
    density = expand(f, K, lam, z, window).as_density()
    return from_density(density)


def _margin(K, lam):
    return (K.support_length + 1) * 2.0 ** -lam


def idempotence_check(f, K, lam, points, z=0.0, inner_lam=None):
    """max |q_lambda(q_inner f) - q_lambda f| over the points, inner_lam >= lam (default lam)."""
    inner_lam = lam if inner_lam is None else inner_lam
    if inner_lam < lam:
        raise ValueError(f"Nested projection needs inner level >= {lam}, got {inner_lam}")
    points = np.atleast_1d(np.asarray(points, dtype=float))
    margin = _margin(K, lam)
    window = (points.min() - margin, points.max() + margin)
    resampled = projected_density(f, K, inner_lam, z, window)
    twice = np.array([project_at(resampled, K, lam, z, x) for x in points])
    once = np.array([project_at(f, K, lam, z, x) for x in points])
    deviation = float(np.max(np.abs(twice - once)))
    logger.info(f"Idempotence of '{f.name}' at lambda={lam:g} (inner {inner_lam:g}): {deviation:.3e}")
    return deviation


@dataclass(frozen=True)
class PoissonReport:
    j: int
    side_a: float
    side_b: float

    @property
    def relative_gap(self):
        return abs(self.side_a - self.side_b) / max(abs(self.side_a), 1e-300)

    def to_dict(self):
        return {"j": self.j, "side_a": self.side_a, "side_b": self.side_b, "relative_gap": self.relative_gap}


def delta_expansion_poisson_check(K, j):
    """(q_j delta)(0) as 2^j sum_m phi(m)^2 and through the Poisson sum of the Fourier side.

    phi_hat is the DFT of the zero-padded table; phi_hat * conj(phi_hat)(-.) is the
    circular convolution on the frequency grid 2 pi k / T, sampled at 2 pi m.
    """
    sf = K.axis().sf
    scale = sf.scale
    integers = sf.values[::scale]
    side_a = 2.0 ** j * float(np.sum(integers ** 2))

    period = sf.support_length + 1
    padded = np.zeros(period * scale)
    padded[:sf.values.size] = sf.values
    phi_hat = np.fft.fft(padded) / scale
    reflected = np.conj(np.roll(phi_hat[::-1], 1))
    step = 2.0 * np.pi / period
    convolution = step * np.fft.ifft(np.fft.fft(phi_hat) * np.fft.fft(reflected))
    side_b = 2.0 ** j * float(np.real(np.sum(convolution[::period]))) / (2.0 * np.pi)
    return PoissonReport(j=int(j), side_a=side_a, side_b=side_b)


@dataclass(frozen=True)
class DualPairingReport:
    projected_first: complex
    projected_second: complex

    @property
    def gap(self):
        return abs(self.projected_first - self.projected_second)

    def to_dict(self):
        return {
            "projected_first": [self.projected_first.real, self.projected_first.imag],
            "projected_second": [self.projected_second.real, self.projected_second.imag],
            "gap": self.gap,
        }


def dual_pairing_check(f, psi, K, lam, z=0.0):
    """<q f, psi> against <f, q psi> for a compactly supported psi."""
    lo, hi = psi.window()
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"Dual pairing needs a test function with a finite window, '{psi.name}' has none")
    margin = _margin(K, lam)
    window = (lo - margin, hi + margin)
    psi_density = density_from_test_function(psi)
    qf = expand(f, K, lam, z, window).as_test_function()
    first = pair(from_density(psi_density), qf)
    q_psi = expand(from_density(psi_density), K, lam, z, window).as_test_function()
    second = pair(f, q_psi)
    return DualPairingReport(complex(first), complex(second))


def uniform_convergence_sweep(psi, K, lambdas, zs, grid=None):
    """sup over the grid of |q_{lambda,z} psi - psi| for every (lambda, z)."""
    if grid is None:
        lo, hi = psi.window()
        grid = np.linspace(max(lo, -4.0), min(hi, 4.0), 401)
    grid = np.asarray(grid, dtype=float)
    f = from_density(density_from_test_function(psi))
    exact = psi.evaluate(grid)
    rows = []
    for lam in lambdas:
        margin = _margin(K, lam)
        for z in zs:
            projected = expand(f, K, lam, z, (grid[0] - margin, grid[-1] + margin))
            error = float(np.max(np.abs(projected.evaluate(grid) - exact)))
            rows.append({"lambda": float(lam), "z": float(z), "sup_error": error})
    return pd.DataFrame(rows, columns=["lambda", "z", "sup_error"])

