"""
Reproducing kernel q0(x, y) = sum_m phi(x - m) phi(y - m) and its rescalings q_{lambda,z}.

Every lattice sum is finite: only the L + 1 shifts with x - m in [0, L] can
contribute, L being the support length of phi.
"""
from dataclasses import dataclass, replace

import numpy as np

from src.densities import MonomialDensity
from src.growth_spaces import DecayClass, TestFunction
from src.quadrature import PiecewiseProfile


@dataclass(frozen=True, eq=False)
class ReproducingKernel:
    sf: object

    @property
    def dimension(self):
        return self.sf.dimension

    @property
    def regularity(self):
        return self.sf.regularity

    @property
    def support_length(self):
        return self.sf.support_length

    @property
    def truncation_radius(self):
        return self.sf.support_length + 1

    def axis(self):
        """One-dimensional kernel of a tensor-product kernel."""
        return self if self.dimension == 1 else ReproducingKernel(replace(self.sf, dimension=1))


def _q0_axis(K, x, y, ax, by):
    sf = K.sf
    tx = sf.table(ax)
    ty = sf.table(by)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = np.floor(x)
    total = np.zeros(np.broadcast(x, y).shape)
    for offset in range(sf.support_length + 1):
        m = base - offset
        total = total + sf.interpolate(tx, x - m) * sf.interpolate(ty, y - m)
    return total


def _split_order(K, order):
    if np.isscalar(order):
        return (int(order),) + (0,) * (K.dimension - 1)
    return tuple(int(k) for k in order)


def q0_deriv_eval(K, x, y, ax, by):
    """d^ax_x d^by_y q0(x, y) by termwise differentiation of the lattice sum."""
    ax = _split_order(K, ax)
    by = _split_order(K, by)
    if K.dimension == 1:
        out = _q0_axis(K, x, y, ax[0], by[0])
    else:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = (_q0_axis(K, x[..., 0], y[..., 0], ax[0], by[0])
               * _q0_axis(K, x[..., 1], y[..., 1], ax[1], by[1]))
    return out if np.ndim(out) else float(out)


def q0_eval(K, x, y):
    zero = (0,) * K.dimension
    return q0_deriv_eval(K, x, y, zero, zero)


def q_lambda_z_eval(K, lam, z, x, y):
    """2^{n lambda} q0(2^lambda x + z, 2^lambda y + z)."""
    factor = 2.0 ** lam
    return factor ** K.dimension * q0_eval(
        K, factor * np.asarray(x, dtype=float) + z, factor * np.asarray(y, dtype=float) + z
    )


def decay_envelope_fit(K, l, pairs=None, weight=None, ax=0, by=0):
    """Smallest C with |d^ax d^by q0(x, y)| <= C w(|x - y|) over the sample.

    w is exp(-M(l|x-y|)) when a GrowthWeight is given, else (1+|x-y|)^-l.
    """
    if pairs is None:
        reach = K.support_length + 2
        xs = np.linspace(0.0, 1.0, 41)
        ds = np.linspace(-reach, reach, 161)
        pairs = np.array([(x, x + d) for x in xs for d in ds])
    pairs = np.asarray(pairs, dtype=float)
    if K.dimension == 1:
        x, y = pairs[:, 0], pairs[:, 1]
        dist = np.abs(x - y)
    else:
        x, y = pairs[:, 0, :], pairs[:, 1, :]
        dist = np.linalg.norm(x - y, axis=-1)
    values = np.abs(q0_deriv_eval(K, x, y, ax, by))
    inverse_weight = np.exp(weight(l * dist)) if weight is not None else (1.0 + dist) ** l
    return float(np.max(values * inverse_weight))


def kernel_profile(K, X):
    """y -> q0(X, y) (and its y-derivatives) as an exact piecewise profile, 1-D."""
    sf = K.axis().sf
    length = sf.support_length
    scale = sf.scale
    ms = np.floor(X) - np.arange(length + 1)
    coeffs = np.atleast_1d(sf.interpolate(sf.values, X - ms))
    lo_m = int(ms.min())
    count = (int(ms.max()) - lo_m + length) * scale + 1
    width = length * scale + 1
    tables = []
    for order in range(sf.regularity + 1):
        table = np.zeros(count)
        source = sf.table(order)
        for m, c in zip(ms.astype(int), coeffs):
            if c != 0.0:
                start = (m - lo_m) * scale
                table[start:start + width] += c * source
        tables.append(table)
    nodes = lo_m + np.arange(count) / scale
    return PiecewiseProfile(nodes=nodes, values=tuple(tables), mode=sf.interpolation)


def _compact(profile):
    return DecayClass("compact", center=0.5 * (profile.lo + profile.hi), radius=0.5 * (profile.hi - profile.lo))


def kernel_testfn(K, lam, z, x):
    """y -> q_{lambda,z}(x, y) as a TestFunction (tensor product in two dimensions)."""
    if K.dimension == 2:
        axis = K.axis()
        z = np.broadcast_to(np.asarray(z, dtype=float), (2,))
        return kernel_testfn(axis, lam, z[0], x[0]).tensor(kernel_testfn(axis, lam, z[1], x[1]))
    factor = 2.0 ** lam
    profile = kernel_profile(K, factor * x + z).affine(-z / factor, 1.0 / factor, factor)
    return TestFunction(name=f"q[{lam:g},{z:g}]({x:g},.)", decay=_compact(profile), profile=profile)


def kernel_slice_testfn(K, lam, z, x0):
    """y -> q0(2^lambda x0 + z, 2^lambda x0 + z + y), compactly supported with integral 1."""
    if K.dimension == 2:
        axis = K.axis()
        z = np.broadcast_to(np.asarray(z, dtype=float), (2,))
        return kernel_slice_testfn(axis, lam, z[0], x0[0]).tensor(kernel_slice_testfn(axis, lam, z[1], x0[1]))
    # q0 is invariant under diagonal integer shifts, so only the fractional part matters.
    X = float(np.mod(2.0 ** lam * x0 + z, 1.0))
    profile = kernel_profile(K, X).affine(-X, 1.0)
    return TestFunction(name=f"slice[{lam:g}]({x0:g})", decay=_compact(profile), profile=profile)


def slice_matrix(K, X):
    """Rows q0(X_p, Y_j) for X_p in [0, 1) on the common dyadic nodes Y_j, 1-D."""
    sf = K.axis().sf
    length = sf.support_length
    scale = sf.scale
    X = np.asarray(X, dtype=float)
    offsets = np.arange(length + 1)
    coeffs = sf.interpolate(sf.values, X[:, None] + offsets[None, :])
    nodes = np.arange(-length * scale, length * scale + 1) / scale
    shifted = np.stack([sf.interpolate(sf.values, nodes + o) for o in offsets])
    return nodes, coeffs @ shifted


def polynomial_reproduction_residual(K, degree, xs):
    """max_x |int q0(x, y) y^k dy - x^k| with exact cell moments."""
    monomial = MonomialDensity(degree)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    residuals = [
        abs(monomial.integrate_profile(kernel_profile(K, x), 0, 0.0, 1.0) - x ** degree) for x in xs
    ]
    return float(max(residuals))
