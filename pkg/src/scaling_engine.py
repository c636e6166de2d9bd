"""
Scaling functions built from finite two-scale filters by the cascade algorithm.

Tables live on the dyadic grid 2^-J * [0, N-1]. Between nodes the table is
interpolated linearly; length-2 filters use left-closed steps instead, so the
Haar box function is represented exactly.
"""
import os
from dataclasses import dataclass, replace

import numpy as np
import pywt

from src.config import (
    BUILTIN_FILTERS,
    CASCADE_ITERATIONS,
    CERTIFIED_REGULARITY,
    DEFAULT_DEPTH,
    FILTER_TOL,
    TOL_CASCADE,
)
from src.errors import InvalidFilter, NonConvergent, OrderTooHigh
from src.logger import get_logger

logger = get_logger("ScalingEngine")

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class FilterBank:
    """Low-pass two-scale filter h_0..h_{N-1} with an identifying name."""

    name: str
    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if len(self.coefficients) < 2:
            raise InvalidFilter(f"Filter '{self.name}' needs at least two coefficients")

    @property
    def length(self):
        return len(self.coefficients)

    @property
    def support_length(self):
        return self.length - 1

    def as_array(self):
        return np.asarray(self.coefficients, dtype=float)

    def invariant_violation(self):
        """Largest violation of the sum rule and of shift orthonormality."""
        h = self.as_array()
        n = h.size
        worst = abs(h.sum() - SQRT2)
        for m in range((n + 1) // 2):
            overlap = float(np.dot(h[: n - 2 * m], h[2 * m:]))
            worst = max(worst, abs(overlap - (1.0 if m == 0 else 0.0)))
        return worst

    def validate(self, tol=FILTER_TOL):
        violation = self.invariant_violation()
        if violation > tol:
            raise InvalidFilter(
                f"Filter '{self.name}' violates the sum rule or shift orthonormality by {violation:.3e}"
            )
        return self

    @classmethod
    def from_file(cls, path):
        """Read a filter file: a name line followed by one coefficient per line."""
        with open(path, encoding="utf-8") as handle:
            lines = [ln.strip() for ln in handle if ln.strip() and not ln.strip().startswith("#")]
        if len(lines) < 3:
            raise InvalidFilter(f"Filter file '{path}' needs a name line and at least two coefficients")
        try:
            coefficients = [float(token) for token in lines[1:]]
        except ValueError as exc:
            raise InvalidFilter(f"Filter file '{path}' has a non-numeric coefficient: {exc}") from exc
        return cls(name=lines[0], coefficients=tuple(coefficients))


def builtin_filter(name):
    """Return one of the built-in filters ("haar", "d4", "d6", "d8")."""
    key = name.lower()
    if key not in BUILTIN_FILTERS:
        raise InvalidFilter(f"Unknown filter '{name}'. Available: {', '.join(sorted(BUILTIN_FILTERS))}")
    wavelet = pywt.Wavelet(BUILTIN_FILTERS[key])
    return FilterBank(name=key, coefficients=tuple(wavelet.rec_lo))


def load_filter(name_or_path):
    if os.path.isfile(name_or_path):
        return FilterBank.from_file(name_or_path)
    return builtin_filter(name_or_path)


@dataclass(frozen=True, eq=False)
class ScalingFunction:
    """Immutable dyadic tables of a scaling function and its derivatives.

    Attributes:
        filter: The two-scale filter the tables were built from.
        depth: Dyadic depth J, grid spacing 2^-J.
        values: phi on the nodes 0, 2^-J, ..., N-1.
        derivative_tables: phi^(k) tables for k = 1..regularity.
        derivative_approximate: True when derivatives come from finite differences.
        regularity: Certified smoothness order r.
        interpolation: "linear" or "step".
        two_scale_residual: Sup-norm refinement residual on the nodes.
        dimension: 1, or 2 for the tensor product.
    """

    filter: FilterBank
    depth: int
    values: np.ndarray
    derivative_tables: tuple
    derivative_approximate: bool
    regularity: int
    interpolation: str
    two_scale_residual: float
    dimension: int = 1

    def __post_init__(self):
        self.values.setflags(write=False)
        for table in self.derivative_tables:
            table.setflags(write=False)

    @property
    def support_length(self):
        return self.filter.support_length

    @property
    def scale(self):
        return 2 ** self.depth

    @property
    def step(self):
        return 1.0 / self.scale

    @property
    def grid(self):
        return np.arange(self.values.size) * self.step

    @property
    def support(self):
        return (0.0, float(self.support_length))

    def table(self, order):
        """Return the dyadic table of phi^(order) (1-D order)."""
        if order > self.regularity:
            raise OrderTooHigh(
                f"Derivative order {order} exceeds regularity {self.regularity} of '{self.filter.name}'"
            )
        if order == 0:
            return self.values
        return self.derivative_tables[order - 1]

    def interpolate(self, table, x):
        """Evaluate a dyadic table at arbitrary 1-D points; zero outside the support."""
        x = np.asarray(x, dtype=float)
        t = x * self.scale
        last = table.size - 1
        if self.interpolation == "step":
            inside = (t >= 0) & (t < last)
            idx = np.clip(np.floor(t), 0, last).astype(int)
            out = np.where(inside, table[idx], 0.0)
        else:
            inside = (t >= 0) & (t <= last)
            idx = np.clip(np.floor(t), 0, last - 1).astype(int)
            frac = t - idx
            out = np.where(inside, table[idx] * (1.0 - frac) + table[idx + 1] * frac, 0.0)
        return out if out.ndim else float(out)


def _integer_values(c, eigenvalue):
    """Values at the integers from the refinement matrix eigenvector, or None."""
    n = c.size
    if n == 2:
        return np.array([1.0, 0.0]) if eigenvalue == 1.0 else None
    interior = np.arange(1, n - 1)
    k = 2 * interior[:, None] - interior[None, :]
    matrix = np.where((k >= 0) & (k < n), c[np.clip(k, 0, n - 1)], 0.0)
    eigvals, eigvecs = np.linalg.eig(matrix)
    pick = int(np.argmin(np.abs(eigvals - eigenvalue)))
    if abs(eigvals[pick] - eigenvalue) > 1e-8:
        return None
    full = np.zeros(n)
    full[1:-1] = np.real(eigvecs[:, pick])
    if eigenvalue == 1.0:
        norm = full.sum()
    else:
        norm = -np.dot(np.arange(n), full)
    if abs(norm) < 1e-14:
        return None
    return full / norm


def _refine(table, c, scale, factor):
    """One cascade step: factor * sum_k c_k table(2x - k) on the dyadic nodes."""
    n = table.size
    idx = 2 * np.arange(n)[:, None] - np.arange(c.size)[None, :] * scale
    valid = (idx >= 0) & (idx < n)
    gathered = np.where(valid, table[np.clip(idx, 0, n - 1)], 0.0)
    return factor * (gathered @ c)


def _iterate(table, c, scale, iterations, tol, factor, label):
    diff = np.inf
    for _ in range(iterations):
        refined = _refine(table, c, scale, factor)
        diff = float(np.max(np.abs(refined - table)))
        table = refined
        if diff <= tol * max(1.0, float(np.max(np.abs(table)))):
            return table, diff
    raise NonConvergent(f"Cascade for {label} still moves by {diff:.3e} after {iterations} iterations")


def _initial_table(integer, nodes, step_mode):
    if step_mode:
        return integer[np.floor(nodes).astype(int)]
    return np.interp(nodes, np.arange(integer.size), integer)


def _derivative_table(c, values, nodes, scale, iterations, tol):
    """Differentiated cascade, falling back to centered differences of the phi table."""
    integer = _integer_values(c, 0.5)
    if integer is None:
        logger.warning("No derivative eigenvector at the integers; using finite differences")
        return np.gradient(values, 1.0 / scale), True
    try:
        table, _ = _iterate(_initial_table(integer, nodes, False), c, scale, iterations, tol, 2.0, "phi'")
    except NonConvergent as exc:
        logger.warning(f"{exc}; using finite differences")
        return np.gradient(values, 1.0 / scale), True
    return table, False


def cascade_build(filter_bank, depth=DEFAULT_DEPTH, iterations=CASCADE_ITERATIONS, *,
                  tol=TOL_CASCADE, regularity=None, validate=True):
    """Build the scaling function of `filter_bank` on the 2^-depth grid.

    Args:
        filter_bank: FilterBank to refine.
        depth: Dyadic depth J (>= 4).
        iterations: Maximum cascade iterations.
        tol: Settling tolerance for successive iterates.
        regularity: Certified order r; defaults to the built-in table (0 for unknown filters).
        validate: Check the filter invariants first.

    Returns:
        ScalingFunction with value and derivative tables.
    """
    if depth < 4:
        raise ValueError(f"Dyadic depth must be at least 4, got {depth}")
    if iterations < 1:
        raise ValueError(f"Iterations must be positive, got {iterations}")
    if validate:
        filter_bank.validate()
    if regularity is None:
        regularity = CERTIFIED_REGULARITY.get(filter_bank.name.lower(), 0)
    if regularity > 1:
        raise ValueError(f"Certified regularity {regularity} is not supported (at most 1)")

    c = SQRT2 * filter_bank.as_array()
    scale = 2 ** depth
    step_mode = filter_bank.length == 2
    nodes = np.arange(filter_bank.support_length * scale + 1) / scale

    integer = _integer_values(c, 1.0)
    if integer is None:
        raise NonConvergent(f"Filter '{filter_bank.name}' has no refinable integer values")
    values, residual = _iterate(_initial_table(integer, nodes, step_mode), c, scale, iterations, tol, 1.0, "phi")

    derivative_tables = ()
    approximate = False
    if regularity >= 1:
        derivative, approximate = _derivative_table(c, values, nodes, scale, iterations, tol)
        derivative_tables = (derivative,)

    logger.info(
        f"Built '{filter_bank.name}' at depth {depth}: residual {residual:.2e}, regularity {regularity}"
        + (" (approximate derivatives)" if approximate else "")
    )
    return ScalingFunction(
        filter=filter_bank,
        depth=depth,
        values=values,
        derivative_tables=derivative_tables,
        derivative_approximate=approximate,
        regularity=regularity,
        interpolation="step" if step_mode else "linear",
        two_scale_residual=residual,
    )


def _as_order(sf, order):
    order = (int(order),) if np.isscalar(order) else tuple(int(k) for k in order)
    if len(order) != sf.dimension:
        raise ValueError(f"Order {order} does not match dimension {sf.dimension}")
    if sum(order) > sf.regularity:
        raise OrderTooHigh(
            f"Derivative order {sum(order)} exceeds regularity {sf.regularity} of '{sf.filter.name}'"
        )
    return order


def eval_phi_deriv(sf, x, order):
    """phi^(order)(x); x has a trailing axis of length 2 in two dimensions."""
    order = _as_order(sf, order)
    if sf.dimension == 1:
        return sf.interpolate(sf.table(order[0]), x)
    pts = np.asarray(x, dtype=float)
    out = sf.interpolate(sf.table(order[0]), pts[..., 0]) * sf.interpolate(sf.table(order[1]), pts[..., 1])
    return out if np.ndim(out) else float(out)


def eval_phi(sf, x):
    return eval_phi_deriv(sf, x, (0,) * sf.dimension)


def _autocorrelation(values, scale, shift_range):
    n = values.size
    out = np.zeros(len(shift_range))
    for pos, m in enumerate(shift_range):
        shift = m * scale
        if abs(shift) >= n:
            continue
        if shift >= 0:
            out[pos] = np.dot(values[shift:], values[: n - shift])
        else:
            out[pos] = np.dot(values[: n + shift], values[-shift:])
    return out / scale


def orthonormality_check(sf):
    """Max deviation of <phi, phi(. - m)> from delta_m0 over |m| <= N.

    Dyadic Riemann sums, Richardson-extrapolated between depths J and J-1 for
    continuous tables.
    """
    shifts = list(range(-sf.filter.length, sf.filter.length + 1))
    gram = _autocorrelation(sf.values, sf.scale, shifts)
    if sf.interpolation == "linear":
        coarse = _autocorrelation(sf.values[::2], sf.scale // 2, shifts)
        gram = (4.0 * gram - coarse) / 3.0
    identity = np.array([1.0 if m == 0 else 0.0 for m in shifts])
    if sf.dimension == 2:
        return float(np.max(np.abs(np.outer(gram, gram) - np.outer(identity, identity))))
    return float(np.max(np.abs(gram - identity)))


def two_scale_residual(sf):
    """sup over the nodes of |phi(x) - sqrt2 sum_k h_k phi(2x - k)|."""
    c = SQRT2 * sf.filter.as_array()
    return float(np.max(np.abs(_refine(sf.values, c, sf.scale, 1.0) - sf.values)))


def partition_of_unity_deviation(sf, samples=1000):
    x = np.linspace(0.0, 1.0, samples)
    reach = sf.filter.length + 2
    total = sum(sf.interpolate(sf.values, x - m) for m in range(-reach, reach + 1))
    return float(np.max(np.abs(total - 1.0)))


def integral(sf):
    """Dyadic quadrature of phi (exact for the interpolated table)."""
    one_d = float(np.sum(sf.values)) / sf.scale
    return one_d ** sf.dimension


def tensorize(sf):
    """Tensor-product scaling function Phi(x1, x2) = phi(x1) phi(x2)."""
    if sf.dimension != 1:
        raise ValueError("Only one-dimensional scaling functions can be tensorized")
    return replace(sf, dimension=2)
