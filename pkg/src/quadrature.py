"""
Quadrature helpers shared by pairings, kernels and projections.

Piecewise profiles are exact piecewise-linear (or left-closed step) functions
on a node set. Integrals of a density against a profile reduce to the cell
moments M0 = int g and M1 = int (x - a) g on each cell [a, b].
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from src.config import GAUSS_ORDER, GRADED_LEVELS, QUAD_EPSABS, QUAD_EPSREL, QUAD_MAX_EVALUATIONS
from src.logger import get_logger

logger = get_logger("Quadrature")

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)

# Points per QUADPACK subinterval for the 21-point Gauss-Kronrod rule.
_KRONROD_POINTS = 21
_MAX_SUBINTERVALS = 5000


@dataclass(frozen=True, eq=False)
class PiecewiseProfile:
    """Function given by node values, one table per derivative order.

    `values[k]` holds the k-th derivative at the nodes. In "linear" mode the
    tables are interpolated linearly; in "step" mode value i holds on
    [nodes[i], nodes[i+1]).
    """

    nodes: np.ndarray
    values: tuple
    mode: str = "linear"

    @property
    def max_order(self):
        return len(self.values) - 1

    @property
    def lo(self):
        return float(self.nodes[0])

    @property
    def hi(self):
        return float(self.nodes[-1])

    def evaluate(self, x, order=0):
        table = self.values[order]
        x = np.asarray(x, dtype=float)
        if self.mode == "step":
            idx = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, table.size - 1)
            out = np.where((x >= self.nodes[0]) & (x < self.nodes[-1]), table[idx], 0.0)
        else:
            out = np.interp(x, self.nodes, table, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def affine(self, shift, scale, factor=1.0):
        """Profile of u -> factor * p((u - shift) / scale), derivative tables rescaled."""
        values = tuple(factor * table / scale ** k for k, table in enumerate(self.values))
        return PiecewiseProfile(nodes=shift + scale * self.nodes, values=values, mode=self.mode)

    def integral(self, order=0):
        table = self.values[order]
        widths = np.diff(self.nodes)
        if self.mode == "step":
            return float(np.dot(table[:-1], widths))
        return float(np.dot(0.5 * (table[:-1] + table[1:]), widths))


def gauss_moments(func, a, b):
    """Per-cell (M0, M1) of func on cells [a_i, b_i] with Gauss-Legendre."""
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * GL_NODES[None, :]
    weights = half[:, None] * GL_WEIGHTS[None, :]
    g = func(x)
    return np.sum(weights * g, axis=1), np.sum(weights * g * (x - a[:, None]), axis=1)


def graded_moments(func, a, b, toward_left):
    """(M0, M1) on cells with a singular endpoint, by geometric grading toward it."""
    ratios = 2.0 ** -np.arange(GRADED_LEVELS + 1)
    m0 = np.zeros(a.size)
    m1 = np.zeros(a.size)
    for i, (lo, hi, left) in enumerate(zip(a, b, toward_left)):
        width = hi - lo
        if left:
            edges = lo + width * ratios[::-1]
            edges = np.concatenate(([lo], edges))
        else:
            edges = hi - width * ratios
            edges = np.concatenate((edges, [hi]))
        sub0, sub1 = gauss_moments(func, edges[:-1], edges[1:])
        m0[i] = sub0.sum()
        m1[i] = (sub1 + (edges[:-1] - lo) * sub0).sum()
    return m0, m1


def integrate_cells(a, b, left_values, right_values, m0, m1, mode):
    """Sum over cells [a_i, b_i] of the profile times the density, given cell moments."""
    if mode == "step":
        return float(np.dot(left_values, m0))
    slope = (right_values - left_values) / (b - a)
    return float(np.dot(left_values, m0) + np.dot(slope, m1))


def adaptive_integral(func, lo, hi, points=()):
    """Adaptive Gauss-Kronrod integral split at the given breakpoints."""
    cuts = sorted({float(lo), float(hi), *[float(p) for p in points if lo < p < hi]})
    segments = list(zip(cuts[:-1], cuts[1:]))
    limit = min(_MAX_SUBINTERVALS, max(50, QUAD_MAX_EVALUATIONS // (_KRONROD_POINTS * max(1, len(segments)))))
    total = 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        for a, b in segments:
            value, _ = integrate.quad(func, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=limit)
            total += value
    for warning in caught:
        logger.warning(f"Integral over [{lo}, {hi}] may be inaccurate: {str(warning.message).splitlines()[0]}")
    return total


def stieltjes_sum(func, points, weights):
    """Riemann-Stieltjes sum sum_i w_i f(p_i)."""
    return float(np.dot(weights, func(np.asarray(points, dtype=float))))
