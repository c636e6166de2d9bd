"""
Quasiasymptotic degree and limit extraction, projected-expansion experiments
and alpha-densities of positive measures (one dimension).
"""
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, special

from src.config import (
    AGREEMENT_ATOL,
    AGREEMENT_RTOL,
    DEGREE_MARGIN,
    LIMIT_TAIL,
    MIN_BATTERY,
    MIN_FIT_SCALES,
    MRDIST_THREADS,
    SLOPE_TOL,
    VANISH_TOL,
)
from src.densities import AbsPowerDensity
from src.errors import (
    AllPairingsVanish,
    EmptyFamily,
    EpsilonNonpositive,
    HypothesisFailed,
    InconsistentDegree,
    InsufficientScales,
    NegativeMeasure,
)
from src.generalized_functions import ball_measure, from_density, pair, pair_scaled, unit_ball_volume
from src.growth_spaces import DecayClass, TestFunction
from src.kernel import slice_matrix
from src.logger import get_logger
from src.projection import project_at
from src.quadrature import PiecewiseProfile
from src.regression import fit_log_slope

logger = get_logger("Asymptotics")

DILATIONS = (0.5, 2.0)
IDENTITY_POINTS = 2001
MAX_LEVEL = 1000
_ROW_CHUNK = 128


@dataclass(frozen=True)
class SlowlyVarying:
    """L(eps) = 1 or |log eps|^beta."""

    kind: str = "constant"
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "log_power"):
            raise ValueError(f"Unknown slowly varying model '{self.kind}'")

    @property
    def name(self):
        return "constant" if self.kind == "constant" else f"log_power({self.beta:g})"

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        if self.kind == "constant":
            out = np.ones_like(eps)
        else:
            out = np.abs(np.log(eps)) ** self.beta
        return out if out.ndim else float(out)

    def ratio_deviation(self, eps):
        """max |L(a eps)/L(eps) - 1| for a in {1/2, 2} over the grid."""
        eps = np.asarray(eps, dtype=float)
        return float(max(np.max(np.abs(self(a * eps) / self(eps) - 1.0)) for a in DILATIONS))


def omega(alpha, convention="unit_ball"):
    """Normalizing constant of the alpha-density.

    "unit_ball" is pi^(a/2) / Gamma(a/2 + 1), the volume of the unit ball when
    alpha is an integer; "printed" is pi^(a/2) Gamma(a + 1/2).
    """
    if convention == "unit_ball":
        return float(np.pi ** (alpha / 2.0) / special.gamma(alpha / 2.0 + 1.0))
    if convention == "printed":
        return float(np.pi ** (alpha / 2.0) * special.gamma(alpha + 0.5))
    raise ValueError(f"Unknown omega convention '{convention}'")


def _check_grid(eps, minimum, min_decades=0.0):
    eps = np.sort(np.asarray(eps, dtype=float))[::-1]
    if np.any(eps <= 0):
        raise EpsilonNonpositive("Every scale must be positive")
    if eps.size < minimum:
        raise InsufficientScales(f"Need at least {minimum} scales, got {eps.size}")
    span = np.log10(eps[0] / eps[-1])
    if span < min_decades - 1e-9:
        raise InsufficientScales(f"Scales span {span:.2f} decades, need {min_decades:g}")
    return eps


def _check_battery(battery):
    battery = list(battery)
    if not battery:
        raise EmptyFamily("The test battery is empty")
    if len(battery) < MIN_BATTERY:
        raise ValueError(f"A battery needs at least {MIN_BATTERY} test functions, got {len(battery)}")
    return battery


def _scaled_pairings(f, x0, eps, battery, n_jobs=MRDIST_THREADS):
    """Matrix <f(x0 + eps x), psi_i> with rows per battery member."""
    columns = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(lambda e: [pair_scaled(f, x0, e, psi) for psi in battery])(e) for e in eps
    )
    return np.asarray(columns, dtype=complex).T


@dataclass(frozen=True)
class QuasiasymptoticFit:
    x0: float
    alpha_hat: float
    L: SlowlyVarying
    eps: tuple
    battery: tuple
    slopes: tuple
    degenerate: tuple
    outliers: tuple
    g_samples: tuple
    residuals: tuple
    homogeneity: float

    @property
    def slope_spread(self):
        kept = [s for s, d, o in zip(self.slopes, self.degenerate, self.outliers) if not d and not o]
        return float(max(kept) - min(kept))

    def to_dict(self):
        g = np.asarray(self.g_samples, dtype=complex)
        return {
            "x0": self.x0,
            "alpha_hat": self.alpha_hat,
            "L": self.L.name,
            "eps": list(self.eps),
            "battery": list(self.battery),
            "slopes": [None if np.isnan(s) else s for s in self.slopes],
            "degenerate": list(self.degenerate),
            "outliers": list(self.outliers),
            "g_re": g.real.tolist(),
            "g_im": g.imag.tolist(),
            "residuals": list(self.residuals),
            "homogeneity": self.homogeneity,
            "slope_spread": self.slope_spread,
        }


def _limit_samples(f, x0, eps, battery, alpha, L):
    values = np.array([pair_scaled(f, x0, eps, psi) for psi in battery], dtype=complex)
    return values / (eps ** alpha * L(eps))


def quasi_fit(f, x0, eps, battery, L=None, slope_tol=SLOPE_TOL, vanish_tol=VANISH_TOL, max_outliers=0,
              min_decades=2.0):
    """Degree alpha and limit samples <g, psi_i> of f(x0 + eps x) ~ eps^alpha L(eps) g(x).

    Args:
        f: One-dimensional GeneralizedFunction.
        x0: Point of the expansion.
        eps: At least six scales spanning `min_decades` decades.
        battery: Test functions psi_i.
        L: SlowlyVarying hypothesis, constant by default.
        slope_tol: Allowed spread of the per-member slopes.
        vanish_tol: Members whose pairings stay below this fraction of the
            largest pairing are treated as degenerate and left out of the fit.
        max_outliers: Members farthest from the median that may be dropped
            before the spread test.
        min_decades: Required span of the scale grid.

    Returns:
        QuasiasymptoticFit with the median slope as alpha_hat.

    Raises:
        AllPairingsVanish: Every member is degenerate.
        InconsistentDegree: The remaining slopes spread more than slope_tol.
    """
    if f.dimension != 1:
        raise ValueError("Quasiasymptotic fits are available in one dimension")
    L = L or SlowlyVarying()
    eps = _check_grid(eps, MIN_FIT_SCALES, min_decades)
    battery = _check_battery(battery)

    normalized = _scaled_pairings(f, x0, eps, battery) / L(eps)[None, :]
    magnitude = np.abs(normalized)
    peak = float(magnitude.max())
    degenerate = np.array([
        row.max() <= vanish_tol * peak or np.any(row == 0.0) for row in magnitude
    ])
    if peak == 0.0 or degenerate.all():
        raise AllPairingsVanish(f"Every battery pairing of '{f.name}' at {x0} vanishes")

    slopes = np.full(len(battery), np.nan)
    for i in np.flatnonzero(~degenerate):
        slopes[i], _ = fit_log_slope(eps, magnitude[i])
    active = list(np.flatnonzero(~degenerate))
    outliers = np.zeros(len(battery), dtype=bool)
    alpha_hat = float(np.median(slopes[active]))
    while np.ptp(slopes[active]) > slope_tol and outliers.sum() < max_outliers and len(active) > 1:
        worst = max(active, key=lambda i: abs(slopes[i] - alpha_hat))
        outliers[worst] = True
        active.remove(worst)
        alpha_hat = float(np.median(slopes[active]))
    spread = float(np.ptp(slopes[active]))
    if spread > slope_tol:
        raise InconsistentDegree(
            f"Battery slopes for '{f.name}' spread by {spread:.3f} > {slope_tol} "
            f"({', '.join(f'{s:.3f}' for s in slopes[active])})"
        )

    scaled = normalized / (eps ** alpha_hat)[None, :]
    g = scaled[:, -1]
    g_scale = max(float(np.max(np.abs(g))), 1e-300)
    residuals = tuple(float(np.max(np.abs(scaled[:, k] - g))) / g_scale for k in range(eps.size))

    homogeneity = 0.0
    for a in DILATIONS:
        dilated = _limit_samples(f, x0, eps[-1], [psi.dilated(a) for psi in battery], alpha_hat, L)
        deviation = np.abs(dilated - a ** alpha_hat * g)[active]
        homogeneity = max(homogeneity, float(deviation.max()) / g_scale)

    logger.info(f"Quasiasymptotic fit of '{f.name}' at {x0}: alpha={alpha_hat:.4f}, spread={spread:.4f}")
    return QuasiasymptoticFit(
        x0=float(x0),
        alpha_hat=alpha_hat,
        L=L,
        eps=tuple(float(e) for e in eps),
        battery=tuple(psi.name for psi in battery),
        slopes=tuple(float(s) for s in slopes),
        degenerate=tuple(bool(d) for d in degenerate),
        outliers=tuple(bool(o) for o in outliers),
        g_samples=tuple(complex(v) for v in g),
        residuals=residuals,
        homogeneity=homogeneity,
    )


def approximate_identity_testfn(K, psi, eps, x0, points=IDENTITY_POINTS):
    """J psi(y) = int psi(y + u/s) q0(X_y + u, X_y) du with lambda = 1/eps and s = eps 2^lambda.

    Pairing f(x0 + eps .) against J psi gives <(q_{1/eps} f)(x0 + eps .), psi>.
    X_y = 2^lambda x0 + s y taken modulo 1.
    """
    if eps <= 0:
        raise EpsilonNonpositive(f"Scale must be positive, got {eps}")
    sf = K.axis().sf
    lam = 1.0 / eps
    if lam > MAX_LEVEL:
        raise ValueError(f"Scale {eps:g} puts 2^(1/eps) beyond double precision (eps >= 1/{MAX_LEVEL} required)")
    s = eps * 2.0 ** lam
    origin = np.mod(2.0 ** lam * x0, 1.0)
    lo, hi = psi.window()
    reach = (sf.support_length + 1) / s
    y = np.linspace(lo - reach, hi + reach, points)
    values = np.empty(points)
    for start in range(0, points, _ROW_CHUNK):
        rows = y[start:start + _ROW_CHUNK]
        X = np.mod(origin + s * rows, 1.0)
        nodes, matrix = slice_matrix(K, X)
        if sf.interpolation == "step":
            h = nodes[1] - nodes[0]
            mids = nodes[:-1] + 0.5 * h
            samples = psi.evaluate(rows[:, None] + (mids[None, :] - X[:, None]) / s)
            values[start:start + rows.size] = h * np.sum(samples * matrix[:, :-1], axis=1)
        else:
            samples = psi.evaluate(rows[:, None] + (nodes[None, :] - X[:, None]) / s)
            values[start:start + rows.size] = integrate.trapezoid(samples * matrix, nodes, axis=1)
    profile = PiecewiseProfile(nodes=y, values=(values,), mode="linear")
    decay = DecayClass("compact", center=0.5 * (y[0] + y[-1]), radius=0.5 * (y[-1] - y[0]))
    return TestFunction(name=f"J[{eps:g}]{psi.name}", decay=decay, profile=profile)


def _projected_pairings(f, K, x0, eps, battery):
    return np.array([
        [pair_scaled(f, x0, e, approximate_identity_testfn(K, psi, e, x0)) for psi in battery] for e in eps
    ], dtype=complex).T


@dataclass(frozen=True)
class EquivalenceReport:
    alpha: float
    eps: tuple
    projected: tuple
    direct: tuple
    agreement: tuple
    max_gap: float
    o_bound: float

    @property
    def passed(self):
        return all(self.agreement) and np.isfinite(self.o_bound)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "eps": list(self.eps),
            "projected_re": [[v.real for v in row] for row in self.projected],
            "direct_re": [[v.real for v in row] for row in self.direct],
            "agreement": list(self.agreement),
            "max_gap": self.max_gap,
            "o_bound": self.o_bound,
            "passed": self.passed,
        }


def qbth3_equivalence(f, x0, K, eps, battery, alpha=None, L=None, rtol=AGREEMENT_RTOL, atol=AGREEMENT_ATOL):
    """Scaled projected pairings <(q_{1/eps} f)(x0 + eps .), psi> against direct scaled pairings.

    Both are normalized by eps^alpha L(eps); alpha defaults to the fitted degree.
    Agreement per eps is measured against the largest direct pairing of the battery.
    """
    L = L or SlowlyVarying()
    battery = _check_battery(battery)
    eps = _check_grid(eps, MIN_FIT_SCALES if alpha is None else 1)
    if alpha is None:
        alpha = quasi_fit(f, x0, eps, battery, L, min_decades=0.0).alpha_hat
    norm = (eps ** alpha * L(eps))[None, :]
    direct = _scaled_pairings(f, x0, eps, battery) / norm
    projected = _projected_pairings(f, K, x0, eps, battery) / norm
    scale = np.max(np.abs(direct), axis=0)
    gaps = np.max(np.abs(projected - direct), axis=0)
    agreement = gaps <= rtol * scale + atol
    relative = gaps / np.maximum(scale, 1e-300)
    o_bound = float(np.max(np.abs(direct)))
    logger.info(f"Projected vs direct pairings of '{f.name}': worst relative gap {relative.max():.3e}")
    return EquivalenceReport(
        alpha=float(alpha),
        eps=tuple(float(e) for e in eps),
        projected=tuple(tuple(complex(v) for v in column) for column in projected.T),
        direct=tuple(tuple(complex(v) for v in column) for column in direct.T),
        agreement=tuple(bool(a) for a in agreement),
        max_gap=float(relative.max()),
        o_bound=o_bound,
    )


@dataclass(frozen=True)
class ResidualSeries:
    lambdas: tuple
    residuals: tuple
    scaled_values: tuple
    limit_constant: complex
    passed: bool

    def to_dict(self):
        return {
            "lambdas": list(self.lambdas),
            "residuals": list(self.residuals),
            "scaled_re": [v.real for v in self.scaled_values],
            "limit_constant": [self.limit_constant.real, self.limit_constant.imag],
            "passed": self.passed,
        }


def qbth2_check(f, x0, K, lambdas, g, alpha, L=None, threshold=0.1, floor=1e-8):
    """Normalized residuals e = [(q f)(x0) - L (q g_x0)(x0)] / (2^(-alpha lambda) L) along lambdas.

    g is the homogeneous limit centered at the origin; it is moved to x0.
    Passes when the last residual is below `threshold` and the last four do
    not increase (or all sit below `floor`).
    """
    L = L or SlowlyVarying()
    lambdas = np.asarray(lambdas, dtype=float)
    g_x0 = g.translated(x0)
    residuals, scaled = [], []
    for lam in lambdas:
        ell = L(2.0 ** -lam)
        fx = project_at(f, K, lam, 0.0, x0)
        gx = project_at(g_x0, K, lam, 0.0, x0)
        norm = 2.0 ** (-alpha * lam) * ell
        residuals.append(float(abs(fx - ell * gx) / norm))
        scaled.append(complex(fx / norm))
    limit = complex(project_at(g, K, 0.0, 0.0, 0.0))
    tail = np.asarray(residuals[-4:])
    settling = bool(np.all(np.diff(tail) <= 0.0) or np.all(tail <= floor))
    passed = bool(residuals[-1] < threshold and settling)
    logger.info(f"Expansion residual of '{f.name}' at {x0}: final {residuals[-1]:.3e}, passed={passed}")
    return ResidualSeries(tuple(float(v) for v in lambdas), tuple(residuals), tuple(scaled), limit, passed)


@dataclass(frozen=True)
class DensityReport:
    alpha: float
    convention: str
    omega_alpha: float
    eps: tuple
    ratios: tuple
    theta_hat: float
    trend: float
    band: tuple
    expected: float = None

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "convention": self.convention,
            "omega_alpha": self.omega_alpha,
            "eps": list(self.eps),
            "ratios": list(self.ratios),
            "theta_hat": self.theta_hat,
            "trend": self.trend,
            "band": list(self.band),
            "expected": self.expected,
        }


def _masses(mu, x0, eps):
    masses = np.array([np.real(ball_measure(mu, x0, e)) for e in eps])
    if np.any(masses < 0.0):
        raise NegativeMeasure(f"Measure '{mu.name}' has negative mass on a ball around {x0}")
    return masses


def alpha_density(mu, x0, alpha, eps, L=None, convention="unit_ball", ell=None):
    """Ratios mu(B(x0, eps)) / (omega_alpha eps^alpha L(eps)) and the finest-scale estimate.

    With `ell` given, the homogeneous prediction omega_n ell / (alpha omega_alpha)
    is attached as `expected`.
    """
    if alpha <= 0:
        raise ValueError(f"The density exponent must be positive, got {alpha}")
    L = L or SlowlyVarying()
    eps = _check_grid(eps, 1)
    w = omega(alpha, convention)
    ratios = _masses(mu, x0, eps) / (w * eps ** alpha * L(eps))
    theta = float(ratios[-1])
    trend = float(abs(ratios[-1] - ratios[-2]) / max(abs(theta), 1e-300)) if ratios.size > 1 else 0.0
    expected = None
    if ell is not None:
        expected = unit_ball_volume(mu.dimension) * ell / (alpha * w)
    return DensityReport(
        alpha=float(alpha),
        convention=convention,
        omega_alpha=w,
        eps=tuple(float(e) for e in eps),
        ratios=tuple(float(r) for r in ratios),
        theta_hat=theta,
        trend=trend,
        band=(float(ratios.min()), float(ratios.max())),
        expected=expected,
    )


@dataclass(frozen=True)
class DensityVerdict:
    alpha: float
    small_ball_slope: float
    ell: float
    projected_gap: float
    theta_hat: float
    theta_direct: float
    tail_eps: tuple = ()
    tail_ells: tuple = ()
    tail_gaps: tuple = ()
    ell_spread: float = 0.0

    def to_dict(self):
        return asdict(self)


def _projected_limit(mu, x0, e, degree, K, battery, L, shape):
    """Least-squares ell and relative misfit of the projected pairings at one scale."""
    projected = np.array([
        pair_scaled(mu, x0, e, approximate_identity_testfn(K, psi, e, x0)) for psi in battery
    ], dtype=complex) / (e ** degree * L(e))
    ell = float(np.real(np.vdot(shape, projected) / np.vdot(shape, shape)))
    gap = float(np.max(np.abs(projected - ell * shape)) / max(np.max(np.abs(ell * shape)), 1e-300))
    return ell, gap


def qbc2_pipeline(mu, x0, alpha, K, eps, battery, L=None, convention="unit_ball", rtol=AGREEMENT_RTOL,
                  margin=DEGREE_MARGIN, tail=LIMIT_TAIL):
    """alpha-density of a positive measure from its two hypotheses.

    Clause "small-ball-bound": mu(B(x0, eps)) = O(eps^alpha), tested as a log-log
    slope of at least alpha - margin. Clause "projected-limit": over the `tail`
    finest scales the projected scaled pairings normalized by eps^(alpha - 1) L(eps)
    match ell |x|^(alpha - 1), with the same ell at every scale.

    Raises:
        HypothesisFailed: `clause` names the failing hypothesis.
    """
    if mu.dimension != 1:
        raise ValueError("The density pipeline is available in one dimension")
    if alpha <= 0:
        raise ValueError(f"The density exponent must be positive, got {alpha}")
    if tail < 1:
        raise ValueError(f"The limit tail needs at least one scale, got {tail}")
    L = L or SlowlyVarying()
    eps = _check_grid(eps, 2)
    battery = _check_battery(battery)

    masses = _masses(mu, x0, eps)
    if np.any(masses == 0.0):
        raise HypothesisFailed("small-ball-bound", f"'{mu.name}' has no mass near {x0}")
    slope, _ = fit_log_slope(eps, masses)
    if slope < alpha - margin:
        raise HypothesisFailed(
            "small-ball-bound", f"mass exponent {slope:.3f} is below {alpha - margin:.3f}"
        )

    degree = alpha - mu.dimension
    shape = np.array([pair(from_density(AbsPowerDensity(degree)), psi) for psi in battery], dtype=complex)
    tail_eps = eps[-min(tail, eps.size):]
    limits = [_projected_limit(mu, x0, e, degree, K, battery, L, shape) for e in tail_eps]
    ells = np.array([ell for ell, _ in limits])
    gaps = np.array([gap for _, gap in limits])
    ell = float(ells[-1])
    spread = float(np.max(np.abs(ells - ell)) / max(abs(ell), 1e-300))
    if not np.all(ells > 0.0) or gaps.max() > rtol or spread > rtol:
        worst = int(np.argmax(gaps))
        raise HypothesisFailed(
            "projected-limit",
            f"projected pairings do not settle on ell |x|^{degree:g} (ell={ell:.4g}, spread={spread:.3e}, "
            f"gap={gaps[worst]:.3e} at eps={tail_eps[worst]:g})"
        )

    theta = unit_ball_volume(mu.dimension) * ell / (alpha * omega(alpha, convention))
    direct = alpha_density(mu, x0, alpha, eps, L, convention)
    logger.info(f"alpha-density of '{mu.name}' at {x0}: theta={theta:.6g} (direct {direct.theta_hat:.6g})")
    return DensityVerdict(
        alpha=float(alpha),
        small_ball_slope=float(slope),
        ell=ell,
        projected_gap=float(gaps.max()),
        theta_hat=float(theta),
        theta_direct=direct.theta_hat,
        tail_eps=tuple(float(e) for e in tail_eps),
        tail_ells=tuple(float(v) for v in ells),
        tail_gaps=tuple(float(v) for v in gaps),
        ell_spread=spread,
    )
