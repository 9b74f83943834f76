"""
random-matrix analysis of scale-resolved fluctuation correlations.

for one fluctuation panel: the equal-time correlation matrix, its eigenvalues,
the comparison with the marchenko-pastur law, polynomial unfolding of the
spectrum, nearest-neighbour spacings and the wigner-surmise fit. `scale_sweep`
repeats the chain for every scale and records failures instead of stopping.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, final

import numpy as np
import numpy.typing as npt
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as poly
from scipy import integrate, stats

from .errors import (
    ConstraintError,
    DegenerateScripError,
    EigenSolverError,
    GoeFitError,
    ScalescopeError,
    UnfoldingError,
)
from .wbfe import FluctuationPanel

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.intp]

EigenMethod = Literal["jacobi", "lapack"]
HistogramRule = Literal["fd", "sqrt"]
CountConvention = Literal["density", "counts"]

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100
MIN_UNFOLD_EIGENVALUES = 20
MIN_UNFOLD_DEGREE = 3
UNFOLD_CONDITION_LIMIT = 1e10
MIN_GOE_SPACINGS = 100
MIN_EXPECTED_COUNT = 5.0
MAX_HISTOGRAM_BINS = 1000


@final
@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """
    equal-time correlation matrix c = x x^t / t of a fluctuation panel.

    attributes:
        `matrix: FloatArray`
            n x n symmetric matrix
        `n_series: int`
            number of scrips n
        `length: int`
            number of time points t
        `tickers: tuple[str, ...]`
            row labels
    """

    matrix: FloatArray
    n_series: int
    length: int
    tickers: tuple[str, ...] = ()

    @property
    def ratio(self) -> float:
        """aspect ratio q = t / n."""
        return self.length / self.n_series


@final
@dataclass(frozen=True)
class MpParams:
    """
    marchenko-pastur law parameters.

    attributes:
        `q: float`
            aspect ratio t / n, at least 1
        `sigma2: float`
            variance of the data-matrix entries
        `lambda_min: float`
            lower support edge
        `lambda_max: float`
            upper support edge
    """

    q: float
    sigma2: float
    lambda_min: float
    lambda_max: float

    def contains(self, eigenvalues: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        """Mask of eigenvalues inside [lambda_min, lambda_max]."""
        values = np.asarray(eigenvalues, dtype=np.float64)
        return (values >= self.lambda_min) & (values <= self.lambda_max)


@final
@dataclass(frozen=True, eq=False)
class UnfoldedSpectrum:
    """
    eigenvalues mapped through the smoothed cumulative spectral function.

    attributes:
        `raw: FloatArray`
            sorted eigenvalues
        `unfolded: FloatArray`
            non-decreasing unfolded values
        `spacings: FloatArray`
            nearest-neighbour spacings of `unfolded`
        `unfolding_degree: int`
            polynomial degree of the fit
    """

    raw: FloatArray
    unfolded: FloatArray
    spacings: FloatArray
    unfolding_degree: int


@final
@dataclass(frozen=True)
class GoeFit:
    """
    least-squares fit of rho(s) = a s exp(-b s^2) to a spacing histogram.

    attributes:
        `a: float`
            amplitude
        `b: float`
            gaussian-tail coefficient
        `confidence: tuple[tuple[float, float], tuple[float, float]]`
            95% bounds of a and of b
        `ks_stat: float`
            kolmogorov-smirnov distance to the normalised wigner surmise
        `ks_pvalue: float`
            p-value of that distance
        `convention: str`
            "density" (normalised histogram) or "counts" (raw counts)
        `bins: int`
            number of histogram bins fitted
        `residual: float`
            residual sum of squares at the optimum
    """

    a: float
    b: float
    confidence: tuple[tuple[float, float], tuple[float, float]]
    ks_stat: float
    ks_pvalue: float
    convention: str
    bins: int
    residual: float


@final
@dataclass(frozen=True, eq=False)
class EigenvalueDensity:
    """empirical eigenvalue density per bin next to the marchenko-pastur expectation."""

    edges: FloatArray
    counts: IntArray
    empirical: FloatArray
    expected: FloatArray


@final
@dataclass(frozen=True)
class ChiSquareResult:
    """chi-square goodness of fit of an eigenvalue histogram against the law."""

    statistic: float
    pvalue: float
    dof: int
    bins: int


@dataclass(frozen=True)
class RmtSettings:
    """
    knobs for one spectral analysis.

    attributes:
        `unfolding_degree: int`
            polynomial degree of the unfolding fit
        `histogram_rule: str`
            bin-width rule, "fd" or "sqrt"
        `bins: int | None`
            explicit bin count, overriding the rule
        `standardize_rows: bool`
            standardise fluctuation rows before forming the correlation matrix
        `eigensolver: str`
            "jacobi" or "lapack"
        `count_convention: str`
            spacing-histogram convention for the goe fit
    """

    unfolding_degree: int = 5
    histogram_rule: HistogramRule = "fd"
    bins: int | None = None
    standardize_rows: bool = True
    eigensolver: EigenMethod = "jacobi"
    count_convention: CountConvention = "density"


@dataclass
class SpectralResult:
    """
    everything computed for one scale; `error` is set when the chain failed.

    attributes:
        `scale: int`
            wavelet scale
        `n_series: int`
            panel rows
        `length: int`
            panel columns
        `eigenvalues: FloatArray`
            ascending eigenvalues
        `mp: MpParams | None`
            law parameters for the panel shape
        `inside_fraction: float`
            share of eigenvalues inside the law's support
        `chi_square: ChiSquareResult | None`
            histogram fit against the law
        `spacings: FloatArray`
            unfolded nearest-neighbour spacings
        `ks_stat: float`
            distance of the spacings to the wigner surmise
        `ks_pvalue: float`
            its p-value
        `goe: GoeFit | None`
            (a, b) fit, absent when there are too few spacings
        `error: str | None`
            failure description when the scale could not be analysed
    """

    scale: int
    n_series: int = 0
    length: int = 0
    eigenvalues: FloatArray = field(default_factory=lambda: np.empty(0))
    mp: MpParams | None = None
    inside_fraction: float = math.nan
    chi_square: ChiSquareResult | None = None
    spacings: FloatArray = field(default_factory=lambda: np.empty(0))
    ks_stat: float = math.nan
    ks_pvalue: float = math.nan
    goe: GoeFit | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        """true when the scale was analysed without error."""
        return self.error is None


@dataclass
class SweepReport:
    """per-scale spectral results in ascending scale order."""

    results: list[SpectralResult]

    @property
    def failed(self) -> list[SpectralResult]:
        """results that carry an error."""
        return [r for r in self.results if not r.ok]

    @property
    def partial(self) -> bool:
        """true when at least one scale failed."""
        return bool(self.failed)


def correlation_matrix(
    panel: FluctuationPanel | npt.ArrayLike,
    standardize_rows: bool = True,
    tickers: Sequence[str] | None = None,
) -> CorrelationMatrix:
    """
    equal-time correlation matrix of a fluctuation panel.

    rows are standardised to zero mean and unit population variance (unless
    `standardize_rows` is false) and c = x x^t / t.

    raises:
        `ConstraintError`
            fewer than two rows, or t <= n
        `DegenerateScripError`
            a row with zero variance
    """
    if isinstance(panel, FluctuationPanel):
        x = np.asarray(panel.matrix, dtype=np.float64)
        labels = panel.tickers
    else:
        x = np.asarray(panel, dtype=np.float64)
        labels = tuple(tickers) if tickers is not None else tuple(
            f"series_{i}" for i in range(x.shape[0] if x.ndim == 2 else 0)
        )
    if x.ndim != 2 or x.shape[0] < 2:
        raise ConstraintError("need a two-dimensional panel with at least two rows")
    n, t = x.shape
    if t <= n:
        raise ConstraintError(f"need more time points than scrips, got t={t} n={n}")

    mean = x.mean(axis=1, keepdims=True)
    std = x.std(axis=1, keepdims=True)
    scale = np.maximum(np.max(np.abs(x), axis=1, keepdims=True), 1.0)
    dead = np.flatnonzero(std[:, 0] <= 1e-12 * scale[:, 0])
    if dead.size:
        raise DegenerateScripError(labels[int(dead[0])])
    if standardize_rows:
        x = (x - mean) / std
    matrix = (x @ x.T) / t
    matrix = 0.5 * (matrix + matrix.T)
    return CorrelationMatrix(matrix=matrix, n_series=n, length=t, tickers=tuple(labels))


@lru_cache(maxsize=32)
def _round_robin(n: int) -> tuple[tuple[IntArray, IntArray], ...]:
    """disjoint (p, q) pair sets covering every pair once per sweep (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds: list[tuple[IntArray, IntArray]] = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        kept = [(p, q) for p, q in pairs if p < n and q < n]
        rounds.append(
            (
                np.fromiter((p for p, _ in kept), dtype=np.intp, count=len(kept)),
                np.fromiter((q for _, q in kept), dtype=np.intp, count=len(kept)),
            )
        )
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _off_norm(a: FloatArray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigenvalues(
    matrix: npt.ArrayLike,
    tol: float = JACOBI_TOLERANCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> FloatArray:
    """
    eigenvalues of a real symmetric matrix by cyclic jacobi rotations.

    each sweep visits every off-diagonal pair once in round-robin order, so
    the rotations of one round act on disjoint index pairs and are applied
    together.

    arguments:
        `matrix: npt.ArrayLike`
            real symmetric matrix
        `tol: float`
            stop once the off-diagonal frobenius norm is at most tol * ||a||_f
        `max_sweeps: int`
            sweep budget

    raises:
        `EigenSolverError`
            no convergence within `max_sweeps`

    returns: `FloatArray`
        ascending eigenvalues
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    norm = float(np.linalg.norm(a))
    threshold = tol * norm
    # off-diagonal entries below this are zeroed without a rotation
    negligible = 1e-3 * np.finfo(np.float64).eps * norm
    schedule = _round_robin(n)
    for sweep in range(max_sweeps):
        if _off_norm(a) <= threshold:
            logger.debug("jacobi converged: n=%d sweeps=%d", n, sweep)
            return np.sort(a.diagonal().copy())
        for p, q in schedule:
            apq = a[p, q]
            active = np.abs(apq) > negligible
            theta = np.divide(
                a[q, q] - a[p, p], 2.0 * apq, out=np.zeros_like(apq), where=active
            )
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            ap = a[:, p].copy()
            aq = a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            rp = a[p, :].copy()
            rq = a[q, :].copy()
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
        a = 0.5 * (a + a.T)
    if _off_norm(a) <= threshold:
        return np.sort(a.diagonal().copy())
    raise EigenSolverError(
        f"jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {_off_norm(a):.3e})"
    )


def eigenvalues_sym(
    corr: CorrelationMatrix | npt.ArrayLike, method: EigenMethod = "jacobi"
) -> FloatArray:
    """
    ascending eigenvalues of a symmetric matrix.

    arguments:
        `corr: CorrelationMatrix | npt.ArrayLike`
            correlation matrix or any real symmetric matrix
        `method: EigenMethod`
            "jacobi" (cyclic jacobi, default) or "lapack" (numpy eigvalsh)

    raises:
        `ConstraintError`
            non-square or non-symmetric input, or an unknown method
        `EigenSolverError`
            jacobi non-convergence
    """
    a = np.asarray(corr.matrix if isinstance(corr, CorrelationMatrix) else corr, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConstraintError(f"need a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.abs(a).max(initial=0.0)))):
        raise ConstraintError("matrix is not symmetric")
    if method == "jacobi":
        return jacobi_eigenvalues(a)
    if method == "lapack":
        return np.asarray(np.linalg.eigvalsh(a), dtype=np.float64)
    raise ConstraintError(f"unknown eigensolver '{method}'")


def mp_bounds(q: float, sigma2: float = 1.0) -> MpParams:
    """
    marchenko-pastur support edges sigma2 (1 + 1/q -/+ 2 sqrt(1/q)).

    raises:
        `ConstraintError`
            q < 1 or sigma2 <= 0
    """
    if not q >= 1.0:
        raise ConstraintError(f"aspect ratio q = {q} must be at least 1")
    if not sigma2 > 0.0:
        raise ConstraintError(f"variance must be positive, got {sigma2}")
    inv = 1.0 / q
    root = 2.0 * math.sqrt(inv)
    return MpParams(
        q=float(q),
        sigma2=float(sigma2),
        lambda_min=max(sigma2 * (1.0 + inv - root), 0.0),
        lambda_max=sigma2 * (1.0 + inv + root),
    )


def mp_density(lam: npt.ArrayLike, params: MpParams) -> FloatArray | float:
    """
    marchenko-pastur eigenvalue density, zero outside (and on the edges of) the support.

    returns: `FloatArray | float`
        a float for scalar input, an array otherwise
    """
    x = np.asarray(lam, dtype=np.float64)
    inside = (x > params.lambda_min) & (x < params.lambda_max)
    safe = np.where(inside, x, 1.0)
    root = np.sqrt(np.clip((params.lambda_max - safe) * (safe - params.lambda_min), 0.0, None))
    value = np.where(inside, params.q / (2.0 * math.pi * params.sigma2) * root / safe, 0.0)
    return float(value) if value.ndim == 0 else value


def mp_mass(lo: float, hi: float, params: MpParams) -> float:
    """
    probability mass of the law on [lo, hi].

    integrates over theta with lambda = l_min + (l_max - l_min) sin^2 theta,
    which removes the square-root edge behaviour.
    """
    lo_c = max(lo, params.lambda_min)
    hi_c = min(hi, params.lambda_max)
    if hi_c <= lo_c:
        return 0.0
    width = params.lambda_max - params.lambda_min

    def to_theta(lam: float) -> float:
        return math.asin(math.sqrt(min(max((lam - params.lambda_min) / width, 0.0), 1.0)))

    def integrand(theta: float) -> float:
        lam = params.lambda_min + width * math.sin(theta) ** 2
        if lam <= 0.0:
            return 0.0
        # d lambda = 2 width sin cos d theta; sqrt term = width sin cos
        sc = math.sin(theta) * math.cos(theta)
        return params.q / (2.0 * math.pi * params.sigma2) * 2.0 * (width * sc) ** 2 / lam

    value, _ = integrate.quad(integrand, to_theta(lo_c), to_theta(hi_c), limit=200)
    return float(value)


def unfold_eigenvalues(eigs: npt.ArrayLike, degree: int = 5) -> UnfoldedSpectrum:
    """
    unfold a spectrum with a polynomial fit of its cumulative counting function.

    the staircase lambda_i -> i is fitted by least squares, the fit is forced
    non-decreasing (with a warning when that changes anything) and the unfolded
    values are its evaluations at the eigenvalues.

    raises:
        `UnfoldingError`
            fewer than 20 eigenvalues, degree < 3, all eigenvalues equal, or an
            ill-conditioned fit
    """
    raw = np.sort(np.asarray(eigs, dtype=np.float64))
    if raw.size < MIN_UNFOLD_EIGENVALUES:
        raise UnfoldingError(
            f"need at least {MIN_UNFOLD_EIGENVALUES} eigenvalues, got {raw.size}"
        )
    if degree < MIN_UNFOLD_DEGREE:
        raise UnfoldingError(f"unfolding degree must be at least {MIN_UNFOLD_DEGREE}")
    if raw[-1] <= raw[0]:
        raise UnfoldingError("all eigenvalues are equal; nothing to unfold")

    staircase = np.arange(1, raw.size + 1, dtype=np.float64)
    fit = Polynomial.fit(raw, staircase, degree)
    mapped = fit.mapparms()[0] + fit.mapparms()[1] * raw
    condition = float(np.linalg.cond(poly.polyvander(mapped, degree)))
    if not math.isfinite(condition) or condition > UNFOLD_CONDITION_LIMIT:
        raise UnfoldingError(
            f"unfolding fit ill-conditioned (cond={condition:.2e}); try a degree below {degree}"
        )
    unfolded = np.asarray(fit(raw), dtype=np.float64)
    if np.any(np.diff(unfolded) < 0.0):
        logger.warning("unfolding fit of degree %d not monotone; clamping", degree)
        unfolded = np.maximum.accumulate(unfolded)
    return UnfoldedSpectrum(
        raw=raw,
        unfolded=unfolded,
        spacings=nn_spacings(unfolded),
        unfolding_degree=degree,
    )


def nn_spacings(unfolded: UnfoldedSpectrum | npt.ArrayLike) -> FloatArray:
    """Nearest-neighbour spacings xi_(i+1) - xi_i of unfolded values."""
    xi = np.asarray(
        unfolded.unfolded if isinstance(unfolded, UnfoldedSpectrum) else unfolded,
        dtype=np.float64,
    )
    return np.clip(np.diff(xi), 0.0, None)


def wigner_pdf(lam: npt.ArrayLike) -> FloatArray | float:
    """
    normalised wigner surmise (pi s / 2) exp(-pi s^2 / 4).

    raises:
        `ConstraintError`
            negative argument
    """
    s = np.asarray(lam, dtype=np.float64)
    if np.any(s < 0.0):
        raise ConstraintError("spacing must be non-negative")
    value = 0.5 * math.pi * s * np.exp(-0.25 * math.pi * s * s)
    return float(value) if value.ndim == 0 else value


def wigner_cdf(lam: npt.ArrayLike) -> FloatArray:
    """Cumulative distribution of the surmise, 1 - exp(-pi s^2 / 4), zero below 0."""
    s = np.clip(np.asarray(lam, dtype=np.float64), 0.0, None)
    return -np.expm1(-0.25 * math.pi * s * s)


def histogram_edges(
    values: npt.ArrayLike, rule: HistogramRule = "fd", bins: int | None = None
) -> FloatArray:
    """
    histogram bin edges by rule or explicit count.

    freedman-diaconis falls back to the sqrt rule when the interquartile range
    vanishes, and never asks for more than `MAX_HISTOGRAM_BINS` bins.

    arguments:
        `values: npt.ArrayLike`
            sample
        `rule: HistogramRule`
            "fd" (freedman-diaconis) or "sqrt"
        `bins: int | None`
            explicit number of equal-width bins, overriding `rule`

    raises:
        `ConstraintError`
            unknown rule or nonpositive bin count
    """
    x = np.asarray(values, dtype=np.float64)
    if bins is not None:
        if bins < 1:
            raise ConstraintError(f"bin count must be positive, got {bins}")
        return np.histogram_bin_edges(x, bins=bins)
    if rule not in ("fd", "sqrt"):
        raise ConstraintError(f"unknown histogram rule '{rule}'")
    if rule == "sqrt" or x.size < 2:
        return np.histogram_bin_edges(x, bins="sqrt")
    q75, q25 = np.percentile(x, [75, 25])
    spread = float(np.ptp(x))
    width = 2.0 * float(q75 - q25) / np.cbrt(x.size)
    if width <= np.finfo(np.float64).eps * max(spread, 1.0):
        logger.debug("zero interquartile range; falling back to sqrt bins")
        return np.histogram_bin_edges(x, bins="sqrt")
    count = max(math.ceil(spread / width), 1)
    if count > MAX_HISTOGRAM_BINS:
        logger.debug("fd rule asks for %d bins; capping at %d", count, MAX_HISTOGRAM_BINS)
        count = MAX_HISTOGRAM_BINS
    return np.histogram_bin_edges(x, bins=count)


def eigenvalue_density(
    eigs: npt.ArrayLike,
    params: MpParams,
    edges: npt.ArrayLike | None = None,
    rule: HistogramRule = "fd",
) -> EigenvalueDensity:
    """Empirical eigenvalue density per bin and the law's mean density over each bin."""
    values = np.asarray(eigs, dtype=np.float64)
    bin_edges = (
        histogram_edges(values, rule) if edges is None else np.asarray(edges, dtype=np.float64)
    )
    counts, _ = np.histogram(values, bins=bin_edges)
    widths = np.diff(bin_edges)
    empirical = counts / (values.size * widths)
    expected = np.array(
        [mp_mass(lo, hi, params) for lo, hi in zip(bin_edges[:-1], bin_edges[1:], strict=True)]
    ) / widths
    return EigenvalueDensity(
        edges=bin_edges, counts=counts.astype(np.intp), empirical=empirical, expected=expected
    )


def mp_chi_square(
    eigs: npt.ArrayLike,
    params: MpParams,
    rule: HistogramRule = "fd",
    bins: int | None = None,
) -> ChiSquareResult:
    """
    chi-square test of an eigenvalue histogram against the law.

    the outer bins are extended to cover the whole support, then adjacent bins
    are merged until every expected count is at least five.

    raises:
        `ConstraintError`
            fewer than two bins survive merging
    """
    values = np.asarray(eigs, dtype=np.float64)
    edges = histogram_edges(values, rule, bins)
    observed, _ = np.histogram(values, bins=edges)
    outer = edges.copy()
    outer[0] = -math.inf
    outer[-1] = math.inf
    expected = values.size * np.array(
        [mp_mass(lo, hi, params) for lo, hi in zip(outer[:-1], outer[1:], strict=True)]
    )

    merged_obs: list[float] = []
    merged_exp: list[float] = []
    acc_obs = 0.0
    acc_exp = 0.0
    for o, e in zip(observed, expected, strict=True):
        acc_obs += float(o)
        acc_exp += float(e)
        if acc_exp >= MIN_EXPECTED_COUNT:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if merged_obs:
        merged_obs[-1] += acc_obs
        merged_exp[-1] += acc_exp
    if len(merged_obs) < 2:
        raise ConstraintError("too few populated bins for a chi-square test")

    obs = np.asarray(merged_obs)
    exp = np.asarray(merged_exp)
    exp *= obs.sum() / exp.sum()
    result = stats.chisquare(obs, exp)
    return ChiSquareResult(
        statistic=float(result.statistic),
        pvalue=float(result.pvalue),
        dof=obs.size - 1,
        bins=obs.size,
    )


def _surmise_model(x: FloatArray, a: float, b: float) -> tuple[FloatArray, FloatArray]:
    """model values and jacobian columns (d/da, d/db)."""
    g = np.exp(-b * x * x)
    model = a * x * g
    jac = np.column_stack([x * g, -a * x**3 * g])
    return model, jac


def fit_spacing_density(
    spacings: npt.ArrayLike,
    bins: int | None = None,
    rule: HistogramRule = "fd",
    convention: CountConvention = "density",
) -> GoeFit:
    """
    fit rho(s) = a s exp(-b s^2) to the spacing histogram.

    the seed comes from the straight line ln(rho / s) = ln a - b s^2, then
    gauss-newton refines (a, b). confidence bounds use the residual variance
    and the student-t quantile.

    arguments:
        `spacings: npt.ArrayLike`
            nearest-neighbour spacings, at least 100
        `bins: int | None`
            explicit bin count
        `rule: HistogramRule`
            bin-width rule when `bins` is not given
        `convention: CountConvention`
            "density" (histogram integrates to 1) or "counts" (raw counts)

    raises:
        `GoeFitError`
            too few or degenerate spacings, or a diverging fit

    returns: `GoeFit`
        fitted coefficients with bounds and the ks distance to the surmise
    """
    s = np.asarray(spacings, dtype=np.float64)
    if s.size < MIN_GOE_SPACINGS:
        raise GoeFitError(f"need at least {MIN_GOE_SPACINGS} spacings, got {s.size}")
    q75, q25 = np.percentile(s, [75, 25])
    if np.ptp(s) <= 0.0 or q75 <= q25:
        raise GoeFitError("spacings are degenerate (zero spread); b would diverge")

    edges = histogram_edges(s, rule, bins)
    heights, edges = np.histogram(s, bins=edges, density=convention == "density")
    centers = 0.5 * (edges[:-1] + edges[1:])
    y = heights.astype(np.float64)

    usable = (centers > 0.0) & (y > 0.0)
    if int(usable.sum()) < 3:
        raise GoeFitError("fewer than three populated bins to seed the fit")
    seed = stats.linregress(centers[usable] ** 2, np.log(y[usable] / centers[usable]))
    a = float(math.exp(seed.intercept))
    b = float(-seed.slope)
    if not b > 0.0:
        b = 0.25 * math.pi
    model, jac = _surmise_model(centers, a, b)
    rss = float(np.sum((y - model) ** 2))

    for _ in range(100):
        step, *_ = np.linalg.lstsq(jac, y - model, rcond=None)
        factor = 1.0
        while factor > 1e-6:
            a_new = a + factor * float(step[0])
            b_new = b + factor * float(step[1])
            if a_new > 0.0 and b_new > 0.0:
                trial, trial_jac = _surmise_model(centers, a_new, b_new)
                trial_rss = float(np.sum((y - trial) ** 2))
                if trial_rss <= rss:
                    break
            factor *= 0.5
        else:
            break
        done = abs(a_new - a) <= 1e-12 * a and abs(b_new - b) <= 1e-12 * b
        a, b, model, jac, rss = a_new, b_new, trial, trial_jac, trial_rss
        if done:
            break

    if not (math.isfinite(a) and math.isfinite(b) and a > 0.0 and b > 0.0):
        raise GoeFitError(f"spacing fit diverged at a={a}, b={b}", residual=rss)

    dof = max(centers.size - 2, 1)
    try:
        cov = (rss / dof) * np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError as exc:
        raise GoeFitError("singular jacobian at the optimum", residual=rss) from exc
    half = float(stats.t.ppf(0.975, dof)) * np.sqrt(np.clip(np.diag(cov), 0.0, None))
    ks = stats.kstest(s, wigner_cdf)
    logger.debug("goe fit: a=%.4f b=%.4f rss=%.3e bins=%d", a, b, rss, centers.size)
    return GoeFit(
        a=a,
        b=b,
        confidence=((a - half[0], a + half[0]), (b - half[1], b + half[1])),
        ks_stat=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        convention=convention,
        bins=int(centers.size),
        residual=rss,
    )


def _fill_scale(panel: FluctuationPanel, cfg: RmtSettings, result: SpectralResult) -> None:
    """run the chain for one panel, storing each stage on `result` as it completes."""
    corr = correlation_matrix(panel, standardize_rows=cfg.standardize_rows)
    result.n_series = corr.n_series
    result.length = corr.length
    eigs = eigenvalues_sym(corr, method=cfg.eigensolver)
    result.eigenvalues = eigs
    sigma2 = 1.0 if cfg.standardize_rows else float(np.trace(corr.matrix) / corr.n_series)
    params = mp_bounds(corr.ratio, sigma2)
    result.mp = params
    result.inside_fraction = float(np.mean(params.contains(eigs)))
    try:
        result.chi_square = mp_chi_square(eigs, params, cfg.histogram_rule, cfg.bins)
    except ConstraintError as exc:
        logger.warning("scale %d: chi-square skipped (%s)", panel.scale, exc)

    unfolded = unfold_eigenvalues(eigs, cfg.unfolding_degree)
    result.spacings = unfolded.spacings
    ks = stats.kstest(unfolded.spacings, wigner_cdf)
    result.ks_stat = float(ks.statistic)
    result.ks_pvalue = float(ks.pvalue)
    if unfolded.spacings.size >= MIN_GOE_SPACINGS:
        result.goe = fit_spacing_density(
            unfolded.spacings, cfg.bins, cfg.histogram_rule, cfg.count_convention
        )
    else:
        logger.warning(
            "scale %d: %d spacings, goe fit needs %d",
            panel.scale,
            unfolded.spacings.size,
            MIN_GOE_SPACINGS,
        )
    logger.info(
        "rmt done: scale=%d inside=%.3f ks=%.4f",
        panel.scale,
        result.inside_fraction,
        result.ks_stat,
    )


def analyse_scale(panel: FluctuationPanel, settings: RmtSettings | None = None) -> SpectralResult:
    """
    full spectral chain for one fluctuation panel.

    raises:
        `ScalescopeError`
            any failure of the chain; `scale_sweep` records these instead
    """
    result = SpectralResult(scale=panel.scale, n_series=panel.n_series, length=panel.length)
    _fill_scale(panel, settings or RmtSettings(), result)
    return result


def scale_sweep(
    panels: Sequence[FluctuationPanel],
    settings: RmtSettings | None = None,
    workers: int = 1,
) -> SweepReport:
    """
    run the spectral chain on every panel; failures are recorded per scale.

    a failed scale keeps whatever was computed before the failing stage
    (eigenvalues and law parameters survive an unfolding failure, say).

    raises:
        `ConstraintError`
            fewer than two panels

    returns: `SweepReport`
        results in ascending scale order
    """
    if len(panels) < 2:
        raise ConstraintError(f"a sweep needs at least two scales, got {len(panels)}")
    cfg = settings or RmtSettings()

    def one(panel: FluctuationPanel) -> SpectralResult:
        result = SpectralResult(scale=panel.scale, n_series=panel.n_series, length=panel.length)
        try:
            _fill_scale(panel, cfg, result)
        except ScalescopeError as exc:
            exc.scale = panel.scale
            logger.warning("scale %d failed: %s", panel.scale, exc.describe())
            result.error = exc.describe()
        return result

    ordered = sorted(panels, key=lambda p: p.scale)
    if workers <= 1:
        results = [one(p) for p in ordered]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, ordered))
    return SweepReport(results=results)
