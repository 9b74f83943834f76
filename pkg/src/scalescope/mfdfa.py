"""
wavelet-based multifractal detrended fluctuation analysis.

fluctuation series are cut into 2n_s segments (n_s from each end), the
q-th order fluctuation function f_q(s) is formed from the segment mean
squares, and h(q), tau(q) and the singularity spectrum follow from its
log-log scaling in s.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import final

import numpy as np
import numpy.typing as npt
from scipy import stats
from scipy.special import logsumexp

from .errors import (
    DegenerateSegmentError,
    FitRangeError,
    GridError,
    InsufficientDataError,
    ScalescopeError,
    SegmentSizeError,
)
from .ingest import Profile, build_profile, normalize_series
from .wavelet import WaveletFilter, max_level
from .wbfe import FluctuationSeries, extract_fluctuations

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

MIN_FIT_POINTS = 4
MIN_SEGMENT_SIZE = 4
MIN_SPECTRUM_POINTS = 5


@final
@dataclass(frozen=True, eq=False)
class FluctuationFunction:
    """
    q-th order fluctuation functions on a grid of segment sizes.

    attributes:
        `q_grid: FloatArray`
            moment orders
        `s_grid: IntArray`
            strictly increasing segment sizes
        `values: FloatArray`
            len(q_grid) x len(s_grid) matrix of f_q(s) > 0
        `scales: tuple[int, ...]`
            wavelet scale each s was taken from (scale-coupled mode), else empty
    """

    q_grid: FloatArray
    s_grid: IntArray
    values: FloatArray
    scales: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        """Check the grid shapes and positivity."""
        if self.values.shape != (self.q_grid.size, self.s_grid.size):
            raise GridError(
                f"values shape {self.values.shape} does not match "
                f"{self.q_grid.size} q x {self.s_grid.size} s"
            )
        if self.s_grid.size > 1 and np.any(np.diff(self.s_grid) <= 0):
            raise GridError("segment sizes must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0.0):
            raise GridError("fluctuation function must be finite and positive")


@final
@dataclass(frozen=True, eq=False)
class HurstFit:
    """
    generalized hurst exponents from log-log least squares.

    attributes:
        `q_grid: FloatArray`
            moment orders
        `h: FloatArray`
            slope of ln f_q(s) against ln s, per q
        `r2: FloatArray`
            coefficient of determination of each fit
        `stderr: FloatArray`
            standard error of each slope
        `s_used: IntArray`
            segment sizes inside the fit range
    """

    q_grid: FloatArray
    h: FloatArray
    r2: FloatArray
    stderr: FloatArray
    s_used: IntArray

    def at(self, q: float) -> float:
        """Return h at moment order `q`."""
        return float(self.h[_index_of(self.q_grid, q)])


@final
@dataclass(frozen=True, eq=False)
class SingularitySpectrum:
    """legendre pairs (beta, f(beta)), one per q."""

    beta: FloatArray
    f_beta: FloatArray


@final
@dataclass(frozen=True, eq=False)
class MultifractalSpectrum:
    """
    scaling description of one fluctuation series.

    attributes:
        `q_grid: FloatArray`
            moment orders
        `h: FloatArray`
            generalized hurst exponents h(q)
        `tau: FloatArray`
            scaling exponents tau(q) = q h(q) - 1
        `beta: FloatArray`
            singularity strengths d tau / d q
        `f_beta: FloatArray`
            singularity spectrum f(beta) = q beta - tau
        `fit_quality: FloatArray`
            r^2 of each log-log regression
    """

    q_grid: FloatArray
    h: FloatArray
    tau: FloatArray
    beta: FloatArray
    f_beta: FloatArray
    fit_quality: FloatArray

    @property
    def width(self) -> float:
        """spectrum width beta_max - beta_min."""
        return spectrum_width(self)

    def hurst(self) -> float:
        """the classical hurst exponent h(2)."""
        return float(self.h[_index_of(self.q_grid, 2.0)])


@dataclass(frozen=True)
class MultifractalResult:
    """fluctuation function, exponent fit and spectrum for one series."""

    fluctuation_function: FluctuationFunction
    fit: HurstFit
    spectrum: MultifractalSpectrum
    fit_range: tuple[float, float]


@dataclass(frozen=True)
class MfdfaSettings:
    """
    knobs for `analyse_series`.

    attributes:
        `q_grid: tuple[float, ...]`
            moment orders (uniform when a spectrum is wanted)
        `fit_min: float`
            smallest segment size in the fit
        `fit_max: float | None`
            largest segment size in the fit (default: length / 4)
        `scale_coupled: bool`
            sample f_q at s_a = 2^(a-1) w on z_a (true) or fit one z_a over an s grid
        `scales: tuple[int, ...]`
            wavelet scales to use (empty: every usable scale)
    """

    q_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_q_grid()))
    fit_min: float = 16.0
    fit_max: float | None = None
    scale_coupled: bool = True
    scales: tuple[int, ...] = ()


@dataclass(frozen=True)
class ExponentDistribution:
    """
    cross-scrip distribution of hurst exponents and singularity strengths.

    attributes:
        `tickers: tuple[str, ...]`
            scrips in row order
        `hurst: FloatArray`
            h(2) per scrip
        `beta0: FloatArray`
            singularity strength at q = 0 (the spectrum peak) per scrip
        `width: FloatArray`
            spectrum width per scrip
    """

    tickers: tuple[str, ...]
    hurst: FloatArray
    beta0: FloatArray
    width: FloatArray

    def summary(self) -> dict[str, dict[str, float]]:
        """Mean, standard deviation, minimum and maximum of each exponent."""
        out: dict[str, dict[str, float]] = {}
        for name, values in (("hurst", self.hurst), ("beta0", self.beta0), ("width", self.width)):
            out[name] = {
                "mean": float(np.mean(values)),
                "std": float(np.std(values)),
                "min": float(np.min(values)),
                "max": float(np.max(values)),
            }
        return out


def _index_of(grid: FloatArray, q: float) -> int:
    hits = np.flatnonzero(np.isclose(grid, q, rtol=0.0, atol=1e-9))
    if hits.size == 0:
        raise GridError(f"q = {q:g} is not on the grid")
    return int(hits[0])


def default_q_grid(q_min: float = -5.0, q_max: float = 5.0, step: float = 0.25) -> FloatArray:
    """
    uniform q grid including its end points.

    raises:
        `GridError`
            nonpositive step or q_min >= q_max
    """
    if step <= 0.0 or q_min >= q_max:
        raise GridError(f"invalid q grid [{q_min}, {q_max}] step {step}")
    count = int(round((q_max - q_min) / step)) + 1
    grid = q_min + step * np.arange(count, dtype=np.float64)
    # snap values that should be integers (0 and 2 in particular) exactly
    return np.where(np.isclose(grid, np.round(grid), atol=1e-12), np.round(grid), grid)


def dyadic_s_grid(length: int, s_min: int = 4, max_fraction: float = 0.25) -> IntArray:
    """Powers of two from `s_min` up to `max_fraction` * length."""
    top = int(length * max_fraction)
    sizes: list[int] = []
    s = max(4, s_min)
    while s <= top:
        sizes.append(s)
        s *= 2
    return np.asarray(sizes, dtype=np.int64)


def segment_variances(fluct: FluctuationSeries | npt.ArrayLike, s: int) -> FloatArray:
    """
    mean squares of the 2n_s segments of size `s`.

    n_s = floor(t / s) segments are taken from the start and n_s from the end;
    forward segments come first, backward ones are counted from the end.

    raises:
        `InsufficientDataError`
            series shorter than 16, so no segment size is admissible
        `SegmentSizeError`
            s below 4 or above length / 4 (which guarantees n_s >= 4)

    returns: `FloatArray`
        sigma^2(nu, s) for nu = 1..2n_s
    """
    z = np.asarray(
        fluct.values if isinstance(fluct, FluctuationSeries) else fluct, dtype=np.float64
    )
    s = int(s)
    if z.size // 4 < MIN_SEGMENT_SIZE:
        raise InsufficientDataError(
            f"series of length {z.size} is too short for segments of {MIN_SEGMENT_SIZE} or more"
        )
    if s < MIN_SEGMENT_SIZE or s > z.size // 4:
        raise SegmentSizeError(
            f"segment size {s} outside {MIN_SEGMENT_SIZE}..{z.size // 4} for length {z.size}"
        )
    n_s = z.size // s
    forward = z[: n_s * s].reshape(n_s, s)
    backward = z[z.size - n_s * s :].reshape(n_s, s)[::-1]
    return np.concatenate([np.mean(forward**2, axis=1), np.mean(backward**2, axis=1)])


def _fq_column(variances: FloatArray, q_grid: FloatArray, s: int) -> FloatArray:
    """f_q(s) for every q from one set of segment variances."""
    zero = np.flatnonzero(variances <= 0.0)
    log_var = np.log(np.where(variances > 0.0, variances, 1.0))
    log_var[zero] = -np.inf
    count = variances.size
    out = np.empty(q_grid.size, dtype=np.float64)
    for i, q in enumerate(q_grid):
        if zero.size and q <= 0.0:
            raise DegenerateSegmentError(int(zero[0]), s, float(q))
        if q == 0.0:
            # analytic q -> 0 limit: exp of the mean log standard deviation
            out[i] = np.exp(0.5 * np.mean(log_var))
        else:
            out[i] = np.exp((logsumexp(0.5 * q * log_var) - np.log(count)) / q)
    if not np.all(np.isfinite(out)) or np.any(out <= 0.0):
        raise DegenerateSegmentError(int(zero[0]) if zero.size else 0, s, float(q_grid[-1]))
    return out


def fluctuation_function(
    fluct: FluctuationSeries | npt.ArrayLike,
    q_grid: npt.ArrayLike,
    s_grid: npt.ArrayLike,
) -> FluctuationFunction:
    """
    f_q(s) of one fluctuation series over a grid of segment sizes.

    f_q(s) = [ mean_nu sigma^2(nu, s)^(q/2) ]^(1/q) for q != 0 and
    f_0(s) = exp[ mean_nu ln sigma^2(nu, s) / 2 ].

    raises:
        `InsufficientDataError`
            series too short for any segment size
        `SegmentSizeError`
            a segment size outside 4..length / 4
        `DegenerateSegmentError`
            a zero-variance segment with q <= 0

    returns: `FluctuationFunction`
        len(q) x len(s) table
    """
    q = np.asarray(q_grid, dtype=np.float64)
    sizes = np.asarray(s_grid, dtype=np.int64)
    columns = [_fq_column(segment_variances(fluct, int(s)), q, int(s)) for s in sizes]
    values = np.column_stack(columns) if columns else np.empty((q.size, 0))
    return FluctuationFunction(q_grid=q, s_grid=sizes, values=values)


def scale_coupled_fluctuation_function(
    profile: Profile | npt.ArrayLike,
    wavelet: WaveletFilter,
    scales: Sequence[int],
    q_grid: npt.ArrayLike,
) -> FluctuationFunction:
    """
    f_q sampled at s_a = 2^(a-1) w on the scale-a fluctuations z_a.

    scales whose segment size falls outside [4, t/4] are skipped.

    returns: `FluctuationFunction`
        one column per retained scale, `scales` recording which
    """
    y = np.asarray(profile.values if isinstance(profile, Profile) else profile, dtype=np.float64)
    q = np.asarray(q_grid, dtype=np.float64)
    kept: list[int] = []
    sizes: list[int] = []
    columns: list[FloatArray] = []
    for a in sorted(set(scales)):
        s = 2 ** (a - 1) * wavelet.support_width
        if s < MIN_SEGMENT_SIZE or s > y.size // 4 or a > max_level(y.size):
            logger.debug("skipping scale %d: segment size %d outside [4, %d]", a, s, y.size // 4)
            continue
        z = extract_fluctuations(y, wavelet, a)
        columns.append(_fq_column(segment_variances(z, s), q, s))
        kept.append(a)
        sizes.append(s)
    values = np.column_stack(columns) if columns else np.empty((q.size, 0))
    return FluctuationFunction(
        q_grid=q,
        s_grid=np.asarray(sizes, dtype=np.int64),
        values=values,
        scales=tuple(kept),
    )


def generalized_hurst(ff: FluctuationFunction, fit_range: tuple[float, float]) -> HurstFit:
    """
    h(q) as the least-squares slope of ln f_q(s) against ln s.

    arguments:
        `ff: FluctuationFunction`
            fluctuation function table
        `fit_range: tuple[float, float]`
            inclusive [s_lo, s_hi]

    raises:
        `FitRangeError`
            fewer than four segment sizes inside the range

    returns: `HurstFit`
        slopes, r^2 and standard errors per q
    """
    lo, hi = fit_range
    mask = (ff.s_grid >= lo) & (ff.s_grid <= hi)
    if int(mask.sum()) < MIN_FIT_POINTS:
        raise FitRangeError(
            f"only {int(mask.sum())} segment sizes in [{lo:g}, {hi:g}] (need {MIN_FIT_POINTS})"
        )
    log_s = np.log(ff.s_grid[mask].astype(np.float64))
    h = np.empty(ff.q_grid.size)
    r2 = np.empty(ff.q_grid.size)
    stderr = np.empty(ff.q_grid.size)
    for i in range(ff.q_grid.size):
        fit = stats.linregress(log_s, np.log(ff.values[i, mask]))
        h[i] = fit.slope
        r2[i] = fit.rvalue**2
        stderr[i] = fit.stderr
    return HurstFit(q_grid=ff.q_grid, h=h, r2=r2, stderr=stderr, s_used=ff.s_grid[mask])


def scaling_exponent(q_grid: npt.ArrayLike, h: npt.ArrayLike) -> FloatArray:
    """Return tau(q) = q h(q) - 1, pointwise."""
    q = np.asarray(q_grid, dtype=np.float64)
    return q * np.asarray(h, dtype=np.float64) - 1.0


def singularity_spectrum(q_grid: npt.ArrayLike, tau: npt.ArrayLike) -> SingularitySpectrum:
    """
    legendre transform of tau(q).

    beta = d tau / d q by central differences (one-sided at the ends),
    f(beta) = q beta - tau(q).

    raises:
        `GridError`
            fewer than five points or a non-uniform q grid
    """
    q = np.asarray(q_grid, dtype=np.float64)
    t = np.asarray(tau, dtype=np.float64)
    if q.size < MIN_SPECTRUM_POINTS or q.size != t.size:
        raise GridError(f"need at least {MIN_SPECTRUM_POINTS} matching q/tau points")
    steps = np.diff(q)
    if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise GridError("q grid must be uniform and increasing")
    beta = np.gradient(t, q, edge_order=1)
    return SingularitySpectrum(beta=beta, f_beta=q * beta - t)


def spectrum_width(spectrum: MultifractalSpectrum | SingularitySpectrum) -> float:
    """Return beta_max - beta_min."""
    return float(np.max(spectrum.beta) - np.min(spectrum.beta))


def describe(fit: HurstFit) -> MultifractalSpectrum:
    """Assemble tau and the singularity spectrum from a hurst fit."""
    tau = scaling_exponent(fit.q_grid, fit.h)
    legendre = singularity_spectrum(fit.q_grid, tau)
    return MultifractalSpectrum(
        q_grid=fit.q_grid,
        h=fit.h,
        tau=tau,
        beta=legendre.beta,
        f_beta=legendre.f_beta,
        fit_quality=fit.r2,
    )


def analyse_profile(
    profile: Profile,
    wavelet: WaveletFilter,
    settings: MfdfaSettings,
    scale: int | None = None,
) -> MultifractalResult:
    """
    full multifractal analysis of a profile.

    arguments:
        `profile: Profile`
            profile y(t)
        `wavelet: WaveletFilter`
            filter pair
        `settings: MfdfaSettings`
            q grid, fit range and mode
        `scale: int | None`
            scale of the single fluctuation series analysed when
            `settings.scale_coupled` is false (default: the largest usable scale)

    returns: `MultifractalResult`
        fluctuation function, hurst fit and spectrum
    """
    length = len(profile)
    q = np.asarray(settings.q_grid, dtype=np.float64)
    fit_max = settings.fit_max if settings.fit_max is not None else length / 4
    if settings.scale_coupled:
        scales = settings.scales or tuple(range(1, max_level(length) + 1))
        ff = scale_coupled_fluctuation_function(profile, wavelet, scales, q)
    else:
        a = scale if scale is not None else max_level(length)
        z = extract_fluctuations(profile, wavelet, a)
        ff = fluctuation_function(z, q, dyadic_s_grid(length))
    fit = generalized_hurst(ff, (settings.fit_min, fit_max))
    return MultifractalResult(
        fluctuation_function=ff,
        fit=fit,
        spectrum=describe(fit),
        fit_range=(float(settings.fit_min), float(fit_max)),
    )


def analyse_series(
    values: npt.ArrayLike,
    wavelet: WaveletFilter,
    settings: MfdfaSettings | None = None,
    scale: int | None = None,
) -> MultifractalResult:
    """
    normalise an increment series, build its profile and analyse it.

    used for synthetic increments (white noise, cascade measures) that do not
    come from a price panel.
    """
    profile = build_profile(normalize_series(values))
    return analyse_profile(profile, wavelet, settings or MfdfaSettings(), scale=scale)


def analyse_profiles(
    profiles: Sequence[Profile],
    tickers: Sequence[str],
    wavelet: WaveletFilter,
    settings: MfdfaSettings,
    workers: int = 1,
    scale: int | None = None,
    failures: dict[str, str] | None = None,
) -> dict[str, MultifractalResult]:
    """
    analyse every profile of a panel on a bounded thread pool.

    results are keyed by ticker and ordered as `tickers`. without `failures`
    the first scrip error propagates; with it, each failing scrip is recorded
    there as ticker -> describe() and left out of the results.
    """

    def one(item: tuple[str, Profile]) -> MultifractalResult | None:
        ticker, profile = item
        try:
            result = analyse_profile(profile, wavelet, settings, scale=scale)
        except ScalescopeError as exc:
            exc.ticker = ticker
            if failures is None:
                raise
            logger.warning("mfdfa failed: %s", exc.describe())
            failures[ticker] = exc.describe()
            return None
        logger.info("mfdfa done: ticker=%s h(2)=%.4f", ticker, result.spectrum.hurst())
        return result

    items = list(zip(tickers, profiles, strict=True))
    if workers <= 1:
        results = [one(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, items))
    return {
        ticker: result
        for (ticker, _), result in zip(items, results, strict=True)
        if result is not None
    }


def exponent_distribution(results: Mapping[str, MultifractalResult]) -> ExponentDistribution:
    """Collect h(2), beta(q=0) and spectrum width across scrips."""
    tickers = tuple(results)
    hurst = np.array([results[t].spectrum.hurst() for t in tickers])
    beta0 = np.array(
        [results[t].spectrum.beta[_index_of(results[t].spectrum.q_grid, 0.0)] for t in tickers]
    )
    width = np.array([results[t].spectrum.width for t in tickers])
    return ExponentDistribution(tickers=tickers, hurst=hurst, beta0=beta0, width=width)
