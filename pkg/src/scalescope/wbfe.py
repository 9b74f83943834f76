"""
wavelet-based fluctuation extraction.

the fluctuation at scale a is the profile minus its low-pass trend t_a. the
extraction is run on the profile and on its time reversal and the two results
are averaged, which is how edge artefacts of the transform are corrected.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import final

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy import stats

from .artifacts import write_csv_table
from .errors import ScalescopeError
from .ingest import PricePanel, Profile, panel_profiles
from .wavelet import WaveletFilter, trend_at_scale

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@final
@dataclass(frozen=True, eq=False)
class FluctuationSeries:
    """
    detrended fluctuations z_a(t) of one profile.

    attributes:
        `scale: int`
            wavelet scale a
        `values: FloatArray`
            fluctuations, same length as the profile
        `edge_corrected: bool`
            whether forward and reversed extractions were averaged
    """

    scale: int
    values: FloatArray
    edge_corrected: bool = True

    def __len__(self) -> int:
        return int(self.values.shape[0])


@final
@dataclass(frozen=True, eq=False)
class FluctuationPanel:
    """
    cross-scrip fluctuation matrix at one scale.

    attributes:
        `scale: int`
            wavelet scale a
        `matrix: FloatArray`
            n x t matrix, one edge-corrected row per scrip
        `tickers: tuple[str, ...]`
            row labels, aligned with the source price panel
    """

    scale: int
    matrix: FloatArray
    tickers: tuple[str, ...]

    @property
    def n_series(self) -> int:
        """number of rows n."""
        return int(self.matrix.shape[0])

    @property
    def length(self) -> int:
        """number of columns t."""
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class FluctuationMoments:
    """low-order moments of a fluctuation series."""

    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float


def _detrend(values: FloatArray, wavelet: WaveletFilter, scale: int) -> FloatArray:
    return values - trend_at_scale(values, wavelet, scale)


def extract_fluctuations(
    profile: Profile | npt.ArrayLike,
    wavelet: WaveletFilter,
    scale: int,
    edge_correct: bool = True,
) -> FluctuationSeries:
    """
    fluctuations z_a = y - t_a(y), averaged with the reversed-profile pass.

    arguments:
        `profile: Profile | npt.ArrayLike`
            profile y(t)
        `wavelet: WaveletFilter`
            filter pair
        `scale: int`
            scale a, 1 <= a <= floor(log2 length)
        `edge_correct: bool`
            average with the time-reversed extraction (default true)

    raises:
        `ScaleRangeError`
            scale outside the usable range

    returns: `FluctuationSeries`
        the (edge-corrected) fluctuations
    """
    y = np.asarray(profile.values if isinstance(profile, Profile) else profile, dtype=np.float64)
    forward = _detrend(y, wavelet, scale)
    if not edge_correct:
        return FluctuationSeries(scale=scale, values=forward, edge_corrected=False)
    backward = _detrend(y[::-1].copy(), wavelet, scale)[::-1]
    return FluctuationSeries(scale=scale, values=0.5 * (forward + backward), edge_corrected=True)


def fluctuation_panel(
    panel: PricePanel | Sequence[Profile],
    wavelet: WaveletFilter,
    scale: int,
    tickers: Sequence[str] | None = None,
) -> FluctuationPanel:
    """
    stack the scale-a fluctuations of every scrip into an n x t matrix.

    arguments:
        `panel: PricePanel | Sequence[Profile]`
            price panel, or profiles already derived from one
        `wavelet: WaveletFilter`
            filter pair
        `scale: int`
            scale a
        `tickers: Sequence[str] | None`
            row labels when profiles are passed directly

    raises:
        `ScalescopeError`
            any per-scrip failure, re-raised with the ticker named

    returns: `FluctuationPanel`
        rows in ticker order
    """
    if isinstance(panel, PricePanel):
        profiles = panel_profiles(panel)
        labels = panel.tickers
    else:
        profiles = list(panel)
        labels = tuple(tickers) if tickers is not None else tuple(
            f"series_{i}" for i in range(len(profiles))
        )
    rows: list[FloatArray] = []
    for ticker, profile in zip(labels, profiles, strict=True):
        try:
            rows.append(extract_fluctuations(profile, wavelet, scale).values)
        except ScalescopeError as exc:
            exc.ticker = ticker
            exc.scale = scale
            raise
        logger.debug("extracted fluctuations: ticker=%s scale=%d", ticker, scale)
    logger.info("fluctuation panel ready: scale=%d scrips=%d", scale, len(rows))
    return FluctuationPanel(scale=scale, matrix=np.vstack(rows), tickers=tuple(labels))


def fluctuation_panels(
    panel: PricePanel,
    wavelet: WaveletFilter,
    scales: Sequence[int],
    workers: int = 1,
) -> list[FluctuationPanel]:
    """
    fluctuation panels for several scales, in the order of `scales`.

    profiles are computed once and shared; scales run on a bounded thread pool.
    """
    profiles = panel_profiles(panel)

    def one(scale: int) -> FluctuationPanel:
        return fluctuation_panel(profiles, wavelet, scale, tickers=panel.tickers)

    if workers <= 1:
        return [one(a) for a in scales]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, scales))


def fluctuation_moments(series: FluctuationSeries | npt.ArrayLike) -> FluctuationMoments:
    """Mean, variance, skewness and excess kurtosis of a fluctuation series."""
    z = np.asarray(
        series.values if isinstance(series, FluctuationSeries) else series, dtype=np.float64
    )
    return FluctuationMoments(
        mean=float(np.mean(z)),
        variance=float(np.var(z)),
        skewness=float(stats.skew(z)),
        excess_kurtosis=float(stats.kurtosis(z)),
    )


def write_fluctuation_panel(
    panel: FluctuationPanel, path: str | Path, metadata: Mapping[str, str] | None = None
) -> Path:
    """
    dump a fluctuation panel as csv, one row per scrip.

    returns: `Path`
        the written file
    """
    frame = pd.DataFrame(panel.matrix, index=pd.Index(panel.tickers, name="ticker"))
    meta = {"scale": str(panel.scale), **(metadata or {})}
    return write_csv_table(frame, path, meta, index=True)
