"""
price-panel loading and return normalisation for scalescope.

reads long-format price tables (ticker, date, price), aligns every ticker on
the dates they all share, and turns each row into a zero-mean, unit-variance
log-return series and its cumulative profile.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import takewhile
from pathlib import Path
from typing import final

import numpy as np
import numpy.typing as npt
import pandas as pd

from .errors import DegenerateSeriesError, IngestError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

MIN_LENGTH = 32


@dataclass(frozen=True)
class ColumnMapping:
    """
    how a price file names its columns.

    attributes:
        `ticker: str`
            column holding scrip identifiers
        `date: str`
            column holding iso-8601 dates
        `price: str`
            column holding prices (closes or adjusted closes, recorded as given)
        `delimiter: str`
            field delimiter
    """

    ticker: str = "ticker"
    date: str = "date"
    price: str = "price"
    delimiter: str = ","


@dataclass(frozen=True)
class RejectedRow:
    """a single input row dropped by the loader."""

    line: int
    ticker: str
    reason: str


@dataclass
class IngestReport:
    """
    diagnostics gathered while loading a price panel.

    attributes:
        `source: str`
            path the panel was read from
        `mapping: ColumnMapping`
            column mapping used
        `rejected_rows: list[RejectedRow]`
            rows with non-numeric or nonpositive prices, or unparsable dates
        `dropped_tickers: list[str]`
            tickers with fewer than the minimum number of common dates
        `dropped_dates: int`
            dates present for some but not all surviving tickers
    """

    source: str
    mapping: ColumnMapping
    rejected_rows: list[RejectedRow] = field(default_factory=list)
    dropped_tickers: list[str] = field(default_factory=list)
    dropped_dates: int = 0


@final
@dataclass(frozen=True, eq=False)
class PricePanel:
    """
    aligned matrix of strictly positive prices, one row per scrip.

    attributes:
        `tickers: tuple[str, ...]`
            scrip identifiers, in row order
        `dates: tuple[pd.Timestamp, ...]`
            strictly increasing dates, one per column
        `prices: FloatArray`
            n x (t+1) matrix of prices
        `report: IngestReport | None`
            loader diagnostics, when the panel came from a file
    """

    tickers: tuple[str, ...]
    dates: tuple[pd.Timestamp, ...]
    prices: FloatArray
    report: IngestReport | None = None

    def __post_init__(self) -> None:
        """Validate shape, positivity and date order."""
        prices = np.asarray(self.prices, dtype=np.float64)
        if prices.ndim != 2:
            raise IngestError("price matrix must be two-dimensional")
        n_series, n_dates = prices.shape
        if n_series < 2:
            raise IngestError(f"need at least 2 scrips, got {n_series}")
        if n_series != len(self.tickers) or n_dates != len(self.dates):
            raise IngestError("tickers/dates do not match the price matrix shape")
        if n_dates < MIN_LENGTH:
            raise IngestError(f"need at least {MIN_LENGTH} dates, got {n_dates}")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise IngestError("prices must be finite and strictly positive")
        stamps = pd.DatetimeIndex(self.dates)
        if not stamps.is_monotonic_increasing or not stamps.is_unique:
            raise IngestError("dates must be strictly increasing")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)

    @property
    def n_series(self) -> int:
        """number of scrips n."""
        return int(self.prices.shape[0])

    @property
    def n_returns(self) -> int:
        """number of returns t per scrip."""
        return int(self.prices.shape[1]) - 1

    def row(self, ticker: str) -> FloatArray:
        """Return the price row for `ticker`."""
        return self.prices[self.tickers.index(ticker)]

    def reordered(self, tickers: list[str] | tuple[str, ...]) -> PricePanel:
        """Return a copy with rows permuted to follow `tickers`."""
        order = [self.tickers.index(t) for t in tickers]
        return PricePanel(
            tickers=tuple(tickers),
            dates=self.dates,
            prices=self.prices[order].copy(),
            report=self.report,
        )


@final
@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """
    normalised log-returns r(t) -> r(t) standardised by mean and volatility.

    attributes:
        `values: FloatArray`
            length-t zero-mean, unit population-variance returns
        `mean_raw: float`
            mean of the raw log-returns
        `volatility: float`
            population standard deviation of the raw log-returns
    """

    values: FloatArray
    mean_raw: float
    volatility: float


@final
@dataclass(frozen=True, eq=False)
class Profile:
    """cumulative sum y(t) of normalised returns."""

    values: FloatArray

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def reversed(self) -> Profile:
        """Return the time-reversed profile."""
        return Profile(self.values[::-1].copy())


def _drop_offending_tickers(
    wide: pd.DataFrame, min_length: int, report: IngestReport
) -> pd.DataFrame:
    """
    drop tickers until the surviving ones share at least `min_length` dates.

    tickers with fewer than `min_length` dates of their own go first. after
    that, while the common dates fall short, the ticker whose removal frees the
    most common dates is dropped (ties: fewer own dates, then later in the file).
    """
    counts = wide.notna().sum(axis=0)
    short = [str(t) for t in wide.columns if int(counts[t]) < min_length]
    for ticker in short:
        logger.warning(
            "dropping '%s': only %d dates (< %d)", ticker, int(counts[ticker]), min_length
        )
    wide = wide.drop(columns=short)
    report.dropped_tickers.extend(short)

    while wide.shape[1] > 2:
        present = wide.notna().to_numpy()
        missing = (~present).sum(axis=1)
        shared = int(np.sum(missing == 0))
        if shared >= min_length:
            break
        # dates only this ticker is missing become common once it is gone
        freed = np.sum(~present & (missing == 1)[:, None], axis=0)
        own = present.sum(axis=0)
        worst = max(range(present.shape[1]), key=lambda i: (int(freed[i]), -int(own[i]), int(i)))
        ticker = str(wide.columns[worst])
        logger.warning(
            "dropping '%s': %d tickers share only %d dates (< %d), %d without it",
            ticker,
            wide.shape[1],
            shared,
            min_length,
            shared + int(freed[worst]),
        )
        report.dropped_tickers.append(ticker)
        wide = wide.drop(columns=[ticker])
    return wide.dropna(axis=0, how="all")


def load_price_panel(
    source: str | Path,
    mapping: ColumnMapping | None = None,
    min_length: int = MIN_LENGTH,
) -> PricePanel:
    """
    load and align a long-format price table.

    rows with a non-numeric or nonpositive price, or an unparsable date, are
    rejected individually and logged. the panel keeps only dates present for
    every surviving ticker. tickers with fewer than `min_length` dates are
    dropped with a warning, and while the shared dates still fall short the
    ticker limiting them most is dropped too.

    arguments:
        `source: str | Path`
            csv file with ticker, date and price columns
        `mapping: ColumnMapping | None`
            column names and delimiter (default: ticker/date/price, comma)
        `min_length: int`
            minimum number of common dates per ticker

    raises:
        `IngestError`
            missing file or columns, or fewer than two surviving tickers

    returns: `PricePanel`
        aligned panel with its `IngestReport` attached
    """
    mapping = mapping or ColumnMapping()
    path = Path(source)
    if not path.is_file():
        raise IngestError(f"price file not found: {path}")

    try:
        with path.open(encoding="utf-8") as handle:
            leading = sum(1 for _ in takewhile(lambda line: line.startswith("#"), handle))
        frame = pd.read_csv(
            path, sep=mapping.delimiter, dtype=str, keep_default_na=False, comment="#"
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot parse {path}: {exc}") from exc

    missing = [c for c in (mapping.ticker, mapping.date, mapping.price) if c not in frame.columns]
    if missing:
        raise IngestError(f"{path}: missing columns {missing} (columns: {list(frame.columns)})")

    report = IngestReport(source=str(path), mapping=mapping)
    frame = frame[[mapping.ticker, mapping.date, mapping.price]].copy()
    frame.columns = pd.Index(["ticker", "date", "price"])
    # `# key=value` metadata lines precede the header line
    frame["line"] = np.arange(leading + 2, len(frame) + leading + 2)
    frame["price_value"] = pd.to_numeric(frame["price"], errors="coerce")
    frame["date_value"] = pd.to_datetime(frame["date"], errors="coerce", format="ISO8601")

    bad_price = ~np.isfinite(frame["price_value"].to_numpy(dtype=np.float64, na_value=np.nan))
    nonpositive = frame["price_value"].le(0.0).to_numpy()
    bad_date = frame["date_value"].isna().to_numpy()
    for row in frame[bad_price | nonpositive | bad_date].itertuples(index=False):
        if pd.isna(row.date_value):
            reason = f"unparsable date {row.date!r}"
        elif not np.isfinite(row.price_value):
            reason = f"non-numeric price {row.price!r}"
        else:
            reason = f"nonpositive price {row.price_value!r}"
        report.rejected_rows.append(RejectedRow(int(row.line), str(row.ticker), reason))
        logger.warning("rejected line %d (%s): %s", row.line, row.ticker, reason)

    clean = frame[~(bad_price | nonpositive | bad_date)]
    duplicated = clean.duplicated(subset=["ticker", "date_value"], keep="first")
    for row in clean[duplicated].itertuples(index=False):
        report.rejected_rows.append(
            RejectedRow(int(row.line), str(row.ticker), "duplicate date for ticker")
        )
        logger.warning("rejected line %d (%s): duplicate date", row.line, row.ticker)
    clean = clean[~duplicated]

    wide = clean.pivot(index="date_value", columns="ticker", values="price_value").sort_index()
    # tickers in first-appearance order keep row order deterministic
    order = list(dict.fromkeys(clean["ticker"].astype(str)))
    wide = wide[order]

    wide = _drop_offending_tickers(wide, min_length, report)
    if wide.shape[1] < 2:
        raise IngestError(f"{path}: fewer than 2 tickers survive validation")
    common = wide.dropna(axis=0, how="any")
    report.dropped_dates = int(len(wide) - len(common))
    if len(common) < min_length:
        raise IngestError(
            f"{path}: only {len(common)} dates shared by the last two tickers (need {min_length})"
        )

    logger.info(
        "loaded %d tickers x %d dates from %s (%d rows rejected, %d dates dropped)",
        common.shape[1],
        common.shape[0],
        path,
        len(report.rejected_rows),
        report.dropped_dates,
    )
    return PricePanel(
        tickers=tuple(str(t) for t in common.columns),
        dates=tuple(pd.Timestamp(d) for d in common.index),
        prices=common.to_numpy(dtype=np.float64).T.copy(),
        report=report,
    )


def compute_normalized_returns(prices: npt.ArrayLike, ticker: str | None = None) -> ReturnSeries:
    """
    log-returns standardised to zero mean and unit population variance.

    arguments:
        `prices: npt.ArrayLike`
            one row of a price panel, length >= 33, all positive
        `ticker: str | None`
            ticker for error context

    raises:
        `IngestError`
            too short, or a nonpositive price
        `DegenerateSeriesError`
            constant price series (zero volatility)

    returns: `ReturnSeries`
        normalised returns with the raw mean and volatility
    """
    x = np.asarray(prices, dtype=np.float64)
    if x.ndim != 1 or x.size < MIN_LENGTH + 1:
        raise IngestError(f"need at least {MIN_LENGTH + 1} prices, got {x.size}")
    if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
        raise IngestError("prices must be finite and strictly positive")
    r = np.diff(np.log(x))
    return normalize_series(r, ticker=ticker)


def normalize_series(values: npt.ArrayLike, ticker: str | None = None) -> ReturnSeries:
    """
    standardise an increment series by its mean and population deviation.

    also the entry point for synthetic increments (noise, cascades) that do
    not come from prices.

    raises:
        `DegenerateSeriesError`
            the series has zero (or non-finite) spread
    """
    r = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(r))
    sigma = float(np.std(r))
    if not np.isfinite(sigma) or sigma <= 0.0 or sigma <= 1e-14 * max(abs(mean), 1.0):
        raise DegenerateSeriesError("degenerate series: zero volatility", ticker=ticker)
    centred = (r - mean) / sigma
    # second pass removes the rounding left by the first
    centred -= np.mean(centred)
    centred /= np.std(centred)
    return ReturnSeries(values=centred, mean_raw=mean, volatility=sigma)


def build_profile(returns: ReturnSeries | npt.ArrayLike) -> Profile:
    """
    cumulative sum of normalised returns, y(t) = r(1) + ... + r(t).

    arguments:
        `returns: ReturnSeries | npt.ArrayLike`
            normalised returns (or a raw vector of them)

    returns: `Profile`
        profile of the same length
    """
    values = returns.values if isinstance(returns, ReturnSeries) else np.asarray(returns)
    return Profile(np.cumsum(np.asarray(values, dtype=np.float64)))


def panel_returns(panel: PricePanel) -> list[ReturnSeries]:
    """Normalised returns for every row of `panel`, in ticker order."""
    return [
        compute_normalized_returns(panel.prices[i], ticker=ticker)
        for i, ticker in enumerate(panel.tickers)
    ]


def panel_profiles(panel: PricePanel) -> list[Profile]:
    """Profiles for every row of `panel`, in ticker order."""
    return [build_profile(r) for r in panel_returns(panel)]
