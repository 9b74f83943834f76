"""tests for price loading, return normalisation and profiles."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from scalescope.errors import DegenerateSeriesError, IngestError
from scalescope.ingest import (
    ColumnMapping,
    PricePanel,
    build_profile,
    compute_normalized_returns,
    load_price_panel,
    normalize_series,
    panel_profiles,
)
from tests.fixtures import PriceWriter, random_walk_prices


class TestLoadPricePanel:
    """Test load_price_panel."""

    def test_intersection_of_dates(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that only dates shared by every ticker are kept."""
        path = write_prices(
            {
                "AAA": (business_days, random_walk_prices(120, 1)),
                "BBB": (business_days[20:], random_walk_prices(100, 2)),
            }
        )
        panel = load_price_panel(path)

        assert panel.prices.shape == (2, 100)
        assert panel.tickers == ("AAA", "BBB")
        assert panel.dates[0] == business_days[20]
        assert panel.report is not None
        assert panel.report.dropped_dates == 20

    def test_rejects_nonpositive_price(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that a 0.0 price rejects its row and keeps the panel."""
        prices = list(random_walk_prices(120, 1))
        prices[5] = 0.0
        path = write_prices(
            {"AAA": (business_days, prices), "BBB": (business_days, random_walk_prices(120, 2))}
        )
        panel = load_price_panel(path)

        assert panel.report is not None
        assert len(panel.report.rejected_rows) == 1
        rejected = panel.report.rejected_rows[0]
        assert rejected.ticker == "AAA"
        assert rejected.line == 7
        assert "nonpositive" in rejected.reason
        assert panel.prices.shape == (2, 119)

    def test_rejects_bad_values(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test rejection of non-numeric prices, bad dates and duplicates."""
        prices: list[object] = list(random_walk_prices(120, 1))
        prices[3] = "abc"
        path = write_prices(
            {"AAA": (business_days, prices), "BBB": (business_days, random_walk_prices(120, 2))}
        )
        text = path.read_text(encoding="utf-8")
        text += "BBB,2020-13-45,101.0\n"
        text += f"BBB,{business_days[0]:%Y-%m-%d},99.0\n"
        _ = path.write_text(text, encoding="utf-8")
        panel = load_price_panel(path)

        assert panel.report is not None
        reasons = sorted(r.reason.split()[0] for r in panel.report.rejected_rows)
        assert reasons == ["duplicate", "non-numeric", "unparsable"]

    def test_metadata_lines_shift_line_numbers(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that leading # lines are skipped and counted in line numbers."""
        prices = list(random_walk_prices(120, 1))
        prices[5] = -1.0
        path = write_prices(
            {"AAA": (business_days, prices), "BBB": (business_days, random_walk_prices(120, 2))},
            preamble=("# tool=scalescope",),
        )
        panel = load_price_panel(path)

        assert panel.report is not None
        assert panel.report.rejected_rows[0].line == 8

    def test_drops_short_ticker(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that a ticker with too few dates is dropped."""
        path = write_prices(
            {
                "AAA": (business_days, random_walk_prices(120, 1)),
                "BBB": (business_days, random_walk_prices(120, 2)),
                "CCC": (business_days[:10], random_walk_prices(10, 3)),
            }
        )
        panel = load_price_panel(path)

        assert panel.tickers == ("AAA", "BBB")
        assert panel.report is not None
        assert panel.report.dropped_tickers == ["CCC"]
        assert panel.n_returns == 119

    def test_drops_disjoint_ticker(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that a ticker sharing no dates with the rest is dropped, not fatal."""
        elsewhere = pd.bdate_range("2021-06-01", periods=60)
        path = write_prices(
            {
                "AAA": (business_days, random_walk_prices(120, 1)),
                "BBB": (business_days, random_walk_prices(120, 2)),
                "CCC": (elsewhere, random_walk_prices(60, 3)),
            }
        )
        panel = load_price_panel(path)

        assert panel.tickers == ("AAA", "BBB")
        assert panel.prices.shape == (2, 120)
        assert panel.report is not None
        assert panel.report.dropped_tickers == ["CCC"]
        assert panel.report.dropped_dates == 0

    def test_drops_by_common_dates(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that a ticker long enough alone is dropped when it starves the intersection."""
        path = write_prices(
            {
                "AAA": (business_days, random_walk_prices(120, 1)),
                "BBB": (business_days[:70], random_walk_prices(70, 2)),
                "CCC": (business_days[50:], random_walk_prices(70, 3)),
            }
        )
        panel = load_price_panel(path)

        assert panel.tickers == ("AAA", "BBB")
        assert panel.prices.shape == (2, 70)
        assert panel.dates[-1] == business_days[69]
        assert panel.report is not None
        assert panel.report.dropped_tickers == ["CCC"]
        assert panel.report.dropped_dates == 50

    def test_too_few_shared_dates(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that two tickers sharing fewer than the minimum dates is fatal."""
        path = write_prices(
            {
                "AAA": (business_days[:40], random_walk_prices(40, 1)),
                "BBB": (business_days[30:70], random_walk_prices(40, 2)),
            }
        )
        with pytest.raises(IngestError, match="only 10 dates shared"):
            _ = load_price_panel(path)

    def test_first_appearance_order(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that rows follow the order tickers first appear in the file."""
        path = write_prices(
            {
                "ZZZ": (business_days, random_walk_prices(120, 1)),
                "AAA": (business_days, random_walk_prices(120, 2)),
            }
        )
        assert load_price_panel(path).tickers == ("ZZZ", "AAA")

    def test_custom_mapping(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test custom column names and delimiter."""
        path = write_prices(
            {
                "AAA": (business_days, random_walk_prices(120, 1)),
                "BBB": (business_days, random_walk_prices(120, 2)),
            },
            header="symbol;day;close",
            delimiter=";",
        )
        mapping = ColumnMapping(ticker="symbol", date="day", price="close", delimiter=";")
        assert load_price_panel(path, mapping).prices.shape == (2, 120)

    def test_missing_column(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that a missing column is fatal."""
        path = write_prices(
            {"AAA": (business_days, random_walk_prices(120, 1))}, header="symbol,date,price"
        )
        with pytest.raises(IngestError, match="missing columns"):
            _ = load_price_panel(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that a missing file is fatal."""
        with pytest.raises(IngestError, match="not found"):
            _ = load_price_panel(tmp_path / "nope.csv")

    def test_single_ticker(
        self, write_prices: PriceWriter, business_days: pd.DatetimeIndex
    ) -> None:
        """Test that fewer than two surviving tickers is fatal."""
        path = write_prices({"AAA": (business_days, random_walk_prices(120, 1))})
        with pytest.raises(IngestError):
            _ = load_price_panel(path)


class TestPricePanel:
    """Test PricePanel validation and helpers."""

    def _panel(self) -> PricePanel:
        dates = tuple(pd.bdate_range("2021-01-01", periods=40))
        prices = np.vstack([random_walk_prices(40, seed) for seed in (1, 2, 3)])
        return PricePanel(tickers=("A", "B", "C"), dates=dates, prices=prices)

    def test_read_only(self) -> None:
        """Test that the price matrix cannot be written."""
        panel = self._panel()
        with pytest.raises(ValueError):
            panel.prices[0, 0] = 1.0

    def test_reordered(self) -> None:
        """Test that reordering permutes rows."""
        panel = self._panel()
        moved = panel.reordered(["C", "A", "B"])
        np.testing.assert_array_equal(moved.row("C"), panel.row("C"))
        np.testing.assert_array_equal(moved.prices[0], panel.prices[2])

    def test_rejects_unsorted_dates(self) -> None:
        """Test that dates must be strictly increasing."""
        panel = self._panel()
        with pytest.raises(IngestError, match="increasing"):
            _ = PricePanel(tickers=panel.tickers, dates=panel.dates[::-1], prices=panel.prices)

    def test_rejects_nonpositive(self) -> None:
        """Test that a nonpositive price is refused."""
        panel = self._panel()
        prices = panel.prices.copy()
        prices[1, 3] = 0.0
        with pytest.raises(IngestError, match="positive"):
            _ = PricePanel(tickers=panel.tickers, dates=panel.dates, prices=prices)


class TestNormalisation:
    """Test return normalisation."""

    def test_two_point_series(self) -> None:
        """Test that [1, 2] normalises to [-1, 1]."""
        result = normalize_series([1.0, 2.0])
        np.testing.assert_allclose(result.values, [-1.0, 1.0], atol=1e-15)
        assert result.mean_raw == 1.5
        assert result.volatility == 0.5

    def test_moments(self) -> None:
        """Test zero mean and unit population variance."""
        result = compute_normalized_returns(random_walk_prices(500, 11), ticker="AAA")
        assert result.values.size == 499
        assert abs(float(np.mean(result.values))) < 1e-12
        assert abs(float(np.std(result.values)) - 1.0) < 1e-12

    def test_constant_prices(self) -> None:
        """Test that a constant price series is degenerate."""
        with pytest.raises(DegenerateSeriesError) as info:
            _ = compute_normalized_returns(np.full(100, 42.0), ticker="FLAT")
        assert info.value.ticker == "FLAT"

    def test_too_short(self) -> None:
        """Test that fewer than 33 prices is refused."""
        with pytest.raises(IngestError):
            _ = compute_normalized_returns(random_walk_prices(32, 1))

    def test_nonpositive(self) -> None:
        """Test that nonpositive prices are refused."""
        prices = random_walk_prices(64, 1)
        prices[10] = -1.0
        with pytest.raises(IngestError):
            _ = compute_normalized_returns(prices)


class TestBuildProfile:
    """Test build_profile."""

    def test_cumulative_sum(self) -> None:
        """Test that [1, -1, 2] gives [1, 0, 2]."""
        np.testing.assert_array_equal(build_profile([1.0, -1.0, 2.0]).values, [1.0, 0.0, 2.0])

    def test_ends_near_zero(self) -> None:
        """Test that the profile of normalised returns returns to zero."""
        profile = build_profile(normalize_series(np.arange(50.0) ** 1.5))
        assert len(profile) == 50
        assert abs(float(profile.values[-1])) < 1e-10

    def test_reversed(self) -> None:
        """Test the time-reversed profile."""
        profile = build_profile([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(profile.reversed().values, [6.0, 3.0, 1.0])

    def test_panel_profiles(self) -> None:
        """Test one profile per scrip of t returns."""
        dates = tuple(pd.bdate_range("2021-01-01", periods=64))
        prices = np.vstack([random_walk_prices(64, seed) for seed in (1, 2)])
        profiles = panel_profiles(PricePanel(tickers=("A", "B"), dates=dates, prices=prices))
        assert [len(p) for p in profiles] == [63, 63]
