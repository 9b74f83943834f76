"""shared fixtures for the scalescope tests."""

from __future__ import annotations

import os
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
import pytest

from tests.fixtures import PriceWriter


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep SCALESCOPE_* variables from the calling shell out of the tests."""
    for name in list(os.environ):
        if name.startswith("SCALESCOPE_"):
            monkeypatch.delenv(name)


@pytest.fixture
def business_days() -> pd.DatetimeIndex:
    """120 consecutive business days."""
    return pd.bdate_range("2020-01-01", periods=120)


@pytest.fixture
def write_prices(tmp_path: Path) -> PriceWriter:
    """Factory writing long-format (ticker, date, price) csv files."""

    def _write(
        series: dict[str, tuple[Sequence[pd.Timestamp], Sequence[object]]],
        name: str = "prices.csv",
        header: str = "ticker,date,price",
        delimiter: str = ",",
        preamble: Sequence[str] = (),
    ) -> Path:
        lines = [*preamble, header]
        for ticker, (dates, prices) in series.items():
            for date, price in zip(dates, prices, strict=True):
                lines.append(delimiter.join([ticker, f"{date:%Y-%m-%d}", str(price)]))
        path = tmp_path / name
        _ = path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
