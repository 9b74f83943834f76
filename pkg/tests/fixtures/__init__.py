"""test fixtures and utilities for scalescope.

this package contains deterministic price series and panel builders
shared by the test modules.
"""

from __future__ import annotations

from .panels import PriceWriter, make_price_panel, random_walk_prices

__all__ = [
    "PriceWriter",
    "make_price_panel",
    "random_walk_prices",
]
