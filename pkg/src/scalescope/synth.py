"""
seeded synthetic generators used as analytic references.

every generator is a pure function of its parameters and seed. gaussian draws
come from pcg64 uniforms through the box-muller transform, so the number of
uniforms consumed never depends on the values drawn.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, final

import numpy as np
import numpy.typing as npt
import pandas as pd

from .artifacts import read_csv_table, write_csv_table
from .errors import SynthParameterError
from .ingest import PricePanel

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

SynthKind = Literal["white_noise", "binomial_cascade", "goe", "wishart_panel"]
SYNTH_KINDS: tuple[str, ...] = ("white_noise", "binomial_cascade", "goe", "wishart_panel")

MIN_CASCADE_LEVELS = 8
MAX_CASCADE_LEVELS = 26
MAX_SEED = 2**64 - 1


@final
@dataclass(frozen=True)
class SyntheticSpec:
    """
    parameters of one synthetic draw.

    attributes:
        `kind: SynthKind`
            generator name
        `seed: int`
            64-bit seed, ignored by the (deterministic) cascade
        `length: int`
            series length (white noise) or panel length t (wishart panel)
        `size: int`
            matrix size (goe) or number of rows n (wishart panel)
        `levels: int`
            cascade depth; the measure has 2^levels cells
        `p: float`
            cascade multiplier in [0.5, 1)
    """

    kind: SynthKind
    seed: int = 7
    length: int = 4096
    size: int = 196
    levels: int = 14
    p: float = 0.75
    extra: Mapping[str, str] = field(default_factory=dict)

    def generate(self) -> FloatArray:
        """Run the generator named by `kind`."""
        if self.kind == "white_noise":
            return white_noise(self.length, self.seed)
        if self.kind == "binomial_cascade":
            return binomial_cascade(self.levels, self.p)
        if self.kind == "goe":
            return goe_matrix(self.size, self.seed)
        if self.kind == "wishart_panel":
            return wishart_panel(self.size, self.length, self.seed)
        raise SynthParameterError(f"unknown synthetic kind '{self.kind}'")

    def metadata(self) -> dict[str, str]:
        """Key/value pairs describing the draw, for fixture headers."""
        meta = {"kind": self.kind, "seed": str(self.seed)}
        if self.kind == "white_noise":
            meta["length"] = str(self.length)
        elif self.kind == "binomial_cascade":
            meta.update(levels=str(self.levels), p=repr(self.p))
        elif self.kind == "goe":
            meta["size"] = str(self.size)
        else:
            meta.update(n_series=str(self.size), length=str(self.length))
        meta.update(self.extra)
        return meta


def make_rng(seed: int) -> np.random.Generator:
    """
    pcg64 generator for a 64-bit seed.

    raises:
        `SynthParameterError`
            seed outside 0..2^64-1
    """
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        raise SynthParameterError(f"seed must be an integer in 0..2^64-1, got {seed!r}")
    return np.random.Generator(np.random.PCG64(seed))


def standard_normals(rng: np.random.Generator, count: int) -> FloatArray:
    """
    `count` standard gaussian draws by box-muller.

    consumes exactly 2 * ceil(count / 2) uniforms; pairs are interleaved
    (cos, sin, cos, sin, ...).
    """
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * math.pi * u2
    return np.column_stack((radius * np.cos(angle), radius * np.sin(angle))).ravel()[:count]


def white_noise(length: int, seed: int) -> FloatArray:
    """
    i.i.d. standard gaussian series.

    raises:
        `SynthParameterError`
            length < 1
    """
    if length < 1:
        raise SynthParameterError(f"length must be positive, got {length}")
    return standard_normals(make_rng(seed), length)


def binomial_cascade(levels: int, p: float) -> FloatArray:
    """
    deterministic binomial multiplicative cascade on 2^levels cells.

    at every depth each cell splits its mass p : 1 - p between its children;
    p goes to the left child on even depths and to the right child on odd
    depths. the dyadic box masses, hence the closed-form h(q), match the
    textbook cascade.

    arguments:
        `levels: int`
            depth, 8..26
        `p: float`
            multiplier in [0.5, 1); 0.5 gives the uniform measure

    raises:
        `SynthParameterError`
            depth or multiplier out of range

    returns: `FloatArray`
        positive measure summing to 1
    """
    if not MIN_CASCADE_LEVELS <= levels <= MAX_CASCADE_LEVELS:
        raise SynthParameterError(
            f"levels must be in {MIN_CASCADE_LEVELS}..{MAX_CASCADE_LEVELS}, got {levels}"
        )
    if not 0.5 <= p < 1.0:
        raise SynthParameterError(f"cascade multiplier must be in [0.5, 1), got {p}")
    measure = np.ones(1, dtype=np.float64)
    for depth in range(levels):
        left = p if depth % 2 == 0 else 1.0 - p
        children = np.empty(2 * measure.size, dtype=np.float64)
        children[0::2] = measure * left
        children[1::2] = measure * (1.0 - left)
        measure = children
    return measure


def cascade_hurst(q: npt.ArrayLike, p: float) -> FloatArray:
    """Closed-form h(q) = 1/q - ln(p^q + (1-p)^q) / (q ln 2) of the cascade."""
    qs = np.asarray(q, dtype=np.float64)
    return 1.0 / qs - np.log(p**qs + (1.0 - p) ** qs) / (qs * math.log(2.0))


def goe_matrix(size: int, seed: int) -> FloatArray:
    """
    gaussian orthogonal ensemble sample (m + m^t) / 2.

    raises:
        `SynthParameterError`
            size < 2
    """
    if size < 2:
        raise SynthParameterError(f"size must be at least 2, got {size}")
    m = standard_normals(make_rng(seed), size * size).reshape(size, size)
    return 0.5 * (m + m.T)


def wishart_panel(n_series: int, length: int, seed: int) -> FloatArray:
    """
    n x t matrix of i.i.d. standard gaussians, shaped like a fluctuation panel.

    raises:
        `SynthParameterError`
            n_series < 2 or length <= n_series
    """
    if n_series < 2 or length <= n_series:
        raise SynthParameterError(
            f"need 2 <= n_series < length, got n_series={n_series} length={length}"
        )
    return standard_normals(make_rng(seed), n_series * length).reshape(n_series, length)


def price_panel_from_returns(
    returns: npt.ArrayLike,
    start_date: str = "2000-01-03",
    tickers: Sequence[str] | None = None,
    volatility: float = 0.01,
    base: float = 100.0,
) -> PricePanel:
    """
    turn an n x t matrix of standardised returns into a price panel.

    prices are base * exp(cumsum(volatility * r)) on business days, with the
    base price on `start_date`.
    """
    r = np.atleast_2d(np.asarray(returns, dtype=np.float64))
    n, t = r.shape
    labels = tuple(tickers) if tickers is not None else tuple(f"S{i:03d}" for i in range(n))
    log_prices = np.concatenate([np.zeros((n, 1)), np.cumsum(volatility * r, axis=1)], axis=1)
    dates = tuple(pd.bdate_range(start=start_date, periods=t + 1))
    return PricePanel(tickers=labels, dates=dates, prices=base * np.exp(log_prices))


def write_fixture(values: npt.ArrayLike, path: str | Path, metadata: Mapping[str, str]) -> Path:
    """
    write a vector or matrix as csv with `# key=value` header lines.

    vectors become one `value` column; matrices keep their row/column layout.
    """
    array = np.asarray(values, dtype=np.float64)
    frame = (
        pd.DataFrame({"value": array})
        if array.ndim == 1
        else pd.DataFrame(array, columns=[f"c{j}" for j in range(array.shape[1])])
    )
    logger.debug("writing fixture %s %s", path, array.shape)
    return write_csv_table(frame, path, metadata)


def read_fixture(path: str | Path) -> tuple[FloatArray, dict[str, str]]:
    """
    read a fixture written by `write_fixture`.

    returns: `tuple[FloatArray, dict[str, str]]`
        the values (1-d for a single `value` column) and the header metadata
    """
    frame, metadata = read_csv_table(path)
    array = frame.to_numpy(dtype=np.float64)
    if list(frame.columns) == ["value"]:
        array = array[:, 0]
    return array, metadata
