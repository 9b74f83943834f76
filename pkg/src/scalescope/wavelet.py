"""
daubechies filter bank and periodic discrete wavelet transform.

filters follow the Db-N naming of the fluctuation-analysis literature, where
N is the number of taps (Db-4 has four taps and two vanishing moments, pywt's
"db2"). the transform runs pywt level by level in periodization mode; odd
lengths are padded by repeating the last sample, which keeps reconstruction
exact at the cost of strict energy conservation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import final

import numpy as np
import numpy.typing as npt
import pywt

from .errors import (
    InconsistentDecompositionError,
    InvalidFilterError,
    ScaleRangeError,
    SignalSizeError,
)

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

FILTER_TOLERANCE = 1e-12
SUPPORTED_INDICES = tuple(range(2, 21, 2))


@final
@dataclass(frozen=True, eq=False)
class WaveletFilter:
    """
    an orthonormal daubechies filter pair.

    attributes:
        `index: int`
            number of taps n (even, 2..20)
        `lowpass: FloatArray`
            scaling filter, sums to sqrt(2)
        `highpass: FloatArray`
            quadrature mirror, highpass[k] = (-1)^k lowpass[n-1-k]
    """

    index: int
    lowpass: FloatArray
    highpass: FloatArray

    @property
    def support_width(self) -> int:
        """support width w of the filter, equal to the number of taps."""
        return self.index

    @property
    def vanishing_moments(self) -> int:
        """number of polynomial degrees annihilated by the highpass filter."""
        return self.index // 2

    @property
    def name(self) -> str:
        """human-readable name, e.g. 'Db-4'."""
        return f"Db-{self.index}"


@final
@dataclass(frozen=True, eq=False)
class DwtDecomposition:
    """
    pyramid of periodic dwt coefficients.

    attributes:
        `approx: list[FloatArray]`
            low-pass coefficients after each level (level 1 first)
        `detail: list[FloatArray]`
            high-pass coefficients of each level (level 1 = finest)
        `levels: int`
            decomposition depth l
        `original_length: int`
            length of the transformed signal
        `lengths: list[int]`
            input length at each level (lengths[0] == original_length)
        `filter_index: int`
            index of the filter used, checked on inversion
    """

    approx: list[FloatArray]
    detail: list[FloatArray]
    levels: int
    original_length: int
    lengths: list[int] = field(default_factory=list)
    filter_index: int = 0

    def with_details_zeroed(self, upto: int | None = None) -> DwtDecomposition:
        """
        Return a copy with detail levels 1..upto replaced by zeros.

        arguments:
            `upto: int | None`
                last level to zero (default: every level)
        """
        last = self.levels if upto is None else upto
        detail = [np.zeros_like(d) if i < last else d.copy() for i, d in enumerate(self.detail)]
        return replace(self, detail=detail)

@lru_cache(maxsize=None)
def _bank(index: int) -> pywt.Wavelet:
    """pywt filter bank for Db-`index`; pywt names daubechies filters by moments."""
    return pywt.Wavelet(f"db{index // 2}")


def _validate_filter(wavelet: WaveletFilter) -> None:
    """check the discrete admissibility conditions; raise on violation."""
    h, g = wavelet.lowpass, wavelet.highpass
    n = wavelet.index
    problems: list[str] = []
    if abs(h.sum() - math.sqrt(2.0)) > FILTER_TOLERANCE:
        problems.append(f"sum(lowpass) = {h.sum()!r}")
    if abs(g.sum()) > FILTER_TOLERANCE:
        problems.append(f"sum(highpass) = {g.sum()!r}")
    if abs(float(h @ g)) > FILTER_TOLERANCE:
        problems.append("lowpass not orthogonal to highpass")
    for shift in range(0, n, 2):
        expected = 1.0 if shift == 0 else 0.0
        hh = float(h[shift:] @ h[: n - shift])
        gg = float(g[shift:] @ g[: n - shift])
        hg = float(h[shift:] @ g[: n - shift])
        gh = float(g[shift:] @ h[: n - shift])
        if (
            abs(hh - expected) > FILTER_TOLERANCE
            or abs(gg - expected) > FILTER_TOLERANCE
            or abs(hg) > FILTER_TOLERANCE
            or abs(gh) > FILTER_TOLERANCE
        ):
            problems.append(f"not orthonormal under shift {shift}")
    if problems:
        raise InvalidFilterError(f"{wavelet.name} failed validation: {'; '.join(problems)}")



@lru_cache(maxsize=None)
def daubechies_filter(index: int) -> WaveletFilter:
    """
    build the Db-`index` filter pair.

    the scaling coefficients come from pywt's published daubechies table and
    are checked against the admissibility conditions before first use.

    arguments:
        `index: int`
            even number of taps in 2..20

    raises:
        `InvalidFilterError`
            odd or out-of-range index, or coefficients failing validation

    returns: `WaveletFilter`
        validated, immutable filter pair (cached per index)
    """
    if isinstance(index, bool) or not isinstance(index, int) or index not in SUPPORTED_INDICES:
        raise InvalidFilterError(f"Db-{index}: index must be an even integer in 2..20")
    lowpass = np.array(_bank(index).rec_lo, dtype=np.float64)
    if lowpass.size != index:
        raise InvalidFilterError(f"Db-{index}: pywt returned {lowpass.size} taps")
    signs = np.where(np.arange(index) % 2 == 0, 1.0, -1.0)
    highpass = np.ascontiguousarray(signs * lowpass[::-1])
    lowpass.setflags(write=False)
    highpass.setflags(write=False)
    wavelet = WaveletFilter(index=index, lowpass=lowpass, highpass=highpass)
    _validate_filter(wavelet)
    logger.debug("built %s: %s", wavelet.name, lowpass)
    return wavelet


def max_level(length: int) -> int:
    """Largest usable decomposition depth, floor(log2 length)."""
    if length < 1:
        return 0
    return length.bit_length() - 1



def _padded(x: FloatArray) -> FloatArray:
    """repeat the last sample of an odd-length signal."""
    return np.append(x, x[-1]) if x.size % 2 else x


def dwt_forward(signal: npt.ArrayLike, wavelet: WaveletFilter, levels: int) -> DwtDecomposition:
    """
    multi-level periodic discrete wavelet transform.

    each level is one `pywt.dwt` step in periodization mode, so a level of
    length n yields ceil(n/2) approximation and detail coefficients.

    arguments:
        `signal: npt.ArrayLike`
            one-dimensional real signal, at least as long as the filter
        `wavelet: WaveletFilter`
            filter pair
        `levels: int`
            depth, 1 <= levels <= floor(log2 length)

    raises:
        `SignalSizeError`
            signal shorter than the filter support
        `ScaleRangeError`
            depth outside the usable range

    returns: `DwtDecomposition`
        per-level approximation and detail coefficients
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise SignalSizeError("signal must be one-dimensional")
    if x.size < wavelet.support_width:
        raise SignalSizeError(
            f"signal of length {x.size} shorter than {wavelet.name} support {wavelet.support_width}"
        )
    top = max_level(x.size)
    if levels < 1 or levels > top:
        raise ScaleRangeError(levels, top)

    bank = _bank(wavelet.index)
    approx: list[FloatArray] = []
    detail: list[FloatArray] = []
    lengths: list[int] = []
    current = x
    for _ in range(levels):
        lengths.append(current.size)
        c, d = pywt.dwt(_padded(current), bank, mode="periodization")
        approx.append(np.asarray(c, dtype=np.float64))
        detail.append(np.asarray(d, dtype=np.float64))
        current = approx[-1]
    return DwtDecomposition(
        approx=approx,
        detail=detail,
        levels=levels,
        original_length=x.size,
        lengths=lengths,
        filter_index=wavelet.index,
    )


def dwt_inverse(decomp: DwtDecomposition, wavelet: WaveletFilter) -> FloatArray:
    """
    invert a periodic dwt.

    raises:
        `InconsistentDecompositionError`
            filter differs from the one used forward, or level metadata is broken

    returns: `FloatArray`
        reconstructed signal of length `decomp.original_length`
    """
    if decomp.filter_index != wavelet.index:
        raise InconsistentDecompositionError(
            f"decomposition made with Db-{decomp.filter_index}, inverted with {wavelet.name}"
        )
    if not (
        decomp.levels >= 1
        and len(decomp.approx) == decomp.levels
        and len(decomp.detail) == decomp.levels
        and len(decomp.lengths) == decomp.levels
        and decomp.lengths[0] == decomp.original_length
    ):
        raise InconsistentDecompositionError("decomposition level metadata is inconsistent")
    bank = _bank(wavelet.index)
    current = np.asarray(decomp.approx[-1], dtype=np.float64)
    for level in reversed(range(decomp.levels)):
        d = np.asarray(decomp.detail[level], dtype=np.float64)
        if d.size != current.size or (decomp.lengths[level] + 1) // 2 != current.size:
            raise InconsistentDecompositionError(f"coefficient count mismatch at level {level + 1}")
        rebuilt = pywt.idwt(current, d, bank, mode="periodization")
        current = np.asarray(rebuilt[: decomp.lengths[level]], dtype=np.float64)
    return current


def trend_at_scale(
    profile: npt.ArrayLike, wavelet: WaveletFilter, scale: int
) -> FloatArray:
    """
    low-pass reconstruction t_a(t) of a signal at scale a.

    forward transform to depth a, zero detail levels 1..a, invert.

    raises:
        `ScaleRangeError`
            scale outside 1..floor(log2 length)
    """
    values = getattr(profile, "values", profile)
    x = np.asarray(values, dtype=np.float64)
    top = max_level(x.size)
    if scale < 1 or scale > top:
        raise ScaleRangeError(scale, top)
    decomp = dwt_forward(x, wavelet, scale)
    return dwt_inverse(decomp.with_details_zeroed(), wavelet)


def detail_at_scale(signal: npt.ArrayLike, wavelet: WaveletFilter, scale: int) -> FloatArray:
    """Band reconstruction of detail level `scale` alone."""
    x = np.asarray(getattr(signal, "values", signal), dtype=np.float64)
    top = max_level(x.size)
    if scale < 1 or scale > top:
        raise ScaleRangeError(scale, top)
    decomp = dwt_forward(x, wavelet, scale)
    band = replace(
        decomp,
        approx=[np.zeros_like(c) for c in decomp.approx],
        detail=[d if i == scale - 1 else np.zeros_like(d) for i, d in enumerate(decomp.detail)],
    )
    return dwt_inverse(band, wavelet)
