"""
scalescope: scale-resolved fluctuation, multifractal and random-matrix analysis.

price panels are turned into normalised-return profiles, detrended at each
dyadic wavelet scale, and the resulting fluctuations are studied two ways:
through their q-th order fluctuation functions (generalized hurst exponents,
singularity spectra) and through the eigenvalue statistics of their
cross-scrip correlation matrices.
"""

from __future__ import annotations

from .artifacts import TOOL_VERSION
from .config import RunConfig
from .errors import ScalescopeError
from .ingest import (
    ColumnMapping,
    PricePanel,
    Profile,
    ReturnSeries,
    build_profile,
    compute_normalized_returns,
    load_price_panel,
)
from .mfdfa import (
    FluctuationFunction,
    MfdfaSettings,
    MultifractalResult,
    MultifractalSpectrum,
    analyse_series,
    fluctuation_function,
    generalized_hurst,
    scaling_exponent,
    segment_variances,
    singularity_spectrum,
)
from .rmt import (
    CorrelationMatrix,
    GoeFit,
    MpParams,
    SpectralResult,
    UnfoldedSpectrum,
    correlation_matrix,
    eigenvalues_sym,
    fit_spacing_density,
    mp_bounds,
    mp_density,
    nn_spacings,
    scale_sweep,
    unfold_eigenvalues,
    wigner_pdf,
)
from .synth import SyntheticSpec, binomial_cascade, goe_matrix, white_noise, wishart_panel
from .wavelet import (
    DwtDecomposition,
    WaveletFilter,
    daubechies_filter,
    dwt_forward,
    dwt_inverse,
    trend_at_scale,
)
from .wbfe import FluctuationPanel, FluctuationSeries, extract_fluctuations, fluctuation_panel

__version__ = TOOL_VERSION

__all__ = [
    "ColumnMapping",
    "CorrelationMatrix",
    "DwtDecomposition",
    "FluctuationFunction",
    "FluctuationPanel",
    "FluctuationSeries",
    "GoeFit",
    "MfdfaSettings",
    "MpParams",
    "MultifractalResult",
    "MultifractalSpectrum",
    "PricePanel",
    "Profile",
    "ReturnSeries",
    "RunConfig",
    "ScalescopeError",
    "SpectralResult",
    "SyntheticSpec",
    "UnfoldedSpectrum",
    "WaveletFilter",
    "__version__",
    "analyse_series",
    "binomial_cascade",
    "build_profile",
    "compute_normalized_returns",
    "correlation_matrix",
    "daubechies_filter",
    "dwt_forward",
    "dwt_inverse",
    "eigenvalues_sym",
    "extract_fluctuations",
    "fit_spacing_density",
    "fluctuation_function",
    "fluctuation_panel",
    "generalized_hurst",
    "goe_matrix",
    "load_price_panel",
    "mp_bounds",
    "mp_density",
    "nn_spacings",
    "scale_sweep",
    "scaling_exponent",
    "segment_variances",
    "singularity_spectrum",
    "trend_at_scale",
    "unfold_eigenvalues",
    "white_noise",
    "wigner_pdf",
    "wishart_panel",
]
