"""
artifact writers shared by every subcommand.

csv tables carry their metadata as leading `# key=value` lines, json reports
carry it under a `metadata` key. both are written deterministically: sorted
keys, fixed float formatting and `\\n` line endings, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from typing_extensions import TypedDict

if TYPE_CHECKING:
    from .config import RunConfig
    from .rmt import GoeFit, MpParams, SpectralResult, SweepReport

logger = logging.getLogger(__name__)

TOOL_NAME = "scalescope"
TOOL_VERSION = "2026.10.19"
FLOAT_FORMAT = "%.17g"


class ArtifactHeader(TypedDict):
    """typed dict for the metadata embedded in every artifact."""

    tool: str
    version: str
    config_sha256: str
    kind: str


class MpDict(TypedDict):
    """typed dict for the marchenko-pastur comparison of one scale."""

    Q: float
    sigma2: float
    lambda_min: float
    lambda_max: float
    inside_fraction: float | None
    chi_square: float | None
    chi_square_pvalue: float | None


class GoeFitDict(TypedDict):
    """typed dict for a spacing-density fit."""

    a: float
    b: float
    ci: list[list[float]]
    ks: float
    convention: str
    bins: int


class ScaleEntryDict(TypedDict):
    """typed dict for one scale of a sweep report."""

    n_series: int
    length: int
    eigenvalues: list[float]
    mp: MpDict | None
    spacings: list[float]
    spacing_ks: float | None
    spacing_ks_pvalue: float | None
    goe_fit: GoeFitDict | None
    error: str | None


def header(config: RunConfig, kind: str) -> ArtifactHeader:
    """
    Metadata block for an artifact of `kind`.

    returns: `ArtifactHeader`
        tool name, version, configuration digest and artifact kind
    """
    return ArtifactHeader(
        tool=TOOL_NAME,
        version=TOOL_VERSION,
        config_sha256=config.digest(),
        kind=kind,
    )


def _jsonable(value: object) -> object:
    """convert numpy scalars/arrays and non-finite floats into plain json values."""
    if isinstance(value, Mapping):
        items = value.items()  # pyright: ignore[reportUnknownVariableType]
        return {str(k): _jsonable(v) for k, v in items}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]  # pyright: ignore[reportUnknownVariableType]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]  # pyright: ignore[reportAny]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


def write_json_report(
    payload: Mapping[str, object], path: str | Path, metadata: Mapping[str, str]
) -> Path:
    """
    write a json report with sorted keys, two-space indent and a trailing newline.

    arguments:
        `payload: Mapping[str, object]`
            report body; numpy values are converted and nan becomes null
        `path: str | Path`
            destination file
        `metadata: Mapping[str, str]`
            stored under the `metadata` key

    returns: `Path`
        the written file
    """
    target = Path(path)
    document = dict(_jsonable(payload))  # type: ignore[call-overload]
    document["metadata"] = dict(metadata)
    text = json.dumps(document, sort_keys=True, indent=2, allow_nan=False)
    with target.open("w", encoding="utf-8", newline="\n") as handle:
        _ = handle.write(text + "\n")
    logger.debug("wrote %s", target)
    return target


def write_csv_table(
    frame: pd.DataFrame,
    path: str | Path,
    metadata: Mapping[str, str] | None = None,
    index: bool = False,
) -> Path:
    """
    write a table as csv behind `# key=value` metadata lines.

    returns: `Path`
        the written file
    """
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="") as handle:
        for key in sorted(metadata or {}):
            _ = handle.write(f"# {key}={(metadata or {})[key]}\n")
        frame.to_csv(handle, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %s (%d rows)", target, len(frame))
    return target


def read_csv_table(path: str | Path) -> tuple[pd.DataFrame, dict[str, str]]:
    """
    read a table written by `write_csv_table`.

    returns: `tuple[pd.DataFrame, dict[str, str]]`
        the table and its metadata lines
    """
    source = Path(path)
    metadata: dict[str, str] = {}
    with source.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            metadata[key.strip()] = value.strip()
    return pd.read_csv(source, comment="#", float_precision="round_trip"), metadata


def _mp_dict(result: SpectralResult, params: MpParams) -> MpDict:
    chi = result.chi_square
    return MpDict(
        Q=params.q,
        sigma2=params.sigma2,
        lambda_min=params.lambda_min,
        lambda_max=params.lambda_max,
        inside_fraction=result.inside_fraction,
        chi_square=None if chi is None else chi.statistic,
        chi_square_pvalue=None if chi is None else chi.pvalue,
    )


def _goe_dict(fit: GoeFit) -> GoeFitDict:
    return GoeFitDict(
        a=fit.a,
        b=fit.b,
        ci=[list(fit.confidence[0]), list(fit.confidence[1])],
        ks=fit.ks_stat,
        convention=fit.convention,
        bins=fit.bins,
    )


def scale_entry(result: SpectralResult) -> ScaleEntryDict:
    """Report entry for one scale."""
    return ScaleEntryDict(
        n_series=result.n_series,
        length=result.length,
        eigenvalues=[float(v) for v in result.eigenvalues],
        mp=None if result.mp is None else _mp_dict(result, result.mp),
        spacings=[float(v) for v in result.spacings],
        spacing_ks=None if math.isnan(result.ks_stat) else result.ks_stat,
        spacing_ks_pvalue=None if math.isnan(result.ks_pvalue) else result.ks_pvalue,
        goe_fit=None if result.goe is None else _goe_dict(result.goe),
        error=result.error,
    )


def sweep_payload(report: SweepReport) -> dict[str, object]:
    """Json body of a sweep: `scales` keyed by scale index plus a `failed` list."""
    return {
        "scales": {str(r.scale): scale_entry(r) for r in report.results},
        "failed": [r.scale for r in report.failed],
    }


def sweep_summary(report: SweepReport) -> pd.DataFrame:
    """One row per scale: inside fraction, spacing ks, goe coefficients, status."""
    rows = [
        {
            "scale": r.scale,
            "n_series": r.n_series,
            "length": r.length,
            "inside_fraction": r.inside_fraction,
            "spacing_ks": r.ks_stat,
            "goe_a": math.nan if r.goe is None else r.goe.a,
            "goe_b": math.nan if r.goe is None else r.goe.b,
            "status": "ok" if r.ok else "failed",
        }
        for r in report.results
    ]
    return pd.DataFrame(rows)
