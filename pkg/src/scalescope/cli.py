"""
command-line interface for scalescope.

provides commands for loading price panels, extracting scale-resolved
fluctuations, multifractal and random-matrix analysis, full sweeps and
synthetic fixtures.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd

from .artifacts import (
    TOOL_VERSION,
    header,
    sweep_payload,
    sweep_summary,
    write_csv_table,
    write_json_report,
)
from .config import RunConfig
from .errors import ConfigError, IngestError, ScalescopeError
from .ingest import PricePanel, load_price_panel, panel_profiles, panel_returns
from .mfdfa import (
    MfdfaSettings,
    MultifractalResult,
    analyse_profiles,
    analyse_series,
    exponent_distribution,
)
from .rmt import (
    SpectralResult,
    SweepReport,
    analyse_scale,
    histogram_edges,
    mp_mass,
    scale_sweep,
    wigner_pdf,
)
from .synth import SYNTH_KINDS, SyntheticSpec, price_panel_from_returns, read_fixture, write_fixture
from .wavelet import WaveletFilter, daubechies_filter, max_level
from .wbfe import FluctuationPanel, fluctuation_moments, fluctuation_panels, write_fluctuation_panel

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def _scale_list(text: str) -> list[int]:
    """parse '1-12' or '1,2,5' into a sorted list of scales."""
    scales: set[int] = set()
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                scales.update(range(lo, hi + 1))
            elif part:
                scales.add(int(part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid scale list '{text}'") from exc
    if not scales or min(scales) < 1:
        raise argparse.ArgumentTypeError(f"scale list '{text}' must name positive scales")
    return sorted(scales)


def create_parser() -> argparse.ArgumentParser:
    """
    create the argument parser for the cli.

    returns: `argparse.ArgumentParser`
        configured argument parser
    """
    parser = argparse.ArgumentParser(
        prog="scalescope",
        description="scale-resolved fluctuation, multifractal and random-matrix analysis",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
examples:
  scalescope ingest --input prices.csv            # validate and align a price panel
  scalescope wbfe --input prices.csv --scales 1-6 # fluctuation panels per scale
  scalescope mfdfa --input prices.csv             # h(q) and f(beta) per scrip
  scalescope sweep --input prices.csv             # full analysis over all scales
  scalescope synth --kind goe --size 196          # write a synthetic fixture
  scalescope config show                          # print the effective configuration
        """,
    )
    _ = parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {TOOL_VERSION}",
    )

    common = argparse.ArgumentParser(add_help=False)
    _ = common.add_argument("--config", type=str, help="toml configuration file")
    _ = common.add_argument("--output-dir", "-o", type=str, help="artifact directory")
    _ = common.add_argument("--workers", type=int, help="worker pool size")
    _ = common.add_argument(
        "--quiet", "-q", action="store_true", default=None, help="only log warnings and errors"
    )
    _ = common.add_argument(
        "--debug", action="store_true", help="enable debug logging for troubleshooting"
    )

    source = argparse.ArgumentParser(add_help=False)
    _ = source.add_argument("--input", "-i", type=str, help="long-format price csv")
    _ = source.add_argument(
        "--fixture", type=str, help="synthetic fixture csv written by 'scalescope synth'"
    )
    _ = source.add_argument("--delimiter", type=str, help="field delimiter of the price csv")
    _ = source.add_argument("--ticker-column", type=str, help="column holding tickers")
    _ = source.add_argument("--date-column", type=str, help="column holding dates")
    _ = source.add_argument("--price-column", type=str, help="column holding prices")
    _ = source.add_argument("--min-length", type=int, help="minimum prices per ticker")

    wave = argparse.ArgumentParser(add_help=False)
    _ = wave.add_argument("--wavelet", type=int, help="daubechies index (taps), even in 2..20")
    _ = wave.add_argument("--scales", type=_scale_list, help="scales, e.g. '1-12' or '2,4,6'")

    multifractal = argparse.ArgumentParser(add_help=False)
    _ = multifractal.add_argument("--q-min", type=float, help="smallest moment order")
    _ = multifractal.add_argument("--q-max", type=float, help="largest moment order")
    _ = multifractal.add_argument("--q-step", type=float, help="q grid spacing")
    _ = multifractal.add_argument("--fit-min", type=float, help="smallest segment size fitted")
    _ = multifractal.add_argument("--fit-max", type=float, help="largest segment size fitted")
    _ = multifractal.add_argument(
        "--per-series",
        action="store_true",
        help="fit one fluctuation series over a segment-size grid instead of coupling s to scale",
    )

    spectral = argparse.ArgumentParser(add_help=False)
    _ = spectral.add_argument("--degree", type=int, help="unfolding polynomial degree")
    _ = spectral.add_argument("--bins", type=int, help="explicit histogram bin count")
    _ = spectral.add_argument("--rule", choices=("fd", "sqrt"), help="histogram bin rule")
    _ = spectral.add_argument("--eigensolver", choices=("jacobi", "lapack"), help="eigensolver")
    _ = spectral.add_argument(
        "--convention", choices=("density", "counts"), help="spacing histogram convention"
    )

    subparsers = parser.add_subparsers(dest="command", help="available commands")

    _ = subparsers.add_parser(
        "ingest", parents=[common, source], help="load, validate and align a price panel"
    )
    _ = subparsers.add_parser(
        "wbfe", parents=[common, source, wave], help="extract fluctuation panels per scale"
    )
    _ = subparsers.add_parser(
        "mfdfa",
        parents=[common, source, wave, multifractal],
        help="generalized hurst exponents and singularity spectra",
    )
    _ = subparsers.add_parser(
        "rmt",
        parents=[common, source, wave, spectral],
        help="correlation spectra of fluctuation panels",
    )
    _ = subparsers.add_parser(
        "sweep",
        parents=[common, source, wave, multifractal, spectral],
        help="fluctuation, multifractal and spectral analysis over all scales",
    )

    synth_parser = subparsers.add_parser(
        "synth", parents=[common], help="write a seeded synthetic fixture"
    )
    _ = synth_parser.add_argument("--kind", choices=SYNTH_KINDS, required=True)
    _ = synth_parser.add_argument("--seed", type=int, help="64-bit seed")
    _ = synth_parser.add_argument("--size", type=int, help="goe size or wishart rows")
    _ = synth_parser.add_argument("--length", type=int, help="series or panel length")
    _ = synth_parser.add_argument("--levels", type=int, help="cascade depth")
    _ = synth_parser.add_argument("--p", type=float, help="cascade multiplier")
    _ = synth_parser.add_argument(
        "--as-prices",
        action="store_true",
        help="write a wishart panel as long-format prices instead of a matrix",
    )

    config_parser = subparsers.add_parser(
        "config", parents=[common], help="show or write the effective configuration"
    )
    _ = config_parser.add_argument("action", choices=("show", "init"))

    return parser


def _opt(args: argparse.Namespace, name: str) -> object:
    """read an optional namespace attribute; none when absent or unset."""
    return getattr(args, name, None)  # pyright: ignore[reportAny]


def apply_overrides(args: argparse.Namespace, config: RunConfig) -> RunConfig:
    """
    Apply command-line flags on top of the loaded configuration.

    raises:
        `ConfigError`
            the resulting configuration is invalid

    returns: `RunConfig`
        validated configuration
    """
    top: dict[str, object] = {}
    for flag, key in (("output_dir", "output_dir"), ("workers", "workers"), ("seed", "seed")):
        if (value := _opt(args, flag)) is not None:
            top[key] = value
    if _opt(args, "quiet"):
        top["quiet"] = True

    inputs: dict[str, object] = {}
    for flag, key in (
        ("input", "path"),
        ("delimiter", "delimiter"),
        ("ticker_column", "ticker_column"),
        ("date_column", "date_column"),
        ("price_column", "price_column"),
        ("min_length", "min_length"),
    ):
        if (value := _opt(args, flag)) is not None:
            inputs[key] = value

    wavelet: dict[str, object] = {}
    if (index := _opt(args, "wavelet")) is not None:
        wavelet["index"] = index
    if (scales := _opt(args, "scales")) is not None:
        wavelet["scales"] = scales

    mfdfa: dict[str, object] = {}
    for flag in ("q_min", "q_max", "q_step", "fit_min", "fit_max"):
        if (value := _opt(args, flag)) is not None:
            mfdfa[flag] = value
    if _opt(args, "per_series"):
        mfdfa["scale_coupled"] = False

    rmt: dict[str, object] = {}
    for flag, key in (
        ("degree", "unfolding_degree"),
        ("bins", "bins"),
        ("rule", "histogram_rule"),
        ("eigensolver", "eigensolver"),
        ("convention", "count_convention"),
    ):
        if (value := _opt(args, flag)) is not None:
            rmt[key] = value

    return replace(
        config,
        **top,  # pyright: ignore[reportArgumentType]
        input=replace(config.input, **inputs),  # pyright: ignore[reportArgumentType]
        wavelet=replace(config.wavelet, **wavelet),  # pyright: ignore[reportArgumentType]
        mfdfa=replace(config.mfdfa, **mfdfa),  # pyright: ignore[reportArgumentType]
        rmt=replace(config.rmt, **rmt),  # pyright: ignore[reportArgumentType]
    ).validated()


def configure_logging(debug: bool, quiet: bool) -> None:
    """
    Configure package logging: debug, warnings only, or progress at info.

    arguments:
        `debug: bool`
            log everything
        `quiet: bool`
            log warnings and errors only (ignored with `debug`)
    """
    level = logging.DEBUG if debug else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="[%(name)s] %(message)s")
    logging.getLogger("scalescope").setLevel(level)


@dataclass
class _Source:
    """what a subcommand analyses: a price panel, or one bare increment series."""

    name: str
    panel: PricePanel | None = None
    series: npt.NDArray[np.float64] | None = None


def _load_source(args: argparse.Namespace, config: RunConfig) -> _Source:
    fixture = _opt(args, "fixture")
    if fixture is not None:
        values, meta = read_fixture(str(fixture))
        name = meta.get("kind", "fixture")
        if values.ndim == 2:
            return _Source(name=name, panel=price_panel_from_returns(values))
        return _Source(name=name, series=values)
    if not config.input.path:
        raise IngestError("no input given; pass --input or set input.path")
    panel = load_price_panel(
        config.input.path, config.input.column_mapping(), config.input.min_length
    )
    return _Source(name=Path(config.input.path).stem, panel=panel)


def _require_panel(source: _Source) -> PricePanel:
    if source.panel is None:
        raise IngestError(f"'{source.name}' is a single series; this command needs a panel")
    return source.panel


def _usable_scales(scales: Sequence[int], length: int) -> list[int]:
    top = max_level(length)
    usable = [a for a in scales if a <= top]
    for a in scales:
        if a > top:
            logger.warning("skipping scale %d: series of length %d allows 1..%d", a, length, top)
    if not usable:
        raise ConfigError(f"no configured scale fits a series of length {length} (max {top})")
    return usable


def _output_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _safe_name(ticker: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", ticker)


def _panel_frame(panel: PricePanel, rows: Sequence[npt.NDArray[np.float64]]) -> pd.DataFrame:
    """wide table of per-date values (returns or profiles), one column per ticker."""
    dates = [d.strftime("%Y-%m-%d") for d in panel.dates[1:]]
    frame = pd.DataFrame(np.column_stack(rows), columns=list(panel.tickers))
    frame.insert(0, "date", dates)
    return frame


def handle_ingest(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the ingest command.

    writes returns.csv, profiles.csv and ingest_report.json.

    returns: `int`
        exit code
    """
    panel = _require_panel(_load_source(args, config))
    out = _output_dir(config)
    returns = panel_returns(panel)
    profiles = panel_profiles(panel)
    _ = write_csv_table(
        _panel_frame(panel, [r.values for r in returns]),
        out / "returns.csv",
        header(config, "returns"),
    )
    _ = write_csv_table(
        _panel_frame(panel, [p.values for p in profiles]),
        out / "profiles.csv",
        header(config, "profiles"),
    )
    report = panel.report
    payload: dict[str, object] = {
        "tickers": list(panel.tickers),
        "n_returns": panel.n_returns,
        "first_date": panel.dates[0].strftime("%Y-%m-%d"),
        "last_date": panel.dates[-1].strftime("%Y-%m-%d"),
        "volatility": {t: r.volatility for t, r in zip(panel.tickers, returns, strict=True)},
        "rejected_rows": []
        if report is None
        else [
            {"line": r.line, "ticker": r.ticker, "reason": r.reason} for r in report.rejected_rows
        ],
        "dropped_tickers": [] if report is None else list(report.dropped_tickers),
        "dropped_dates": 0 if report is None else report.dropped_dates,
        "mapping": {
            "ticker": config.input.ticker_column,
            "date": config.input.date_column,
            "price": config.input.price_column,
        },
    }
    _ = write_json_report(payload, out / "ingest_report.json", header(config, "ingest_report"))
    print(f"ingested {panel.n_series} scrips x {panel.n_returns} returns into {out}")
    return EXIT_OK


def _fluctuation_panels(
    panel: PricePanel, wavelet: WaveletFilter, config: RunConfig
) -> list[FluctuationPanel]:
    scales = _usable_scales(config.wavelet.scales, panel.n_returns)
    return fluctuation_panels(panel, wavelet, scales, workers=config.workers)


def _write_fluctuations(
    panels: Sequence[FluctuationPanel], out: Path, config: RunConfig
) -> None:
    moments: list[dict[str, object]] = []
    for fp in panels:
        _ = write_fluctuation_panel(
            fp, out / f"fluctuations_scale_{fp.scale}.csv", header(config, "fluctuations")
        )
        for ticker, row in zip(fp.tickers, fp.matrix, strict=True):
            m = fluctuation_moments(row)
            moments.append(
                {
                    "ticker": ticker,
                    "scale": fp.scale,
                    "mean": m.mean,
                    "variance": m.variance,
                    "skewness": m.skewness,
                    "excess_kurtosis": m.excess_kurtosis,
                }
            )
    _ = write_csv_table(pd.DataFrame(moments), out / "moments.csv", header(config, "moments"))


def handle_wbfe(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the wbfe command.

    writes fluctuations_scale_<a>.csv per scale and moments.csv.

    returns: `int`
        exit code
    """
    panel = _require_panel(_load_source(args, config))
    wavelet = daubechies_filter(config.wavelet.index)
    out = _output_dir(config)
    panels = _fluctuation_panels(panel, wavelet, config)
    _write_fluctuations(panels, out, config)
    print(f"wrote fluctuation panels for scales {[p.scale for p in panels]} into {out}")
    return EXIT_OK


def _run_mfdfa(
    source: _Source, wavelet: WaveletFilter, config: RunConfig, failures: dict[str, str]
) -> dict[str, MultifractalResult]:
    settings: MfdfaSettings = config.mfdfa.settings(config.wavelet.scales)
    if source.series is not None:
        return {source.name: analyse_series(source.series, wavelet, settings)}
    panel = _require_panel(source)
    return analyse_profiles(
        panel_profiles(panel),
        panel.tickers,
        wavelet,
        settings,
        workers=config.workers,
        failures=failures,
    )


def _write_mfdfa(
    results: Mapping[str, MultifractalResult],
    failures: Mapping[str, str],
    out: Path,
    config: RunConfig,
) -> None:
    hurst_rows: list[dict[str, object]] = []
    spectrum_rows: list[dict[str, object]] = []
    for ticker, result in results.items():
        ff = result.fluctuation_function
        table = pd.DataFrame({"s": ff.s_grid})
        if ff.scales:
            table.insert(0, "scale", list(ff.scales))
        for i, q in enumerate(ff.q_grid):
            table[f"F_q={q:g}"] = ff.values[i]
        _ = write_csv_table(table, out / f"fq_{_safe_name(ticker)}.csv", header(config, "fq"))

        spec = result.spectrum
        for i, q in enumerate(spec.q_grid):
            hurst_rows.append(
                {
                    "ticker": ticker,
                    "q": float(q),
                    "h": float(spec.h[i]),
                    "r2": float(result.fit.r2[i]),
                    "stderr": float(result.fit.stderr[i]),
                }
            )
            spectrum_rows.append(
                {
                    "ticker": ticker,
                    "q": float(q),
                    "tau": float(spec.tau[i]),
                    "beta": float(spec.beta[i]),
                    "f_beta": float(spec.f_beta[i]),
                }
            )
    _ = write_csv_table(pd.DataFrame(hurst_rows), out / "hurst.csv", header(config, "hurst"))
    _ = write_csv_table(
        pd.DataFrame(spectrum_rows), out / "spectrum.csv", header(config, "spectrum")
    )

    payload: dict[str, object] = {
        "per_ticker": {},
        "summary": {},
        "fit_range": {t: list(r.fit_range) for t, r in results.items()},
        "failed": dict(failures),
    }
    if results:
        dist = exponent_distribution(results)
        payload["per_ticker"] = {
            t: {"hurst": dist.hurst[i], "beta0": dist.beta0[i], "width": dist.width[i]}
            for i, t in enumerate(dist.tickers)
        }
        payload["summary"] = dist.summary()
    _ = write_json_report(payload, out / "exponents.json", header(config, "exponents"))


def _mfdfa_partial(failures: Mapping[str, str]) -> int:
    for ticker in sorted(failures):
        print(f"scalescope: warning: {failures[ticker]}", file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


def handle_mfdfa(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the mfdfa command.

    writes fq_<ticker>.csv, hurst.csv, spectrum.csv and exponents.json.

    returns: `int`
        exit code (2 when some scrips failed)
    """
    source = _load_source(args, config)
    wavelet = daubechies_filter(config.wavelet.index)
    out = _output_dir(config)
    failures: dict[str, str] = {}
    results = _run_mfdfa(source, wavelet, config, failures)
    _write_mfdfa(results, failures, out, config)
    print(f"analysed {len(results)} series into {out}")
    return _mfdfa_partial(failures)


def _histogram_frames(
    result: SpectralResult, config: RunConfig
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """eigenvalue histogram against the law, and spacing histogram against the surmise."""
    rule = config.rmt.histogram_rule
    edges = histogram_edges(result.eigenvalues, rule, config.rmt.bins)  # type: ignore[arg-type]
    counts, _ = np.histogram(result.eigenvalues, bins=edges)
    widths = np.diff(edges)
    params = result.mp
    expected = (
        np.array([mp_mass(lo, hi, params) for lo, hi in zip(edges[:-1], edges[1:], strict=True)])
        / widths
        if params is not None
        else np.full(widths.size, np.nan)
    )
    eigen = pd.DataFrame(
        {
            "bin_lo": edges[:-1],
            "bin_hi": edges[1:],
            "count": counts,
            "density": counts / (result.eigenvalues.size * widths),
            "mp_density": expected,
        }
    )

    s_edges = histogram_edges(result.spacings, rule, config.rmt.bins)  # type: ignore[arg-type]
    s_counts, _ = np.histogram(result.spacings, bins=s_edges)
    s_widths = np.diff(s_edges)
    centers = 0.5 * (s_edges[:-1] + s_edges[1:])
    spacing = pd.DataFrame(
        {
            "bin_lo": s_edges[:-1],
            "bin_hi": s_edges[1:],
            "count": s_counts,
            "density": s_counts / (max(result.spacings.size, 1) * s_widths),
            "surmise": wigner_pdf(np.clip(centers, 0.0, None)),
        }
    )
    return eigen, spacing


def _write_sweep(report: SweepReport, out: Path, config: RunConfig) -> None:
    for result in report.results:
        if not result.ok:
            continue
        eigen, spacing = _histogram_frames(result, config)
        _ = write_csv_table(
            eigen, out / f"eigen_hist_scale_{result.scale}.csv", header(config, "eigen_hist")
        )
        _ = write_csv_table(
            spacing, out / f"spacing_hist_scale_{result.scale}.csv", header(config, "spacing_hist")
        )
    _ = write_csv_table(sweep_summary(report), out / "summary.csv", header(config, "summary"))
    _ = write_json_report(sweep_payload(report), out / "sweep_report.json", header(config, "sweep"))


def _run_rmt(panels: Sequence[FluctuationPanel], config: RunConfig) -> SweepReport:
    settings = config.rmt.settings()
    if len(panels) >= 2:
        return scale_sweep(panels, settings, workers=config.workers)
    return SweepReport(results=[analyse_scale(panels[0], settings)])


def _report_partial(report: SweepReport) -> int:
    for failed in report.failed:
        print(f"scalescope: warning: {failed.error}", file=sys.stderr)
    return EXIT_PARTIAL if report.partial else EXIT_OK


def handle_rmt(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the rmt command.

    writes sweep_report.json, eigen_hist_scale_<a>.csv, spacing_hist_scale_<a>.csv
    and summary.csv.

    returns: `int`
        exit code (2 when some scales failed)
    """
    panel = _require_panel(_load_source(args, config))
    wavelet = daubechies_filter(config.wavelet.index)
    out = _output_dir(config)
    report = _run_rmt(_fluctuation_panels(panel, wavelet, config), config)
    _write_sweep(report, out, config)
    print(f"analysed {len(report.results)} scales into {out}")
    return _report_partial(report)


def handle_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the sweep command: fluctuations, multifractal and spectral analysis.

    returns: `int`
        exit code (2 when some scrips or scales failed)
    """
    source = _load_source(args, config)
    panel = _require_panel(source)
    wavelet = daubechies_filter(config.wavelet.index)
    out = _output_dir(config)
    panels = _fluctuation_panels(panel, wavelet, config)
    _write_fluctuations(panels, out, config)
    failures: dict[str, str] = {}
    _write_mfdfa(_run_mfdfa(source, wavelet, config, failures), failures, out, config)
    report = _run_rmt(panels, config)
    _write_sweep(report, out, config)
    print(f"swept {len(report.results)} scales over {panel.n_series} scrips into {out}")
    return max(_mfdfa_partial(failures), _report_partial(report))


def handle_synth(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the synth command.

    writes synth_<kind>.csv.

    returns: `int`
        exit code
    """
    kind = str(_opt(args, "kind"))
    overrides = {
        key: value
        for key in ("size", "length", "levels", "p")
        if (value := _opt(args, key)) is not None
    }
    spec = SyntheticSpec(kind=kind, seed=config.seed, **overrides)  # type: ignore[arg-type]
    values = spec.generate()
    out = _output_dir(config)
    target = out / f"synth_{kind}.csv"
    metadata = {**header(config, f"synth_{kind}"), **spec.metadata()}
    if bool(_opt(args, "as_prices")):
        if kind != "wishart_panel":
            raise ConfigError("--as-prices only applies to --kind wishart_panel")
        panel = price_panel_from_returns(values)
        long = pd.DataFrame(
            {
                "ticker": np.repeat(panel.tickers, len(panel.dates)),
                "date": [d.strftime("%Y-%m-%d") for d in panel.dates] * panel.n_series,
                "price": panel.prices.ravel(),
            }
        )
        _ = write_csv_table(long, target, metadata)
    else:
        _ = write_fixture(values, target, metadata)
    print(f"wrote {target}")
    return EXIT_OK


def handle_config(args: argparse.Namespace, config: RunConfig) -> int:
    """
    handle the config command.

    `show` prints the effective configuration; `init` writes it to .scalescope.toml.

    returns: `int`
        exit code
    """
    action = str(_opt(args, "action"))
    text = config.to_toml()
    if action == "show":
        print(text, end="")
        return EXIT_OK
    target = Path(".scalescope.toml")
    if target.exists():
        print(f"scalescope: warning: '{target}' exists, not overwriting", file=sys.stderr)
        return EXIT_FATAL
    _ = target.write_text(text, encoding="utf-8")
    print(f"wrote {target}")
    return EXIT_OK


HANDLERS = {
    "ingest": handle_ingest,
    "wbfe": handle_wbfe,
    "mfdfa": handle_mfdfa,
    "rmt": handle_rmt,
    "sweep": handle_sweep,
    "synth": handle_synth,
    "config": handle_config,
}


def main(argv: Sequence[str] | None = None) -> int:
    """
    run the cli main entry point.

    arguments:
        `argv: Sequence[str] | None`
            command-line arguments (default: sys.argv[1:])

    returns: `int`
        exit code (0 = success, 1 = fatal error, 2 = partial sweep or usage error)
    """
    parser = create_parser()
    args = parser.parse_args(argv)

    cmd_raw = getattr(args, "command", None)
    command = str(cmd_raw) if cmd_raw is not None else None  # pyright: ignore[reportAny]

    if not command:
        parser.print_help()
        return EXIT_PARTIAL

    try:
        config_file = _opt(args, "config")
        config = RunConfig.load(Path.cwd(), str(config_file) if config_file else None)
        config = apply_overrides(args, config)
    except ConfigError as exc:
        print(f"scalescope: error: {exc.describe()}", file=sys.stderr)
        return EXIT_FATAL

    configure_logging(bool(_opt(args, "debug")), config.quiet)

    try:
        return HANDLERS[command](args, config)
    except ScalescopeError as exc:
        print(f"scalescope: error: {exc.describe()}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
