"""
configuration loading for scalescope.

this module handles loading and validation of configuration from
pyproject.toml, .scalescope.toml, an explicit config file and environment
variables, and writes the effective configuration back out as toml.
"""

from __future__ import annotations

import hashlib
import json
import os
import tomllib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .ingest import MIN_LENGTH, ColumnMapping
from .mfdfa import MfdfaSettings, default_q_grid
from .rmt import RmtSettings
from .wavelet import SUPPORTED_INDICES

ENV_PREFIX = "SCALESCOPE_"
MAX_SEED = 2**64 - 1
DEFAULT_OUTPUT_DIR = "scalescope-out"


def _get_nested_dict(parent: dict[str, object], key: str) -> dict[str, object] | None:
    """
    get a nested dict from a parent dict with proper type narrowing.

    arguments:
        `parent: dict[str, object]`
            parent dictionary
        `key: str`
            key to look up

    returns: `dict[str, object] | None`
        the nested dict if it exists and is a dict, otherwise none
    """
    value = parent.get(key)
    if isinstance(value, dict):
        result: dict[str, object] = {}
        for k, v in value.items():  # pyright: ignore[reportUnknownVariableType]
            result[str(k)] = v  # pyright: ignore[reportUnknownArgumentType]
        return result
    return None


def _typed(section: str, key: str, value: object, expected: object) -> Any:
    """check a toml value against the type of its default; ints are accepted for floats."""
    if isinstance(expected, bool):
        ok = isinstance(value, bool)
    elif isinstance(expected, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(expected, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if ok:
            value = float(value)  # type: ignore[arg-type]
    elif isinstance(expected, str):
        ok = isinstance(value, str)
    elif isinstance(expected, list):
        ok = isinstance(value, list) and all(
            isinstance(v, int) and not isinstance(v, bool)
            for v in value  # pyright: ignore[reportUnknownVariableType]
        )
    else:
        ok = True
    if not ok:
        where = f"{section}.{key}" if section else key
        raise ConfigError(f"'{where}' has the wrong type: {value!r}")
    return value


@dataclass
class InputConfig:
    """
    price-panel input settings.

    attributes:
        `path: str`
            csv file with long-format (ticker, date, price) rows
        `delimiter: str`
            field delimiter
        `ticker_column: str`
            column holding the scrip identifier
        `date_column: str`
            column holding the iso date
        `price_column: str`
            column holding the (close or adjusted close) price
        `min_length: int`
            minimum number of valid prices per ticker
    """

    path: str = ""
    delimiter: str = ","
    ticker_column: str = "ticker"
    date_column: str = "date"
    price_column: str = "price"
    min_length: int = MIN_LENGTH

    def column_mapping(self) -> ColumnMapping:
        """Return the loader column mapping."""
        return ColumnMapping(
            ticker=self.ticker_column,
            date=self.date_column,
            price=self.price_column,
            delimiter=self.delimiter,
        )


@dataclass
class WaveletConfig:
    """
    wavelet settings.

    attributes:
        `index: int`
            daubechies index (number of taps)
        `scales: list[int]`
            wavelet scales to analyse
    """

    index: int = 4
    scales: list[int] = field(default_factory=lambda: list(range(1, 13)))


@dataclass
class MfdfaConfig:
    """
    multifractal analysis settings.

    attributes:
        `q_min: float`
            smallest moment order
        `q_max: float`
            largest moment order
        `q_step: float`
            spacing of the uniform q grid
        `fit_min: float`
            smallest segment size in the log-log fit
        `fit_max: float | None`
            largest segment size in the fit; none means a quarter of the series
        `scale_coupled: bool`
            sample f_q at s_a = 2^(a-1) w on each scale's fluctuations
    """

    q_min: float = -5.0
    q_max: float = 5.0
    q_step: float = 0.25
    fit_min: float = 16.0
    fit_max: float | None = None
    scale_coupled: bool = True

    def settings(self, scales: list[int] | tuple[int, ...] = ()) -> MfdfaSettings:
        """Return the analysis settings for `scales`."""
        return MfdfaSettings(
            q_grid=tuple(float(q) for q in default_q_grid(self.q_min, self.q_max, self.q_step)),
            fit_min=self.fit_min,
            fit_max=self.fit_max,
            scale_coupled=self.scale_coupled,
            scales=tuple(scales),
        )


@dataclass
class RmtConfig:
    """
    spectral analysis settings.

    attributes:
        `unfolding_degree: int`
            polynomial degree of the unfolding fit
        `histogram_rule: str`
            "fd" (freedman-diaconis) or "sqrt"
        `bins: int | None`
            explicit histogram bin count
        `standardize_rows: bool`
            standardise fluctuation rows before correlating
        `eigensolver: str`
            "jacobi" or "lapack"
        `count_convention: str`
            "density" or "counts" for the spacing fit
    """

    unfolding_degree: int = 5
    histogram_rule: str = "fd"
    bins: int | None = None
    standardize_rows: bool = True
    eigensolver: str = "jacobi"
    count_convention: str = "density"

    def settings(self) -> RmtSettings:
        """Return the analysis settings."""
        return RmtSettings(
            unfolding_degree=self.unfolding_degree,
            histogram_rule=self.histogram_rule,  # type: ignore[arg-type]
            bins=self.bins,
            standardize_rows=self.standardize_rows,
            eigensolver=self.eigensolver,  # type: ignore[arg-type]
            count_convention=self.count_convention,  # type: ignore[arg-type]
        )


# optional keys whose default is none, with the type they take when set
_OPTIONAL: dict[str, object] = {"fit_max": 0.0, "bins": 0}


def _apply_section(section: Any, name: str, data: dict[str, object]) -> Any:
    """return a copy of a section dataclass with the keys present in `data` replaced."""
    known = {f.name for f in fields(section)}
    changes: dict[str, object] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key '{name}.{key}'")
        default = getattr(section, key)
        template = _OPTIONAL.get(key, default) if default is None else default
        changes[key] = _typed(name, key, value, template)
    return replace(section, **changes)


@dataclass
class RunConfig:
    """
    main configuration class for scalescope.

    attributes:
        `output_dir: str`
            directory artifacts are written to
        `seed: int`
            seed for synthetic subcommands
        `workers: int`
            size of the worker pool
        `quiet: bool`
            only log warnings and errors
        `input: InputConfig`
            price-panel input settings
        `wavelet: WaveletConfig`
            wavelet settings
        `mfdfa: MfdfaConfig`
            multifractal analysis settings
        `rmt: RmtConfig`
            spectral analysis settings
    """

    output_dir: str = DEFAULT_OUTPUT_DIR
    seed: int = 7
    workers: int = 1
    quiet: bool = False
    input: InputConfig = field(default_factory=InputConfig)
    wavelet: WaveletConfig = field(default_factory=WaveletConfig)
    mfdfa: MfdfaConfig = field(default_factory=MfdfaConfig)
    rmt: RmtConfig = field(default_factory=RmtConfig)

    @classmethod
    def from_pyproject_toml(cls, project_root: str | Path) -> RunConfig | None:
        """
        Load configuration from the [tool.scalescope] table of pyproject.toml.

        arguments:
            `project_root: str | Path`
                directory containing pyproject.toml

        raises:
            `ConfigError`
                unparsable file or invalid values

        returns: `RunConfig | None`
            configuration if the table exists, none otherwise
        """
        table = _pyproject_table(Path(project_root))
        return None if table is None else cls().apply(table).validated()

    @classmethod
    def from_scalescope_toml(cls, project_root: str | Path) -> RunConfig | None:
        """
        Load configuration from .scalescope.toml.

        returns: `RunConfig | None`
            configuration if the file exists, none otherwise
        """
        path = Path(project_root).joinpath(".scalescope.toml")
        if not path.exists():
            return None
        return cls().apply(_read_toml(path)).validated()

    @classmethod
    def from_file(cls, path: str | Path) -> RunConfig:
        """
        Load configuration from an explicit toml file.

        raises:
            `ConfigError`
                missing or unparsable file, or invalid values
        """
        target = Path(path)
        if not target.exists():
            raise ConfigError(f"config file not found: {target}")
        return cls().apply(_read_toml(target)).validated()

    @classmethod
    def from_toml_text(cls, text: str) -> RunConfig:
        """
        Parse configuration written by `to_toml`.

        raises:
            `ConfigError`
                syntax errors (with line and column) or invalid values
        """
        try:
            data: dict[str, object] = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid toml: {exc}") from exc
        return cls().apply(data).validated()

    @classmethod
    def load(
        cls,
        project_root: str | Path = ".",
        config_file: str | Path | None = None,
    ) -> RunConfig:
        """
        Load configuration from all available sources.

        sources are applied in order of priority (later overrides earlier):
        1. default values
        2. [tool.scalescope] in pyproject.toml
        3. .scalescope.toml
        4. the explicit `config_file`
        5. environment variables

        raises:
            `ConfigError`
                any source that cannot be parsed or holds invalid values

        returns: `RunConfig`
            merged, validated configuration
        """
        root = Path(project_root)
        config = cls()

        if (table := _pyproject_table(root)) is not None:
            config = config.apply(table)

        dotfile = root.joinpath(".scalescope.toml")
        if dotfile.exists():
            config = config.apply(_read_toml(dotfile))

        if config_file is not None:
            target = Path(config_file)
            if not target.exists():
                raise ConfigError(f"config file not found: {target}")
            config = config.apply(_read_toml(target))

        return config.with_environment().validated()

    def apply(self, data: dict[str, object]) -> RunConfig:
        """
        Return a copy with the keys present in a toml table replaced.

        raises:
            `ConfigError`
                unknown keys or wrongly typed values
        """
        sections = {
            "input": self.input,
            "wavelet": self.wavelet,
            "mfdfa": self.mfdfa,
            "rmt": self.rmt,
        }
        changes: dict[str, object] = {}
        for key, value in data.items():
            if key in sections:
                nested = _get_nested_dict(data, key)
                if nested is None:
                    raise ConfigError(f"'{key}' must be a table")
                changes[key] = _apply_section(sections[key], key, nested)
            elif key in ("output_dir", "seed", "workers", "quiet"):
                changes[key] = _typed("", key, value, getattr(self, key))
            else:
                raise ConfigError(f"unknown key '{key}'")
        return replace(self, **changes)

    def with_environment(self) -> RunConfig:
        """
        Apply SCALESCOPE_* environment variables.

        raises:
            `ConfigError`
                a numeric variable that does not parse
        """
        config = self
        if output_dir := os.environ.get(f"{ENV_PREFIX}OUTPUT_DIR"):
            config = replace(config, output_dir=output_dir)
        for name in ("SEED", "WORKERS"):
            if raw := os.environ.get(f"{ENV_PREFIX}{name}"):
                try:
                    config = replace(config, **{name.lower(): int(raw)})
                except ValueError as exc:
                    raise ConfigError(f"{ENV_PREFIX}{name} is not an integer: {raw!r}") from exc
        if raw := os.environ.get(f"{ENV_PREFIX}WAVELET"):
            try:
                config = replace(config, wavelet=replace(config.wavelet, index=int(raw)))
            except ValueError as exc:
                raise ConfigError(f"{ENV_PREFIX}WAVELET is not an integer: {raw!r}") from exc
        if quiet := os.environ.get(f"{ENV_PREFIX}QUIET"):
            config = replace(config, quiet=quiet.lower() in ("true", "1", "yes"))
        return config

    def validated(self) -> RunConfig:
        """
        Check value ranges and return self.

        raises:
            `ConfigError`
                every invalid value found, joined into one message
        """
        problems: list[str] = []
        if self.wavelet.index not in SUPPORTED_INDICES:
            problems.append(
                f"wavelet.index must be an even integer in 2..20, got {self.wavelet.index}"
            )
        if not self.wavelet.scales or min(self.wavelet.scales) < 1:
            problems.append("wavelet.scales must be a non-empty list of positive integers")
        if self.mfdfa.q_step <= 0.0 or self.mfdfa.q_min >= self.mfdfa.q_max:
            problems.append("mfdfa q grid needs q_min < q_max and q_step > 0")
        if self.mfdfa.fit_min <= 0.0:
            problems.append("mfdfa.fit_min must be positive")
        if self.mfdfa.fit_max is not None and self.mfdfa.fit_max <= self.mfdfa.fit_min:
            problems.append("mfdfa.fit_max must exceed fit_min")
        if self.rmt.unfolding_degree < 3:
            problems.append("rmt.unfolding_degree must be at least 3")
        if self.rmt.histogram_rule not in ("fd", "sqrt"):
            problems.append(f"rmt.histogram_rule must be fd or sqrt, got {self.rmt.histogram_rule}")
        if self.rmt.bins is not None and self.rmt.bins < 1:
            problems.append("rmt.bins must be positive")
        if self.rmt.eigensolver not in ("jacobi", "lapack"):
            problems.append(f"rmt.eigensolver must be jacobi or lapack, got {self.rmt.eigensolver}")
        if self.rmt.count_convention not in ("density", "counts"):
            problems.append("rmt.count_convention must be 'density' or 'counts'")
        if self.workers < 1:
            problems.append("workers must be at least 1")
        if not 0 <= self.seed <= MAX_SEED:
            problems.append("seed must be in 0..2^64-1")
        if self.input.min_length < 1:
            problems.append("input.min_length must be positive")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_toml(self) -> str:
        """
        Serialise the configuration as toml.

        keys whose value is none are omitted; `from_toml_text` reads the result back.

        returns: `str`
            canonical toml text
        """
        lines = [
            f"output_dir = {_toml_value(self.output_dir)}",
            f"seed = {self.seed}",
            f"workers = {self.workers}",
            f"quiet = {_toml_value(self.quiet)}",
        ]
        for name, section in (
            ("input", self.input),
            ("wavelet", self.wavelet),
            ("mfdfa", self.mfdfa),
            ("rmt", self.rmt),
        ):
            lines.append("")
            lines.append(f"[{name}]")
            for f in fields(section):
                value = getattr(section, f.name)
                if value is not None:
                    lines.append(f"{f.name} = {_toml_value(value)}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """
        sha-256 hex digest of the canonical toml text.

        settings that cannot change a result (output directory, worker count,
        quiet) are reset to their defaults first.
        """
        canonical = replace(self, output_dir=DEFAULT_OUTPUT_DIR, workers=1, quiet=False)
        return hashlib.sha256(canonical.to_toml().encode("utf-8")).hexdigest()


def _toml_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        items = [_toml_value(v) for v in value]  # pyright: ignore[reportUnknownVariableType]
        return "[" + ", ".join(items) + "]"
    raise ConfigError(f"cannot serialise {value!r} to toml")


def _read_toml(path: Path) -> dict[str, object]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid toml: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc}") from exc


def _pyproject_table(project_root: Path) -> dict[str, object] | None:
    pyproject = project_root.joinpath("pyproject.toml")
    if not pyproject.exists():
        return None
    tool_section = _get_nested_dict(_read_toml(pyproject), "tool")
    if tool_section is None:
        return None
    return _get_nested_dict(tool_section, "scalescope")
