"""Pipeline configuration: a flat key=value document plus CLI overrides.

Window dates in config and flags are always ISO-8601; ``date_format`` applies
only to the date column of the input data. CLI flags override config keys,
which override the defaults below.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path

from .correlation import DEFAULT_MIN_OVERLAP
from .errors import ConfigError
from .export import EXPORT_FORMATS
from .ingest import CALENDAR_POLICIES, ISO_DATE_FORMAT, ColumnSchema, EOD_FIELDS
from .network import DEFAULT_MAX_CLIQUES
from .returns import RETURN_MODES
from .transfer import DEFAULT_SPLIT, DEFAULT_WINDOW


@dataclass
class PipelineConfig:
    input: str | None = None
    window_start: date | None = None
    window_end: date | None = None
    exclude_symbols: tuple[str, ...] = ()
    date_format: str = ISO_DATE_FORMAT
    calendar_policy: str = "union"
    columns: tuple[tuple[str, str], ...] = ()
    returns_mode: str = "simple"
    min_overlap: int = DEFAULT_MIN_OVERLAP
    threshold: float = 0.5
    format: str = "gexf"
    min_clique_size: int = 3
    max_cliques: int = DEFAULT_MAX_CLIQUES
    attributes: str | None = None
    source: str | None = None
    targets: tuple[str, ...] = ()
    window: int = DEFAULT_WINDOW
    split: float = DEFAULT_SPLIT
    threads: int = 0  # 0 = all cores
    out_dir: str = "out"
    # artifact path overrides (default: <out_dir>/<name>)
    panel: str | None = None
    matrix_out: str | None = None
    pairs_out: str | None = None
    returns_out: str | None = None
    pairs: str | None = None
    graph_out: str | None = None
    transfer_out: str | None = None

    def column_schema(self) -> ColumnSchema:
        return ColumnSchema.from_mapping(dict(self.columns)) if self.columns else ColumnSchema()

    def artifact(self, override: str | None, name: str) -> Path:
        return Path(override) if override else Path(self.out_dir) / name

    def require(self, *names: str) -> None:
        for name in names:
            if not getattr(self, name):
                raise ConfigError(f"missing required setting {name!r}")


def _parse_date(raw: str, key: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected ISO date (YYYY-MM-DD), got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected integer, got {raw!r}") from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected number, got {raw!r}") from None


def parse_symbol_list(raw: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in raw.replace("\n", ",").split(",") if s.strip())


def parse_column_mapping(raw: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"columns: expected logical=actual, got {item!r}")
        logical, _, actual = item.partition("=")
        logical, actual = logical.strip(), actual.strip()
        if logical not in EOD_FIELDS:
            raise ConfigError(
                f"columns: unknown logical field {logical!r} (choose from {EOD_FIELDS})"
            )
        pairs.append((logical, actual))
    return tuple(pairs)


_CONVERTERS = {
    "window_start": _parse_date,
    "window_end": _parse_date,
    "exclude_symbols": lambda raw, key: parse_symbol_list(raw),
    "columns": lambda raw, key: parse_column_mapping(raw),
    "targets": lambda raw, key: parse_symbol_list(raw),
    "min_overlap": _parse_int,
    "min_clique_size": _parse_int,
    "max_cliques": _parse_int,
    "window": _parse_int,
    "threads": _parse_int,
    "threshold": _parse_float,
    "split": _parse_float,
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse a flat ``key = value`` document ('#' starts a comment line)."""
    entries: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {number}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def apply_settings(config: PipelineConfig, entries: dict[str, str]) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    for key, raw in entries.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        converter = _CONVERTERS.get(key)
        value = converter(raw, key) if converter else raw
        setattr(config, key, value)
    return config


def load_config(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))


def validate(config: PipelineConfig) -> PipelineConfig:
    if config.calendar_policy not in CALENDAR_POLICIES:
        raise ConfigError(f"calendar_policy must be one of {CALENDAR_POLICIES}")
    if config.returns_mode not in RETURN_MODES:
        raise ConfigError(f"returns_mode must be one of {RETURN_MODES}")
    if config.format not in EXPORT_FORMATS:
        raise ConfigError(f"format must be one of {EXPORT_FORMATS}")
    if not 0.0 <= config.threshold < 1.0:
        raise ConfigError(f"threshold must be in [0, 1), got {config.threshold}")
    if not 0.0 < config.split < 1.0:
        raise ConfigError(f"split must be in (0, 1), got {config.split}")
    if config.min_overlap < 1:
        raise ConfigError("min_overlap must be >= 1")
    if config.window < 1:
        raise ConfigError("window must be >= 1")
    if config.min_clique_size < 3:
        raise ConfigError("min_clique_size must be >= 3")
    if config.threads < 0:
        raise ConfigError("threads must be >= 0")
    if (config.window_start is None) != (config.window_end is None):
        raise ConfigError("window_start and window_end must be set together")
    if config.window_start is not None and not config.window_start < config.window_end:
        raise ConfigError(
            f"window_start {config.window_start} must precede window_end {config.window_end}"
        )
    if config.input is not None and not Path(config.input).exists():
        raise ConfigError(f"input path does not exist: {config.input}")
    if config.attributes is not None and not Path(config.attributes).exists():
        raise ConfigError(f"attributes file does not exist: {config.attributes}")
    return config
