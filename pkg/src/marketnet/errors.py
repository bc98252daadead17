"""Exception taxonomy shared across the toolkit.

Data-level failures raise a :class:`ToolError` subclass carrying a stable
``code`` string; the CLI maps these onto its diagnostic stream. Programmer
mistakes (wrong types, mismatched lengths, out-of-range knobs) raise plain
``ValueError`` and are not part of the taxonomy.
"""

from __future__ import annotations


class ToolError(Exception):
    """Base class for all data-condition errors raised by marketnet."""

    code = "error"


class ConfigError(ToolError):
    """Invalid or inconsistent configuration (bad key, bad value, missing path)."""

    code = "config"


class ParseError(ToolError):
    """Malformed input file. Carries the 1-based line number when known."""

    code = "parse"

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(ToolError):
    """Input data violates an operation's requirements (empty universe,
    short series, gaps on a required span, degenerate variance, ...)."""

    code = "data"


class UnknownSymbolError(ToolError):
    """A requested ticker does not exist. Carries nearest-match suggestions."""

    code = "symbol"

    def __init__(self, symbol: str, suggestions: tuple[str, ...] = ()):
        message = f"unknown ticker {symbol!r}"
        if suggestions:
            message += "; closest matches: " + ", ".join(suggestions)
        super().__init__(message)
        self.symbol = symbol
        self.suggestions = suggestions


class CliqueLimitError(ToolError):
    """Clique enumeration exceeded the configured cap; the graph is too dense.
    Raise the correlation threshold or the cap."""

    code = "clique-limit"


class InternalError(ToolError):
    """A kernel produced a result that violates its own contract. Always a bug."""

    code = "internal"
