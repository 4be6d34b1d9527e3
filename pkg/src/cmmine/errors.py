"""Exception hierarchy shared across the mining pipeline.

Each class maps to one failure mode a caller may want to handle separately;
the CLI translates them into exit codes (see cli.py).
"""


class CmmineError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CmmineError):
    """Bad configuration: unknown key, unparsable value, missing file."""


class MalformedMarkup(CmmineError):
    """Source bytes cannot be decoded under the requested charset."""


class EmptyCorpus(CmmineError):
    """No suitable documents to work with."""


class NoCandidates(CmmineError):
    """A document shares nothing with the dictionary; it cannot be mined."""


class NothingToSelect(CmmineError):
    """Zero propositions survived extraction; no map can be summarized."""


class ConvergenceFailure(CmmineError):
    """The singular value decomposition did not converge."""


class InvalidMap(CmmineError):
    """A concept map violates one of its structural invariants."""


class MapParseError(CmmineError):
    """Malformed serialized map (bad XML, bad TSV line)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(CmmineError):
    """Well-formed XML that does not follow the expected CXL subset."""


class EmptyUniverse(CmmineError):
    """Agreement statistics require a non-empty candidate universe."""


class EmptyConsensus(CmmineError):
    """No proposition is shared by a strict majority of annotators."""
