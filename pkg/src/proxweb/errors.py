"""Domain errors with stable wire codes.

Every error carries a ``code`` from a closed set so API clients can match
on it without parsing messages. ``detail`` optionally narrows the failure
to a field path or a text position.
"""


class ProxwebError(Exception):
    """Base class for all domain errors."""

    code = "INTERNAL"

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.detail = detail


class InvalidMac(ProxwebError):
    code = "INVALID_MAC"


class DuplicateMac(ProxwebError):
    code = "DUPLICATE_MAC"


class ChannelMismatch(ProxwebError):
    code = "CHANNEL_MISMATCH"


class InvalidNode(ProxwebError):
    code = "INVALID_NODE"


class UnknownMac(ProxwebError):
    code = "UNKNOWN_MAC"


class InvalidChannel(ProxwebError):
    code = "INVALID_CHANNEL"


class InvalidContent(ProxwebError):
    code = "INVALID_CONTENT"


class UnknownContent(ProxwebError):
    code = "UNKNOWN_CONTENT"


class UnknownRule(ProxwebError):
    code = "UNKNOWN_RULE"


class RuleSyntaxError(ProxwebError):
    """DSL parse failure at a 1-based line/column."""

    code = "SYNTAX_ERROR"

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(message, detail=f"line {line}, column {column}")
        self.line = line
        self.column = column


class InvalidThreshold(ProxwebError):
    code = "INVALID_THRESHOLD"


class InvalidRssi(ProxwebError):
    code = "INVALID_RSSI"


class DuplicateObservation(ProxwebError):
    code = "DUPLICATE_OBSERVATION"


class InvalidRange(ProxwebError):
    code = "INVALID_RANGE"


class EmptySalt(ProxwebError):
    code = "EMPTY_SALT"


class InvalidScenario(ProxwebError):
    """Scenario invariant violation; ``field`` is the offending field path."""

    code = "INVALID_SCENARIO"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message, detail=field)
        self.field = field


class CorruptSnapshot(ProxwebError):
    """A persisted file failed to load; ``line`` is the first bad line."""

    code = "CORRUPT_SNAPSHOT"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message, detail=None if line is None else f"line {line}")
        self.line = line


class PortInUse(ProxwebError):
    code = "PORT_IN_USE"


# Closed set of codes an API error body may carry. INVALID_REQUEST covers
# request shapes rejected before any domain operation runs; INTERNAL covers
# unexpected failures.
ERROR_CODES = frozenset(
    cls.code for cls in ProxwebError.__subclasses__()
) | {"INVALID_REQUEST", "INTERNAL"}
