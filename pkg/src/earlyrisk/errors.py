"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: input/validation problems exit 2,
anything else exits 1.
"""


class WorkbenchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WorkbenchError):
    """Input data violates a documented contract (bad corpus, bad labels, ...)."""


class ParseError(ValidationError):
    """Malformed input file; carries the offending location."""

    def __init__(self, message: str, *, path=None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += f" [{path}"
            loc += f":{line}]" if line is not None else "]"
        elif line is not None:
            loc += f" [line {line}]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class ConfigurationError(ValidationError):
    """Unknown provider, inconsistent run options, broken registry, ..."""


class DomainError(WorkbenchError):
    """A precondition on an operation's arguments does not hold."""


class AssemblyError(WorkbenchError):
    """A feature-vector part is missing; carries the part name."""

    def __init__(self, part: str):
        super().__init__(f"missing feature part: {part}")
        self.part = part


class CacheMissError(WorkbenchError):
    """A file-cache embedding provider has no vector for the requested doc."""

    def __init__(self, doc_id: str):
        super().__init__(f"no cached vector for {doc_id!r}")
        self.doc_id = doc_id


class TransportError(WorkbenchError):
    """HTTP round trip failed; carries the status code when there is one."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ProtocolError(WorkbenchError):
    """The round-based submission protocol was violated."""


class AuthError(WorkbenchError):
    """Unknown team token."""
