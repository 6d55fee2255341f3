"""Domain errors with stable machine-readable codes.

Every error the toolkit raises on bad input or unsolvable geometry derives
from DomainError and carries a ``code`` string that is safe to put in CLI
JSON output and HTTP error bodies.
"""


class DomainError(Exception):
    """Base class for all recoverable toolkit errors."""

    code = "DomainError"

    def payload(self) -> dict:
        return {"code": self.code, "message": str(self)}


class UnsupportedFormat(DomainError):
    code = "UnsupportedFormat"


class MalformedFile(DomainError):
    code = "MalformedFile"

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        where = ""
        if line is not None:
            where = f" (line {line})"
        elif offset is not None:
            where = f" (byte offset {offset})"
        super().__init__(message + where)
        self.line = line
        self.offset = offset


class EmptyMesh(DomainError):
    code = "EmptyMesh"


class DegenerateGeometry(DomainError):
    code = "DegenerateGeometry"

    def __init__(self, message: str, rank: int | None = None):
        super().__init__(message)
        self.rank = rank


class DegenerateView(DomainError):
    code = "DegenerateView"


class PageTooSmall(DomainError):
    code = "PageTooSmall"


class DisconnectedEndpoints(DomainError):
    code = "DisconnectedEndpoints"

    def __init__(self, component_a: int, component_b: int):
        super().__init__(
            f"endpoints lie on different connected components "
            f"({component_a} and {component_b})"
        )
        self.component_a = component_a
        self.component_b = component_b


class NoPairs(DomainError):
    code = "NoPairs"


class ZeroMeasuredDistance(DomainError):
    code = "ZeroMeasuredDistance"


class NoCorrespondences(DomainError):
    code = "NoCorrespondences"


class MechanismDetected(DomainError):
    code = "MechanismDetected"

    def __init__(self, message: str, motion: list | None = None):
        super().__init__(message)
        # list of (joint_index, dx, dy, dz) describing the unresisted motion
        self.motion = motion or []


class CollinearAnchors(DomainError):
    code = "CollinearAnchors"


class TooManyItems(DomainError):
    code = "TooManyItems"
