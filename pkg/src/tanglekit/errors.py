"""Exception hierarchy shared by every module."""

from __future__ import annotations

from typing import Any


class TanglekitError(Exception):
    """Base class; ``payload`` carries structured data for JSON reports."""

    def __init__(self, message: str = "", **payload: Any) -> None:
        super().__init__(message or self.__class__.__name__)
        self.payload = payload

    def to_json(self) -> dict:
        out = {"error": self.__class__.__name__, "message": str(self)}
        if self.payload:
            out["data"] = self.payload
        return out


class PartitionMismatch(TanglekitError):
    pass


class UnknownEdge(TanglekitError):
    pass


class UnknownVertex(TanglekitError):
    pass


class TooLarge(TanglekitError):
    pass


class Disconnected(TanglekitError):
    pass


class SameVertex(TanglekitError):
    pass


class GroundSetMismatch(TanglekitError):
    pass


class NonMonotone(TanglekitError):
    pass


class UnknownFamily(TanglekitError):
    pass


class UnknownEnd(TanglekitError):
    pass


class DominatorsUnbounded(TanglekitError):
    pass


class NotCritical(TanglekitError):
    pass


class InsufficientDepth(TanglekitError):
    pass


class NotCofinal(TanglekitError):
    pass


class PendingComponent(TanglekitError):
    pass


class FrontierEdge(TanglekitError):
    pass


class NotComparable(TanglekitError):
    pass


class NotEquivalent(TanglekitError):
    pass


class ThreadEmpty(TanglekitError):
    pass


class EnumerationIncomplete(TanglekitError):
    pass


class CutConditionFailed(TanglekitError):
    pass


class InvalidSeparation(TanglekitError):
    pass


class NotDeltaMember(TanglekitError):
    pass


class AmbientMismatch(TanglekitError):
    pass


class IncompleteSample(TanglekitError):
    pass


class NotInSPrime(TanglekitError):
    pass


class ChainGap(TanglekitError):
    pass
