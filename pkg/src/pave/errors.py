"""Exception hierarchy shared by every pave module."""
from __future__ import annotations


class PaveError(Exception):
    """Base class for all errors raised by pave."""


class NetworkParseError(PaveError):
    """A network or POI file could not be parsed."""


class ValidationError(PaveError, ValueError):
    """A loaded record violates a data invariant; the message names the record."""


class EmptyGraphError(PaveError):
    pass


class UnknownNodeError(PaveError, KeyError):
    def __init__(self, node_id):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self):
        return f"unknown node {self.node_id!r}"


class NoPathError(PaveError):
    def __init__(self, source, target, detail=""):
        msg = f"no path from {source!r} to {target!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.source = source
        self.target = target


class PreconditionError(PaveError, ValueError):
    pass


class MissingSlotError(PaveError, KeyError):
    def __str__(self):
        return f"template slot not supplied: {self.args[0]!r}"


class TransportError(PaveError):
    def __init__(self, message, request_hash):
        super().__init__(f"{message} [request {request_hash}]")
        self.request_hash = request_hash


class MissingFixtureError(PaveError, LookupError):
    def __init__(self, request_hash, fixture_dir):
        super().__init__(f"no fixture for request {request_hash} in {fixture_dir}")
        self.request_hash = request_hash


class SchemaError(PaveError):
    """Model output failed parsing or schema validation after all retries."""

    def __init__(self, stage, message, raw=None, attempts=0):
        super().__init__(f"[{stage}] {message} (after {attempts} attempt(s))")
        self.stage = stage
        self.raw = raw
        self.attempts = attempts


class InvalidDecisionError(PaveError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class StageError(PaveError):
    """Wraps any failure inside the planning pipeline with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
