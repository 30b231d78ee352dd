"""Exception hierarchy shared across the engine, builder and service."""
from __future__ import annotations


class RcsesError(Exception):
    """Base class; ``code`` is the machine-readable identifier."""

    code = "Error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details


class UnknownModel(RcsesError):
    code = "UnknownModel"


class UnknownSlot(RcsesError):
    code = "UnknownSlot"


class UnknownValue(RcsesError):
    code = "UnknownValue"


class NotAnswered(RcsesError):
    code = "NotAnswered"


class UnknownRule(RcsesError):
    code = "UnknownRule"


class StaleKb(RcsesError):
    code = "StaleKb"


class EditError(RcsesError):
    code = "EditError"


class PathNotFound(EditError):
    code = "PathNotFound"


class DuplicateName(EditError):
    code = "DuplicateName"


class LastValue(EditError):
    code = "LastValue"


class EmptyRule(EditError):
    code = "EmptyRule"


class DuplicateSlot(EditError):
    code = "DuplicateSlot"


class MissingFile(RcsesError):
    code = "MissingFile"
