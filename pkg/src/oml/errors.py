"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class OmlError(Exception):
    """Base class; ``kind`` is a short machine-readable tag."""

    kind = "error"

    def __init__(self, message: str, kind: str | None = None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind


class ParseError(OmlError):
    kind = "syntax"

    def __init__(self, message: str, line: int = 0, column: int = 0, kind: str | None = None):
        super().__init__(f"{line}:{column}: {message}", kind)
        self.line = line
        self.column = column


class UnifyError(OmlError):
    """Unification or matching failure.

    ``kind`` is one of ``clash``, ``occurs``, ``arity``, ``class-mismatch``.
    """

    kind = "clash"


class EntailError(OmlError):
    """``kind``: ``no-matching-axiom``, ``depth-exhausted`` or ``ambiguous-match``."""

    kind = "no-matching-axiom"

    def __init__(self, message: str, kind: str | None = None, pred=None, index: int | None = None):
        super().__init__(message, kind)
        self.pred = pred
        self.index = index


class ContextError(OmlError):
    """Invalid class context: overlap, covering, completeness, arity."""

    kind = "context"

    def __init__(self, message: str, kind: str | None = None, detail: dict | None = None):
        super().__init__(message, kind)
        self.detail = detail or {}


class TypeCheckError(OmlError):
    kind = "type"

    def __init__(self, message: str, kind: str | None = None, site: str | None = None):
        if site:
            message = f"{site}: {message}"
        super().__init__(message, kind)
        self.site = site


class ImprovementClash(OmlError):
    kind = "improvement-clash"

    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


class UniverseError(OmlError):
    """A ground type was demanded outside the finite universe or a carrier is too big."""

    kind = "universe"


class CarrierTooLarge(UniverseError):
    kind = "carrier-too-large"


class InterpError(OmlError):
    kind = "interp"
