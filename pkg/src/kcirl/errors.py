"""Exception types shared across the package."""

from __future__ import annotations


class KcirlError(Exception):
    """Base class for all library errors."""


class MalformedTables(KcirlError):
    """Raw input tables are ragged, out of range, or parameters are invalid."""


class LawViolation(KcirlError):
    """A candidate algebra breaks one of the defining laws.

    Carries the name of the first violated law and a witnessing tuple of
    elements, in the fixed law-check order used by ``validate``.
    """

    def __init__(self, law: str, witnesses: tuple[int, ...]):
        self.law = law
        self.witnesses = witnesses
        super().__init__(f"{law} violated at {witnesses}")


class TrivialAlgebra(KcirlError):
    """Operation requires a nontrivial (size >= 2) algebra."""


class NotSI(KcirlError):
    """Operation requires a subdirectly irreducible algebra."""


class NotRefuted(KcirlError):
    """The given valuation does not refute the formula in the host."""


class KMismatch(KcirlError):
    """Two algebras with different potency parameters were combined."""


class UnboundVariable(KcirlError):
    """A formula variable is missing from the valuation's assignment."""


class FormulaSyntaxError(KcirlError):
    """Formula text could not be parsed; ``pos`` is the offset of the error."""

    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} (at position {pos})")


class PreconditionViolation(KcirlError):
    """A stated hypothesis of the operation fails; the message names it."""
