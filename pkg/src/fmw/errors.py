"""Exception hierarchy shared by every module of the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by ``fmw``."""


class ParseError(WorkbenchError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class SignatureError(WorkbenchError):
    """Unknown symbol, arity mismatch, or structures over different signatures."""


class StructureError(WorkbenchError):
    """Malformed structure tables (out of range, partial, extra symbols)."""


class ResourceCapError(WorkbenchError):
    """A configured resource cap would be exceeded."""


class FIPViolation(WorkbenchError):
    """A generator family lacks the finite intersection property."""

    def __init__(self, subfamily, n):
        self.subfamily = tuple(subfamily)
        self.n = n
        parts = "∩".join(format_subset(s, n) for s in self.subfamily)
        super().__init__(f"FIP violation: {parts}=∅")


class MorphismViolation(WorkbenchError):
    """A candidate map fails one of the morphism conditions."""

    def __init__(self, condition, symbol=None, point=None):
        self.condition = condition
        self.symbol = symbol
        self.point = tuple(point) if point is not None else None
        where = ""
        if symbol is not None:
            where = f" at {symbol}({','.join(map(str, self.point))})"
        super().__init__(f"{condition}{where}")


class DiagramViolation(WorkbenchError):
    """A Σ(A)-structure fails a sentence of the (positive or negative) diagram.

    ``atom`` is the atomic sentence involved and ``negated`` tells whether the
    failing sentence is ``atom`` itself or its negation.
    """

    def __init__(self, atom, negated, message=None):
        self.atom = atom
        self.negated = negated
        self.sentence = format_sentence(atom, negated)
        super().__init__(message or f"diagram sentence fails: {self.sentence}")


class QuotientConflict(DiagramViolation):
    """Paired closure found a closed term pair (or relation fact) contradicting diag⁻.

    For an equation ``left = right`` both terms denote the same element of B
    while denoting different elements of A.
    """

    def __init__(self, atom, values=None):
        self.values = values
        msg = f"pairing conflict: {format_sentence(atom, True)} fails"
        if values is not None:
            msg += f" (values in A: {values[0]} vs {values[1]})"
        super().__init__(atom, True, msg)


def format_subset(mask, n):
    return "{" + ",".join(str(i) for i in range(n) if mask >> i & 1) + "}"


def format_sentence(atom, negated):
    from .syntax import Eq

    text = str(atom)
    if not negated:
        return text
    return f"¬({text})" if isinstance(atom, Eq) else f"¬{text}"


class UnknownSymbol(ParseError, SignatureError):
    pass


class ArityMismatch(ParseError, SignatureError):
    pass
