"""Exception types shared across the package."""


class TreeRamseyError(Exception):
    """Base class for all package errors."""


class InvalidTree(TreeRamseyError):
    pass


class EnumerationBudgetExceeded(TreeRamseyError):
    pass


class TreeMismatch(TreeRamseyError):
    pass


class NotRegressive(TreeRamseyError):
    pass


class NotAssociative(TreeRamseyError):
    pass


class NotIdempotent(TreeRamseyError):
    pass


class PreconditionFailed(TreeRamseyError):
    pass


class NoIdempotentInStage(TreeRamseyError):
    pass


class NotLayered(TreeRamseyError):
    pass


class InvalidAction(TreeRamseyError):
    pass


class DomainsOverlap(TreeRamseyError):
    pass


class NotAChain(TreeRamseyError):
    pass


class AlphabetMismatch(TreeRamseyError):
    pass


class ModeMismatch(TreeRamseyError):
    pass


class InvalidSubstitution(TreeRamseyError):
    pass


class BudgetExceeded(TreeRamseyError):
    pass


class ArityMismatch(TreeRamseyError):
    pass


class UndefinedProduct(TreeRamseyError):
    pass


class NotIntegerValued(TreeRamseyError):
    def __init__(self, component, point, value):
        super().__init__(f"component {component} takes value {value} at {point}")
        self.component = component
        self.point = point
        self.value = value


class NonzeroAtOrigin(TreeRamseyError):
    pass


class EmptyBox(TreeRamseyError):
    pass


class OutOfWindow(TreeRamseyError):
    pass


class ParseError(TreeRamseyError):
    def __init__(self, line, col, expected, found=None):
        msg = f"line {line}, col {col}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found


class ResolutionError(TreeRamseyError):
    def __init__(self, name, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"undeclared name {name!r}{where}")
        self.name = name
        self.line = line


def syntax_column(err: SyntaxError, text: str) -> int:
    """Zero-based column of a SyntaxError; errors at end of input point past the text."""
    if not err.offset:
        return len(text.rstrip())
    return min(err.offset - 1, len(text))
