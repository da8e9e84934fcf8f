"""Exception types shared across the package."""


class MttError(Exception):
    """Base class for all errors raised by this package."""


class ArityError(MttError):
    """A symbol was applied to the wrong number of children."""


class ParseError(MttError):
    """Syntax error in a spec file, with source location."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = "line %d:%d: %s" % (line, col if col is not None else 0, message)
        super().__init__(message)


class ValidationError(MttError):
    """A transducer or automaton failed well-formedness validation."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


class DomainError(MttError):
    """Evaluation hit a (state, input symbol) pair without a rule."""

    def __init__(self, state, insym, subtree):
        self.state = state
        self.insym = insym
        self.subtree = subtree
        super().__init__("no rule for state %s on input symbol %s" % (state.name, insym.name))


class EmptyDomainError(MttError):
    """The automaton accepts no tree from its initial state."""


class InternalInvariantError(MttError):
    """An internal invariant was violated; indicates a bug, not bad input."""
