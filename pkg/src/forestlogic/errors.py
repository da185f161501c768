"""Exception hierarchy shared by all modules."""


class ForestLogicError(Exception):
    """Base class for every error raised by this package."""


class ForestSyntaxError(ForestLogicError, ValueError):
    def __init__(self, message, text=None, position=None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.text = text
        self.position = position


class UnknownSymbolError(ForestLogicError, ValueError):
    def __init__(self, symbol, alphabet=None):
        msg = f"unknown symbol {symbol!r}"
        if alphabet is not None:
            msg += f" (alphabet: {' '.join(alphabet)})"
        super().__init__(msg)
        self.symbol = symbol


class AutomatonError(ForestLogicError, ValueError):
    """An automaton violates one of its structural axioms.

    ``axiom`` names the violated law and ``witness`` holds the offending
    states/letters, so the failure can be rechecked against the tables.
    """

    def __init__(self, message, axiom=None, witness=None):
        super().__init__(message)
        self.axiom = axiom
        self.witness = witness or {}


class AutomatonFormatError(ForestLogicError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CongruenceError(ForestLogicError, ValueError):
    pass


class SizeGuardError(ForestLogicError, ValueError):
    pass


class FormulaSyntaxError(ForestLogicError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.position = position


class SortError(ForestLogicError, ValueError):
    """A tree formula was used where a forest formula is required."""


class CertificateError(ForestLogicError):
    def __init__(self, message, node=None):
        if node is not None:
            message = f"{node}: {message}"
        super().__init__(message)
        self.node = node


class InternalInconsistency(ForestLogicError, RuntimeError):
    """A property guaranteed by the underlying theory failed at runtime."""
