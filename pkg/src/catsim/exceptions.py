class ContractViolation(ValueError):
    """An operation was called outside its preconditions."""


class DegenerateStateError(ValueError):
    """A state with (numerically) zero norm cannot be normalized."""


class TruncationError(ValueError):
    """The Fock truncation is too small for the amplitudes in use."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


class ProtocolFailure(ValueError):
    """A measurement inside a protocol reported FAILURE."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
