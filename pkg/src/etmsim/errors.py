"""Exception types shared across the package."""


class ValidationError(ValueError):
    """One or more input fields failed validation.

    Carries the full list of field-level messages so callers can report
    every problem at once instead of stopping at the first.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class ConfigurationError(ValueError):
    """A resolved configuration is internally inconsistent.

    Raised e.g. when an explicitly requested quadrature window leaves
    non-negligible coupling weight at its edge.
    """


class NumericalError(ArithmeticError):
    """A computation produced non-finite or otherwise unusable values."""


class ContractViolation(ValueError):
    """An input object does not satisfy a documented precondition."""
