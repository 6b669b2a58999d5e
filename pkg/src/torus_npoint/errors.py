"""Exception types shared across the package."""


class MathDomainError(ArithmeticError):
    """A computation left its mathematical domain; ``quantity`` names the culprit."""

    def __init__(self, message: str, quantity: str | None = None):
        super().__init__(message)
        self.quantity = quantity or message


class PoleError(MathDomainError):
    """Evaluation at (or too close to) a pole."""


class SizeCapError(MathDomainError):
    """An enumeration or basis exceeded its configured size cap."""
