# accountant/exceptions.py
from django.core.exceptions import ValidationError


class DomainError(ValidationError, ValueError):
    """An input outside the domain of an accounting operation"""

    def __init__(self, message, code='out_of_range', params=None):
        super().__init__(message, code=code, params=params)

    def __str__(self):
        return self.messages[0] if self.messages else ''


class NumericalError(ArithmeticError):
    """An internal numerical cross-check failed"""


def require(condition: bool, message: str, code: str = 'out_of_range') -> None:
    if not condition:
        raise DomainError(message, code=code)
