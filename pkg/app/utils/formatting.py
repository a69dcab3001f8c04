"""Report formatting helpers."""

from fractions import Fraction
from typing import Iterable, Tuple, Union

from app.core.config import settings

Scalar = Union[Fraction, float, int, str, bool]


def format_fraction(value: Fraction) -> str:
    """Rational as ``p/q`` in lowest terms (``1/1`` for one)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def format_float(value: float) -> str:
    return format(float(value), settings.FLOAT_FORMAT)


def format_value(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def format_report(pairs: Iterable[Tuple[str, Scalar]]) -> str:
    """One ``key=value`` pair per line."""
    return "\n".join(f"{key}={format_value(value)}" for key, value in pairs)


def format_inline(pairs: Iterable[Tuple[str, Scalar]]) -> str:
    """``key=value`` pairs on a single space separated line."""
    return " ".join(f"{key}={format_value(value)}" for key, value in pairs)
