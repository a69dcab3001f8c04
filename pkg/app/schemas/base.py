"""Schema base classes."""

from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict


class DomainModel(BaseModel):
    """Base for domain schemas carrying Fractions or numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True)


class FrozenModel(BaseModel):
    """Immutable, hashable value schema."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def to_fraction(value: Any) -> Any:
    """Coerce ints, strings and Fractions to Fraction; leave the rest to validation."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        return Fraction(value)
    return value
