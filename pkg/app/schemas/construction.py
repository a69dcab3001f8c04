"""Construction schemas."""

from fractions import Fraction

from pydantic import Field, field_validator

from app.schemas.base import DomainModel, to_fraction
from app.schemas.machine import MachineSpec


class RestartMachine(DomainModel):
    """A machine whose ``restart`` state sends it back to the initial configuration."""
    base: MachineSpec
    restart_state: str
    step_budget: int = Field(..., ge=1)
    semantics: str = "restart"


class RestartSemantics(DomainModel):
    """Limiting behavior of a restarting machine."""
    limit_acc: Fraction
    limit_rej: Fraction
    halting_per_episode: Fraction
    expected_episode_length: Fraction
    expected_steps: Fraction

    @field_validator(
        "limit_acc", "limit_rej", "halting_per_episode", "expected_episode_length", "expected_steps",
        mode="before",
    )
    @classmethod
    def coerce_values(cls, value):
        return to_fraction(value)
