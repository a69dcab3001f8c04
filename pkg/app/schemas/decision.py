"""Amplification and decision schemas."""

from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import Field, field_validator

from app.schemas.base import DomainModel, to_fraction
from app.schemas.quantum import StateVector


class AmplifierParams(DomainModel):
    """One amplifier run M[p] on a prepared decision state."""
    T: int = Field(..., ge=1)
    p: int = Field(..., ge=0)

    @property
    def steps(self) -> int:
        """Applications of the iteration operator: T - p."""
        return self.T - self.p


class PreparedDecision(DomainModel):
    """ũ for one (machine, input, clock), reused by every M[p]."""
    machine: str
    input_word: str
    T: int
    space_bound: int
    acceptance: Fraction
    u_tilde: StateVector
    width: int
    gates: int

    @field_validator("acceptance", mode="before")
    @classmethod
    def coerce_acceptance(cls, value):
        return to_fraction(value)


class RunRecord(DomainModel):
    """Outcome statistics of one M[p]."""
    p: int
    steps: int
    p_plus: float
    p_minus: float
    outcome: Optional[str] = None
    quadrant: str
    log2_survival: float
    u0: float
    u1: float


class DecisionTrace(DomainModel):
    """The full p-sweep and the decision it implies."""
    acceptance: Fraction
    T: int
    records: List[RunRecord] = Field(default_factory=list)
    counter: int
    outcome: str
    p_allplus: float
    p_allminus: float
    p_acc: float
    p_rej: float
    verdict: str
    product_ratio: float
    covering_p: Optional[int] = None
    sample_counts: Dict[str, int] = Field(default_factory=dict)

    @field_validator("acceptance", mode="before")
    @classmethod
    def coerce_acceptance(cls, value):
        return to_fraction(value)


class BoundScan(DomainModel):
    """Exact check of the covering run for every dyadic acceptance at one clock."""
    T: int
    checked: int
    failures: List[int] = Field(default_factory=list)
    min_correct: Fraction


class BoundsReport(DomainModel):
    y_plus: float
    y_prime_minus: float
    bound: Fraction
    exceeds_seven_tenths: bool
    scans: List[BoundScan] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.exceeds_seven_tenths and all(not scan.failures for scan in self.scans)


class CoeqResult(DomainModel):
    acceptance: Fraction
    T: int
    p_acc: float
    p_rej: float
    verdict: str
