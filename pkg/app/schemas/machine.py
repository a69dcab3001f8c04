"""Machine schemas."""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import Field, field_validator

from app.schemas.base import DomainModel, FrozenModel, to_fraction

BLANK = "#"

Triple = Tuple[str, str, str]


class MachineKind(str, Enum):
    """Machine kinds understood by the oracle."""
    DTM = "dtm"
    NTM = "ntm"
    PTM = "ptm"
    POSTPTM = "postptm"


class Rule(FrozenModel):
    """One outgoing branch of a (state, input symbol, work symbol) triple."""
    next_state: str
    write: str
    d_in: int = Field(..., ge=-1, le=1)
    d_wk: int = Field(..., ge=-1, le=1)
    probability: Fraction

    @field_validator("probability", mode="before")
    @classmethod
    def coerce_probability(cls, value):
        return to_fraction(value)


class MachineSpec(DomainModel):
    """A space-bounded (post-selecting) probabilistic Turing machine."""
    name: str = "machine"
    kind: MachineKind
    states: List[str]
    initial: str
    accept: str
    reject: str
    nonpost: Optional[str] = None
    input_alphabet: List[str]
    work_alphabet: List[str]
    delta: Dict[Triple, List[Rule]] = Field(default_factory=dict)
    compile_target: bool = False

    @property
    def halting_states(self) -> Tuple[str, ...]:
        states = (self.accept, self.reject)
        if self.nonpost is not None:
            states += (self.nonpost,)
        return states

    def is_halting(self, state: str) -> bool:
        return state in self.halting_states

    @property
    def input_symbols(self) -> List[str]:
        """Σ̃: the input alphabet plus blank."""
        return list(self.input_alphabet) + [BLANK]

    @property
    def work_symbols(self) -> List[str]:
        """Γ̃: the work alphabet plus blank."""
        return list(self.work_alphabet) + [BLANK]

    def state_index(self, state: str) -> int:
        return self.states.index(state)

    def rules(self, state: str, sigma: str, gamma: str) -> List[Rule]:
        return self.delta.get((state, sigma, gamma), [])


class OutcomeDistribution(DomainModel):
    """Exact outcome probabilities of a run."""
    p_acc: Fraction = Fraction(0)
    p_rej: Fraction = Fraction(0)
    p_npost: Fraction = Fraction(0)
    p_nonhalt: Fraction = Fraction(0)
    # step -> probability mass halting (in any halting state) at that step
    halting_time: Dict[int, Fraction] = Field(default_factory=dict)
    max_work_cell: int = 0

    @field_validator("p_acc", "p_rej", "p_npost", "p_nonhalt", mode="before")
    @classmethod
    def coerce_probabilities(cls, value):
        return to_fraction(value)

    @property
    def total(self) -> Fraction:
        return self.p_acc + self.p_rej + self.p_npost + self.p_nonhalt

    @property
    def halting_mass(self) -> Fraction:
        return self.p_acc + self.p_rej


class Finding(FrozenModel):
    """A tagged validation or canonical-form finding."""
    tag: str
    message: str


class CanonicalReport(DomainModel):
    """Result of checking a PTM against the canonical form."""
    is_canonical: bool
    violations: List[Finding] = Field(default_factory=list)

    def tags(self) -> List[str]:
        return [finding.tag for finding in self.violations]
