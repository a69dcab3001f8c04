"""Probabilistic circuit schemas."""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import Field, model_validator

from app.schemas.base import DomainModel, FrozenModel
from app.schemas.config_space import ConfigLayout

MAX_ARITY = 4


class GateKind(str, Enum):
    COIN = "coin"
    DET = "det"
    RESET = "reset"


class Gate(FrozenModel):
    """A coin, deterministic or reset gate on at most four wires.

    For ``det`` gates, ``table[x]`` is the output index for input index ``x``;
    bit ``k-1-i`` of an index is the value on ``targets[i]`` (targets[0] is the MSB).
    """
    kind: GateKind
    targets: Tuple[int, ...]
    table: Optional[Tuple[int, ...]] = None
    value: Optional[int] = None
    label: Optional[str] = None

    @model_validator(mode="after")
    def check_shape(self):
        arity = len(self.targets)
        if not 1 <= arity <= MAX_ARITY or len(set(self.targets)) != arity:
            raise ValueError("a gate acts on 1 to 4 distinct wires")
        if self.kind == GateKind.COIN and arity != 1:
            raise ValueError("coin gates act on exactly one wire")
        if self.kind == GateKind.RESET and (arity != 1 or self.value not in (0, 1)):
            raise ValueError("reset gates force one wire to 0 or 1")
        if self.kind == GateKind.DET:
            size = 2 ** arity
            if self.table is None or len(self.table) != size or any(not 0 <= out < size for out in self.table):
                raise ValueError("det gates need a total table over their arity")
        return self

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def signature(self) -> Tuple:
        """Wire-independent identity of the gate's action."""
        return (self.kind.value, self.table, self.value)

    def is_identity(self) -> bool:
        return self.kind == GateKind.DET and all(out == index for index, out in enumerate(self.table))


class WireLayout(FrozenModel):
    """Named wires: random bit, block control, configuration control, register, auxiliaries."""
    random: int = 0
    block_control: int = 1
    config_control: int = 2
    register_start: int = 3
    register_width: int
    aux_count: int = 0

    @property
    def aux_start(self) -> int:
        return self.register_start + self.register_width

    @property
    def width(self) -> int:
        return self.aux_start + self.aux_count

    @property
    def register(self) -> List[int]:
        return list(range(self.register_start, self.aux_start))


class ProbCircuit(DomainModel):
    """Gate program K with block/part markers ``(gate index, label)``."""
    width: int
    gates: List[Gate] = Field(default_factory=list)
    layout: WireLayout
    config_layout: ConfigLayout
    markers: List[Tuple[int, str]] = Field(default_factory=list)
    T: int
    accept_bits: str
    header: Optional[str] = None

    def block_checkpoints(self) -> List[int]:
        """Gate indices at which v_0 … v_T can be read off the register."""
        return [index for index, label in self.markers if label.startswith("block ") or label == "decision"]


class CircuitDistribution(DomainModel):
    """Exact distribution over final wire values, keyed by bit strings (wire 0 first)."""
    width: int
    probabilities: Dict[str, Fraction] = Field(default_factory=dict)

    @property
    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))

    def wire_probability(self, wire: int, value: int = 1) -> Fraction:
        bit = str(value)
        return sum((p for bits, p in self.probabilities.items() if bits[wire] == bit), Fraction(0))

    def marginal(self, wires: List[int]) -> Dict[str, Fraction]:
        result: Dict[str, Fraction] = {}
        for bits, probability in self.probabilities.items():
            key = "".join(bits[wire] for wire in wires)
            result[key] = result.get(key, Fraction(0)) + probability
        return result
