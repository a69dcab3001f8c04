"""Configuration space schemas."""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import Field, PrivateAttr, computed_field

from app.schemas.base import DomainModel, FrozenModel


def clog2(value: int) -> int:
    """⌈log2 value⌉ for value ≥ 1."""
    return (value - 1).bit_length()


class Configuration(FrozenModel):
    """Snapshot (s, h_in, w, h_wk) with the work tape as a fixed-width bit string."""
    state: str
    h_in: int
    w: str
    h_wk: int


class ConfigLayout(FrozenModel):
    """Field widths of the configuration encoding."""
    states: Tuple[str, ...]
    input_length: int
    space_bound: int

    @computed_field
    @property
    def state_bits(self) -> int:
        return clog2(len(self.states))

    @computed_field
    @property
    def head_bits(self) -> int:
        return clog2(self.input_length + 2)

    @computed_field
    @property
    def work_head_bits(self) -> int:
        return clog2(self.space_bound)

    @computed_field
    @property
    def length(self) -> int:
        return self.state_bits + self.head_bits + self.space_bound + self.work_head_bits

    @property
    def size(self) -> int:
        """N, the number of syntactically valid configurations."""
        return len(self.states) * (self.input_length + 2) * (2 ** self.space_bound) * self.space_bound


class ConfigVector(DomainModel):
    """Dense distribution over the enumerated configurations."""
    entries: List[Fraction]

    @property
    def total(self) -> Fraction:
        return sum(self.entries, Fraction(0))

    def support(self) -> Dict[int, Fraction]:
        return {index: value for index, value in enumerate(self.entries) if value}


class ConfigurationMatrix(DomainModel):
    """Sparse column-stochastic step matrix; ``entries[(j, i)]`` is the probability of C_i → C_j."""
    dimension: int
    entries: Dict[Tuple[int, int], Fraction] = Field(default_factory=dict)
    configurations: List[Configuration]
    layout: ConfigLayout
    initial_index: int
    accept_index: int
    reject_index: int

    _columns: Optional[Dict[int, List[Tuple[int, Fraction]]]] = PrivateAttr(default=None)

    def columns(self) -> Dict[int, List[Tuple[int, Fraction]]]:
        if self._columns is not None:
            return self._columns
        columns: Dict[int, List[Tuple[int, Fraction]]] = {}
        for (row, column), value in sorted(self.entries.items(), key=lambda item: (item[0][1], item[0][0])):
            columns.setdefault(column, []).append((row, value))
        self._columns = columns
        return columns

    def column_sum(self, column: int) -> Fraction:
        return sum((value for (_, i), value in self.entries.items() if i == column), Fraction(0))

    def apply(self, vector: ConfigVector) -> ConfigVector:
        result = [Fraction(0)] * self.dimension
        columns = self.columns()
        for index, value in enumerate(vector.entries):
            if not value:
                continue
            for row, probability in columns.get(index, ()):
                result[row] += probability * value
        return ConfigVector(entries=result)
