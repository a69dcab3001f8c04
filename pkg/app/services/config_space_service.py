"""Configuration enumeration, encoding and the configuration matrix."""

from collections import deque
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Tuple

from app.core.config import settings
from app.core.errors import (
    ConfigurationCapError,
    EncodingError,
    NoSuccessorError,
    NotCanonicalError,
    SuccessorOutOfBoundsError,
    UndefinedTransitionError,
)
from app.schemas.config_space import ConfigLayout, Configuration, ConfigurationMatrix, ConfigVector
from app.schemas.machine import BLANK, MachineSpec, Rule
from app.utils.formatting import format_fraction
from app.utils.logging import log_pipeline_event

HALF = Fraction(1, 2)


def _to_bits(value: int, width: int, field: str) -> str:
    if value < 0 or value >= 2 ** width and not (width == 0 and value == 0):
        raise EncodingError(f"{field} value {value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


def encode_configuration(configuration: Configuration, layout: ConfigLayout) -> str:
    """state ‖ h_in ‖ w ‖ h_wk, each field zero-padded and MSB first."""
    if configuration.state not in layout.states:
        raise EncodingError(f"unknown state {configuration.state!r}")
    if len(configuration.w) != layout.space_bound or set(configuration.w) - {"0", "1"}:
        raise EncodingError(f"work tape {configuration.w!r} is not a {layout.space_bound}-bit string")
    if configuration.h_in > layout.input_length + 1:
        raise EncodingError(f"input head {configuration.h_in} beyond cell {layout.input_length + 1}")
    if configuration.h_wk >= layout.space_bound:
        raise EncodingError(f"work head {configuration.h_wk} beyond cell {layout.space_bound - 1}")
    return (
        _to_bits(layout.states.index(configuration.state), layout.state_bits, "state")
        + _to_bits(configuration.h_in, layout.head_bits, "input head")
        + configuration.w
        + _to_bits(configuration.h_wk, layout.work_head_bits, "work head")
    )


def decode_configuration(bits: str, layout: ConfigLayout) -> Configuration:
    if len(bits) != layout.length or set(bits) - {"0", "1"}:
        raise EncodingError(f"expected {layout.length} bits, got {bits!r}")
    position = 0

    def take(width: int) -> int:
        nonlocal position
        chunk = bits[position:position + width]
        position += width
        return int(chunk, 2) if chunk else 0

    state_index = take(layout.state_bits)
    h_in = take(layout.head_bits)
    w = bits[position:position + layout.space_bound]
    position += layout.space_bound
    h_wk = take(layout.work_head_bits)
    if state_index >= len(layout.states):
        raise EncodingError(f"state index {state_index} out of range")
    if h_in > layout.input_length + 1 or h_wk >= layout.space_bound:
        raise EncodingError(f"head positions ({h_in},{h_wk}) out of range")
    return Configuration(state=layout.states[state_index], h_in=h_in, w=w, h_wk=h_wk)


class ConfigurationSpace:
    """The configuration set C^x of a canonical machine on one input."""

    def __init__(self, spec: MachineSpec, word: str, space_bound: int):
        if space_bound < 1:
            raise EncodingError("space bound must be positive")
        self.spec = spec
        self.word = word
        self.space_bound = space_bound
        self.layout = ConfigLayout(states=tuple(spec.states), input_length=len(word), space_bound=space_bound)
        self._configurations: Optional[List[Configuration]] = None
        self._index: Dict[Configuration, int] = {}
        self._reachable: Optional[List[int]] = None

    @property
    def initial(self) -> Configuration:
        return Configuration(state=self.spec.initial, h_in=0, w="0" * self.space_bound, h_wk=0)

    @property
    def accepting(self) -> Configuration:
        return Configuration(state=self.spec.accept, h_in=0, w="0" * self.space_bound, h_wk=0)

    @property
    def rejecting(self) -> Configuration:
        return Configuration(state=self.spec.reject, h_in=0, w="0" * self.space_bound, h_wk=0)

    def enumerate_configurations(self) -> List[Configuration]:
        """All configurations in lexicographic (state index, h_in, w, h_wk) order."""
        if self._configurations is not None:
            return self._configurations
        size = self.layout.size
        if size > settings.MAX_CONFIGURATIONS:
            raise ConfigurationCapError(
                f"{size} configurations exceed the cap of {settings.MAX_CONFIGURATIONS}"
            )
        configurations = []
        for state in self.spec.states:
            for h_in in range(len(self.word) + 2):
                for cells in product("01", repeat=self.space_bound):
                    for h_wk in range(self.space_bound):
                        configurations.append(Configuration(state=state, h_in=h_in, w="".join(cells), h_wk=h_wk))
        self._configurations = configurations
        self._index = {configuration: index for index, configuration in enumerate(configurations)}
        return configurations

    def index_of(self, configuration: Configuration) -> int:
        self.enumerate_configurations()
        return self._index[configuration]

    def encode(self, configuration: Configuration) -> str:
        return encode_configuration(configuration, self.layout)

    def _input_symbol(self, position: int) -> str:
        if 1 <= position <= len(self.word):
            return self.word[position - 1]
        return BLANK

    def _apply(self, configuration: Configuration, rule: Rule) -> Configuration:
        if rule.write in (BLANK, "0"):
            bit = "0"
        elif rule.write == "1":
            bit = "1"
        else:
            raise NotCanonicalError(f"work symbol {rule.write!r} is not binary")
        h_in = configuration.h_in + rule.d_in
        h_wk = configuration.h_wk + rule.d_wk
        if not 0 <= h_in <= len(self.word) + 1 or not 0 <= h_wk < self.space_bound:
            raise SuccessorOutOfBoundsError(
                f"step from {configuration.state} leaves the bounds with heads at ({h_in},{h_wk})"
            )
        w = configuration.w[:configuration.h_wk] + bit + configuration.w[configuration.h_wk + 1:]
        return Configuration(state=rule.next_state, h_in=h_in, w=w, h_wk=h_wk)

    def successors(self, configuration: Configuration) -> Tuple[Configuration, Configuration]:
        """(heads successor, tails successor); a single certain rule gives C′ = C″."""
        if self.spec.is_halting(configuration.state):
            raise NoSuccessorError(f"no successor: {configuration.state} is halting")
        sigma = self._input_symbol(configuration.h_in)
        bit = configuration.w[configuration.h_wk]
        rules = self.spec.rules(configuration.state, sigma, bit)
        if not rules and bit == "0":
            rules = self.spec.rules(configuration.state, sigma, BLANK)
        live = [rule for rule in rules if rule.probability != 0]
        if not live:
            raise UndefinedTransitionError(f"no transition at ({configuration.state},{sigma},{bit})")
        if len(live) == 1 and live[0].probability == 1:
            successor = self._apply(configuration, live[0])
            return successor, successor
        if len(live) != 2 or any(rule.probability != HALF for rule in live):
            raise NotCanonicalError(f"step at ({configuration.state},{sigma},{bit}) is not a fair split")
        return self._apply(configuration, live[0]), self._apply(configuration, live[1])

    def reachable(self) -> List[int]:
        """Indices reachable from the initial configuration, in enumeration order."""
        if self._reachable is not None:
            return self._reachable
        self.enumerate_configurations()
        start = self.index_of(self.initial)
        seen = {start}
        queue = deque([self.initial])
        while queue:
            configuration = queue.popleft()
            if self.spec.is_halting(configuration.state):
                continue
            for successor in self.successors(configuration):
                index = self.index_of(successor)
                if index not in seen:
                    seen.add(index)
                    queue.append(successor)
        self._reachable = sorted(seen)
        return self._reachable

    def build_matrix(self) -> ConfigurationMatrix:
        configurations = self.enumerate_configurations()
        reachable = set(self.reachable())
        entries: Dict[Tuple[int, int], Fraction] = {}
        for index, configuration in enumerate(configurations):
            if self.spec.is_halting(configuration.state):
                entries[(index, index)] = Fraction(1)
                continue
            if index in reachable:
                heads, tails = self.successors(configuration)
            else:
                try:
                    heads, tails = self.successors(configuration)
                except (UndefinedTransitionError, SuccessorOutOfBoundsError, NotCanonicalError):
                    # never carries mass
                    entries[(index, index)] = Fraction(1)
                    continue
            for successor in (heads, tails):
                key = (self.index_of(successor), index)
                entries[key] = entries.get(key, Fraction(0)) + HALF

        matrix = ConfigurationMatrix(
            dimension=len(configurations),
            entries=entries,
            configurations=configurations,
            layout=self.layout,
            initial_index=self.index_of(self.initial),
            accept_index=self.index_of(self.accepting),
            reject_index=self.index_of(self.rejecting),
        )
        log_pipeline_event(
            "configuration-matrix",
            machine=self.spec.name,
            input_word=self.word,
            N=matrix.dimension,
            l=self.layout.length,
            reachable=len(reachable),
        )
        return matrix


def enumerate_configurations(spec: MachineSpec, word: str, space_bound: int) -> List[Configuration]:
    return ConfigurationSpace(spec, word, space_bound).enumerate_configurations()


def build_configuration_matrix(spec: MachineSpec, word: str, space_bound: int) -> ConfigurationMatrix:
    return ConfigurationSpace(spec, word, space_bound).build_matrix()


def initial_vector(matrix: ConfigurationMatrix) -> ConfigVector:
    entries = [Fraction(0)] * matrix.dimension
    entries[matrix.initial_index] = Fraction(1)
    return ConfigVector(entries=entries)


def iterate_vectors(matrix: ConfigurationMatrix, T: int) -> List[ConfigVector]:
    """v_0 … v_T with v_{i+1} = P v_i."""
    vectors = [initial_vector(matrix)]
    for _ in range(T):
        vectors.append(matrix.apply(vectors[-1]))
    return vectors


def final_distribution(matrix: ConfigurationMatrix, T: int) -> Tuple[Fraction, Fraction]:
    """(A, R): the mass on C_a and C_r after T steps.

    Raises:
        NotCanonicalError: any mass remains elsewhere.
    """
    final = iterate_vectors(matrix, T)[-1]
    accept = final.entries[matrix.accept_index]
    reject = final.entries[matrix.reject_index]
    if accept + reject != 1:
        raise NotCanonicalError(f"machine not canonical at clock {T}")
    return accept, reject


def dyadic_numerator(acceptance: Fraction, T: int) -> Tuple[int, bool]:
    """A′ with A = A′/2^T, and whether A′ = 2^(T-1)."""
    scaled = Fraction(acceptance) * 2 ** T
    if scaled.denominator != 1:
        raise NotCanonicalError(f"acceptance {format_fraction(acceptance)} is not a multiple of 2^-{T}")
    numerator = scaled.numerator
    return numerator, numerator == 2 ** (T - 1)


def format_matrix(matrix: ConfigurationMatrix) -> str:
    lines = [f"N={matrix.dimension}"]
    for column, rows in sorted(matrix.columns().items()):
        for row, value in rows:
            lines.append(f"{row} {column} {format_fraction(value)}")
    return "\n".join(lines) + "\n"


def format_configurations(matrix: ConfigurationMatrix) -> str:
    lines = []
    for index, configuration in enumerate(matrix.configurations):
        bits = encode_configuration(configuration, matrix.layout)
        lines.append(
            f"{index} {bits or '-'} {configuration.state} {configuration.h_in} {configuration.w} {configuration.h_wk}"
        )
    return "\n".join(lines) + "\n"
