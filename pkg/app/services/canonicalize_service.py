"""Canonical form construction for fair-coin PTMs.

The canonical machine tracks (original state, step, input head, work head,
dirty flag) in its finite control. Every step splits into two branches of
probability 1/2; a verdict reached early is followed by a cleanup routine
(park the heads, or sweep the work tape back to blanks) and idle steps so
that every path halts at exactly step T in one of two configurations.
"""

from collections import deque
from fractions import Fraction
from itertools import product
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from app.core.errors import CanonicalizationError, PostselectError
from app.schemas.machine import BLANK, MachineKind, MachineSpec, Rule
from app.services.machine_service import MachineService, blank_normalized
from app.utils.formatting import format_fraction
from app.utils.logging import log_pipeline_event

HALF = Fraction(1, 2)
OVERFLOW = "overflow"


def default_probes(spec: MachineSpec, max_length: int = 2) -> List[str]:
    """Every word over the input alphabet of length at most ``max_length``."""
    words = []
    for length in range(max_length + 1):
        words.extend("".join(letters) for letters in product(spec.input_alphabet, repeat=length))
    return words


class Canonicalizer:
    """Builds the canonical machine for one (spec, T, space bound)."""

    def __init__(self, spec: MachineSpec, T: int, space_bound: int):
        self.spec = spec
        self.T = T
        self.S = space_bound
        self._names: Dict[Hashable, str] = {}
        self._delta: Dict[Tuple[str, str, str], List[Rule]] = {}
        self._queue: deque = deque()

    # preconditions

    def check_input(self):
        spec = self.spec
        if self.T < 1 or self.S < 1:
            raise CanonicalizationError("clock and space bound must be positive")
        if spec.kind not in (MachineKind.PTM, MachineKind.DTM) or spec.nonpost is not None:
            raise CanonicalizationError(f"cannot canonicalize a {spec.kind.value} machine")
        findings = MachineService.validate_well_formed(spec, for_compilation=True)
        if findings:
            raise CanonicalizationError(f"machine is not well formed: {findings[0].message}")
        if not set(spec.work_alphabet) <= {"0", "1"}:
            raise CanonicalizationError("work alphabet must be a subset of {0,1}")
        for state in spec.states:
            for symbol in spec.input_symbols:
                blank_rules = spec.rules(state, symbol, BLANK)
                zero_rules = spec.rules(state, symbol, "0")
                if blank_rules and zero_rules and blank_normalized(blank_rules) != blank_normalized(zero_rules):
                    raise CanonicalizationError(f"rules at ({state},{symbol},#) and ({state},{symbol},0) differ")

    def original_rules(self, state: str, sigma: str, gamma: str) -> List[Rule]:
        """Nonzero rules of the original machine, reading 0 and blank alike."""
        rules = self.spec.rules(state, sigma, gamma)
        if not rules and gamma == BLANK:
            rules = self.spec.rules(state, sigma, "0")
        live = [rule for rule in rules if rule.probability != 0]
        if len(live) > 2:
            raise CanonicalizationError(f"more than two branches at ({state},{sigma},{gamma})")
        if live and not (
            (len(live) == 1 and live[0].probability == 1)
            or (len(live) == 2 and all(rule.probability == HALF for rule in live))
        ):
            raise CanonicalizationError(f"probability not in {{0,1/2,1}} at ({state},{sigma},{gamma})")
        return live

    # state naming

    def name(self, key: Hashable) -> str:
        if key in self._names:
            return self._names[key]
        if key in ("accept", "reject"):
            name = self.spec.accept if key == "accept" else self.spec.reject
        elif key == OVERFLOW:
            name = OVERFLOW
        elif key[0] == "run":
            _, state, t, h_in, h_wk, dirty = key
            name = f"{state}@{t}:{h_in}:{h_wk}" + ("*" if dirty else "")
        elif key[0] == "clean":
            _, verdict, t, h_in, h_wk, phase, dirty = key
            name = f"clean-{verdict}@{t}:{h_in}:{h_wk}:{phase}" + ("*" if dirty else "")
        else:
            _, verdict, t = key
            name = f"idle-{verdict}@{t}"
        self._names[key] = name
        self._queue.append(key)
        return name

    # cleanup planning

    def finish(self, verdict: str, t: int) -> Hashable:
        """Key for a configuration with clean tape and parked heads at step t."""
        if t == self.T:
            return verdict
        if t < self.T:
            return ("idle", verdict, t)
        return OVERFLOW

    def verdict_entry(self, verdict: str, t: int, h_in: int, h_wk: int, dirty: bool) -> Hashable:
        if not dirty and h_in == 0 and h_wk == 0:
            return self.finish(verdict, t)
        if t >= self.T:
            return OVERFLOW
        if not dirty:
            phase = "P"
        else:
            phase = "R" if h_wk < self.S - 1 else "L"
        return ("clean", verdict, t, h_in, h_wk, phase, dirty)

    # transitions

    def readable(self, h_in: int, dirty: bool) -> List[Tuple[str, str]]:
        sigmas = [BLANK] if h_in == 0 else self.spec.input_symbols
        gammas = [BLANK, "0", "1"] if dirty else [BLANK, "0"]
        return [(sigma, gamma) for sigma in sigmas for gamma in gammas]

    def emit(self, state_name: str, sigma: str, gamma: str, branches: List[Tuple[Hashable, str, int, int]]):
        rules = []
        if len(branches) == 1:
            branches = branches * 2
        for key, write, d_in, d_wk in branches:
            rules.append(Rule(next_state=self.name(key), write=write, d_in=d_in, d_wk=d_wk, probability=HALF))
        self._delta[(state_name, sigma, gamma)] = rules

    def expand_run(self, key):
        _, state, t, h_in, h_wk, dirty = key
        name = self.name(key)
        for sigma, gamma in self.readable(h_in, dirty):
            if t >= self.T:
                self.emit(name, sigma, gamma, [(OVERFLOW, gamma if gamma != "0" else BLANK, 0, 0)])
                continue
            rules = self.original_rules(state, sigma, BLANK if gamma == "0" else gamma)
            if not rules:
                continue
            branches = []
            for rule in rules:
                write = "1" if rule.write == "1" else BLANK
                next_in = h_in + rule.d_in
                next_wk = h_wk + rule.d_wk
                next_dirty = dirty or write == "1"
                if next_in < 0 or next_wk < 0 or next_wk >= self.S:
                    branches.append((OVERFLOW, write, 0, 0))
                    continue
                if rule.next_state == self.spec.accept:
                    target = self.verdict_entry("accept", t + 1, next_in, next_wk, next_dirty)
                elif rule.next_state == self.spec.reject:
                    target = self.verdict_entry("reject", t + 1, next_in, next_wk, next_dirty)
                else:
                    target = ("run", rule.next_state, t + 1, next_in, next_wk, next_dirty)
                branches.append((target, write, rule.d_in, rule.d_wk))
            self.emit(name, sigma, gamma, branches)

    def expand_clean(self, key):
        _, verdict, t, h_in, h_wk, phase, dirty = key
        name = self.name(key)
        d_in = -1 if h_in > 0 else 0
        if phase == "P":
            d_wk, next_phase = (-1 if h_wk > 0 else 0), "P"
        elif phase == "R":
            d_wk = 1
            next_phase = "L" if h_wk + 1 == self.S - 1 else "R"
        elif phase == "L":
            d_wk, next_phase = (-1, "L") if h_wk > 0 else (0, "D")
        else:
            d_wk, next_phase = 0, "D"
        next_in, next_wk = h_in + d_in, h_wk + d_wk
        if phase == "P":
            done = next_in == 0 and next_wk == 0
        else:
            done = next_phase == "D" and next_in == 0

        if done:
            target = self.finish(verdict, t + 1)
        elif t + 1 >= self.T:
            target = OVERFLOW
        else:
            target = ("clean", verdict, t + 1, next_in, next_wk, next_phase, dirty)
        for sigma, gamma in self.readable(h_in, dirty):
            self.emit(name, sigma, gamma, [(target, BLANK, d_in, d_wk)])

    def expand_idle(self, key):
        _, verdict, t = key
        name = self.name(key)
        target = self.finish(verdict, t + 1)
        for sigma, gamma in self.readable(0, False):
            self.emit(name, sigma, gamma, [(target, BLANK, 0, 0)])

    def expand_overflow(self):
        for sigma in self.spec.input_symbols:
            for gamma in (BLANK, "0", "1"):
                self.emit(OVERFLOW, sigma, gamma, [(OVERFLOW, BLANK if gamma == "0" else gamma, 0, 0)])

    def build(self) -> MachineSpec:
        self.check_input()
        start = ("run", self.spec.initial, 0, 0, 0, False)
        if self.spec.is_halting(self.spec.initial):
            start = self.verdict_entry("accept" if self.spec.initial == self.spec.accept else "reject", 0, 0, 0, False)
            if start in ("accept", "reject"):
                raise CanonicalizationError("the initial state halts at step 0")
        self.name(start)
        self.name("accept")
        self.name("reject")

        while self._queue:
            key = self._queue.popleft()
            if key in ("accept", "reject"):
                continue
            if key == OVERFLOW:
                self.expand_overflow()
            elif key[0] == "run":
                self.expand_run(key)
            elif key[0] == "clean":
                self.expand_clean(key)
            else:
                self.expand_idle(key)

        finals = [self.spec.accept, self.spec.reject]
        states = [name for name in self._names.values() if name not in finals] + finals
        return MachineSpec(
            name=f"{self.spec.name}-canonical-T{self.T}",
            kind=MachineKind.PTM,
            states=states,
            initial=self.name(start),
            accept=self.spec.accept,
            reject=self.spec.reject,
            input_alphabet=list(self.spec.input_alphabet),
            work_alphabet=["0", "1"],
            delta=self._delta,
            compile_target=True,
        )


def canonicalize(
    spec: MachineSpec,
    T: int,
    space_bound: int,
    probe_inputs: Optional[Sequence[str]] = None,
) -> MachineSpec:
    """Equivalent PTM that splits every step and halts cleanly at exactly step T.

    Args:
        spec: PTM with probabilities in {0,1/2,1} and work alphabet within {0,1}
        T: clock value
        space_bound: work cells available to the original machine
        probe_inputs: words used to verify equivalence; defaults to every word of length at most 2

    Raises:
        CanonicalizationError: the machine misses T or the space bound on a probe, or the
            cleanup routine does not fit before T.
    """
    canonical = Canonicalizer(spec, T, space_bound).build()
    probes = list(probe_inputs) if probe_inputs is not None else default_probes(spec)

    for word in probes:
        try:
            original = MachineService.run_exhaustive(spec, word, T, space_cap=space_bound)
        except PostselectError as error:
            raise CanonicalizationError(f"original machine fails on probe {word!r}: {error.message}")
        if original.p_nonhalt != 0:
            raise CanonicalizationError(f"original machine does not halt within {T} steps on probe {word!r}")

        result = MachineService.run_exhaustive(canonical, word, T, space_cap=space_bound)
        if result.p_nonhalt != 0:
            raise CanonicalizationError(f"cleanup does not finish by step {T} on probe {word!r}")
        if result.p_acc != original.p_acc:
            raise CanonicalizationError(
                f"acceptance changed on probe {word!r}: "
                f"{format_fraction(original.p_acc)} became {format_fraction(result.p_acc)}"
            )
        report = MachineService.check_canonical(canonical, word, T)
        if not report.is_canonical:
            raise CanonicalizationError(f"result is not canonical on probe {word!r}: {report.violations[0].message}")

    log_pipeline_event("canonicalize", machine=spec.name, T=T, space=space_bound, states=len(canonical.states))
    return canonical
