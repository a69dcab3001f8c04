"""Machine validation and the exact exhaustive-path oracle."""

from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from app.core.config import settings
from app.core.errors import (
    HeadBoundError,
    PostselectError,
    PostselectionError,
    SpaceBoundError,
    UndefinedTransitionError,
)
from app.schemas.machine import (
    BLANK,
    CanonicalReport,
    Finding,
    MachineKind,
    MachineSpec,
    OutcomeDistribution,
    Rule,
    Triple,
)
from app.utils.formatting import format_fraction
from app.utils.logging import log_pipeline_event

DYADIC = (Fraction(0), Fraction(1, 2), Fraction(1))
HALF = Fraction(1, 2)

# (state, input head, work tape without trailing blanks, work head)
RawConfiguration = Tuple[str, int, Tuple[str, ...], int]


def _triple_text(triple: Triple) -> str:
    return f"({triple[0]},{triple[1]},{triple[2]})"


def _input_symbol(word: str, position: int) -> str:
    if 1 <= position <= len(word):
        return word[position - 1]
    return BLANK


def _read_work(tape: Tuple[str, ...], head: int) -> str:
    return tape[head] if head < len(tape) else BLANK


def _write_work(tape: Tuple[str, ...], head: int, symbol: str) -> Tuple[str, ...]:
    cells = list(tape)
    if head >= len(cells):
        cells.extend([BLANK] * (head + 1 - len(cells)))
    cells[head] = symbol
    while cells and cells[-1] == BLANK:
        cells.pop()
    return tuple(cells)


class _Exploration:
    """Everything a bounded propagation run observes."""

    def __init__(self):
        self.outcome: Dict[str, Fraction] = {"accept": Fraction(0), "reject": Fraction(0), "nonpost": Fraction(0)}
        self.halting_time: Dict[int, Fraction] = {}
        self.halting_configurations: Dict[RawConfiguration, Set[int]] = {}
        self.reached_triples: Set[Triple] = set()
        self.p_nonhalt = Fraction(0)
        self.max_work_cell = 0


class MachineService:
    """Well-formedness checks and exact outcome computation for machines."""

    @staticmethod
    def validate_well_formed(spec: MachineSpec, for_compilation: Optional[bool] = None) -> List[Finding]:
        """Check every MachineSpec invariant.

        Args:
            spec: machine to check
            for_compilation: restrict PTM probabilities to {0,1/2,1}; defaults to ``spec.compile_target``

        Returns:
            Findings, each naming the offending triple or key. Empty when well formed.
        """
        if for_compilation is None:
            for_compilation = spec.compile_target
        findings: List[Finding] = []
        states = set(spec.states)

        if spec.accept == spec.reject:
            findings.append(Finding(tag="halting-states", message="accept and reject states coincide"))
        if spec.nonpost is not None:
            if spec.nonpost in (spec.accept, spec.reject):
                findings.append(Finding(tag="halting-states", message="nonpost state coincides with accept or reject"))
            if spec.kind != MachineKind.POSTPTM:
                findings.append(Finding(tag="nonpost", message=f"nonpost state declared on a {spec.kind.value} machine"))
        for key in ("initial", "accept", "reject", "nonpost"):
            value = getattr(spec, key)
            if value is not None and value not in states:
                findings.append(Finding(tag="unknown-state", message=f"{key} state {value!r} is not declared"))

        sigma = set(spec.input_symbols)
        gamma = set(spec.work_symbols)
        for triple in sorted(spec.delta):
            state, read_in, read_wk = triple
            rules = spec.delta[triple]
            where = _triple_text(triple)
            if state not in states:
                findings.append(Finding(tag="unknown-state", message=f"unknown state at {where}"))
            if spec.is_halting(state):
                findings.append(Finding(tag="halting-transition", message=f"transition leaves halting state at {where}"))
            if read_in not in sigma or read_wk not in gamma:
                findings.append(Finding(tag="unknown-symbol", message=f"unknown symbol at {where}"))

            mass = Fraction(0)
            for rule in rules:
                mass += rule.probability
                if rule.next_state not in states:
                    findings.append(Finding(tag="unknown-state", message=f"unknown next state {rule.next_state!r} at {where}"))
                if rule.write not in gamma:
                    findings.append(Finding(tag="unknown-symbol", message=f"unknown written symbol {rule.write!r} at {where}"))
                if not 0 <= rule.probability <= 1:
                    findings.append(Finding(tag="probability-range", message=f"probability {format_fraction(rule.probability)} outside [0,1] at {where}"))
                elif for_compilation and spec.kind == MachineKind.PTM and rule.probability not in DYADIC:
                    findings.append(Finding(tag="non-dyadic", message=f"probability not in {{0,1/2,1}} at {where}"))

            if mass != 1:
                findings.append(Finding(tag="probability-mass", message=f"probability mass {format_fraction(mass)} ≠ 1 at {where}"))
            if spec.kind == MachineKind.DTM and (len(rules) != 1 or rules[0].probability != 1):
                findings.append(Finding(tag="nondeterministic", message=f"dtm needs exactly one rule of probability 1 at {where}"))
        return findings

    @staticmethod
    def _explore(
        spec: MachineSpec,
        word: str,
        step_budget: int,
        space_cap: Optional[int] = None,
    ) -> _Exploration:
        """Propagate the configuration distribution for ``step_budget`` steps.

        One witness path is kept per frontier configuration so head-bound errors can name a path prefix.
        """
        for symbol in word:
            if symbol not in spec.input_alphabet:
                raise PostselectError(f"input symbol {symbol!r} is not in the input alphabet")
        cap = space_cap if space_cap is not None else settings.MAX_WORK_CELLS
        result = _Exploration()
        start: RawConfiguration = (spec.initial, 0, (), 0)

        def halt(config: RawConfiguration, mass: Fraction, step: int):
            state = config[0]
            label = "accept" if state == spec.accept else "reject" if state == spec.reject else "nonpost"
            result.outcome[label] += mass
            result.halting_time[step] = result.halting_time.get(step, Fraction(0)) + mass
            result.halting_configurations.setdefault(config, set()).add(step)

        if spec.is_halting(spec.initial):
            halt(start, Fraction(1), 0)
            return result

        frontier: Dict[RawConfiguration, Tuple[Fraction, Tuple[str, ...]]] = {start: (Fraction(1), (spec.initial,))}
        for step in range(1, step_budget + 1):
            following: Dict[RawConfiguration, Tuple[Fraction, Tuple[str, ...]]] = {}
            for config, (mass, path) in frontier.items():
                state, h_in, tape, h_wk = config
                triple = (state, _input_symbol(word, h_in), _read_work(tape, h_wk))
                rules = spec.rules(*triple)
                if not rules:
                    raise UndefinedTransitionError(
                        f"no transition at {_triple_text(triple)} after path {' -> '.join(path)}"
                    )
                result.reached_triples.add(triple)
                for rule in rules:
                    if rule.probability == 0:
                        continue
                    successor = MachineService._step(config, rule, word, path, cap)
                    result.max_work_cell = max(result.max_work_cell, successor[3])
                    branch = mass * rule.probability
                    if spec.is_halting(rule.next_state):
                        halt(successor, branch, step)
                        continue
                    if successor in following:
                        previous, witness = following[successor]
                        following[successor] = (previous + branch, witness)
                    else:
                        following[successor] = (branch, path + (rule.next_state,))
            frontier = following
            if not frontier:
                break

        result.p_nonhalt = sum((mass for mass, _ in frontier.values()), Fraction(0))
        return result

    @staticmethod
    def _step(
        config: RawConfiguration,
        rule: Rule,
        word: str,
        path: Tuple[str, ...],
        cap: int,
    ) -> RawConfiguration:
        _, h_in, tape, h_wk = config
        next_in = h_in + rule.d_in
        next_wk = h_wk + rule.d_wk
        if not 0 <= next_in <= len(word) + 1:
            raise HeadBoundError(f"input head moved to cell {next_in}", list(path) + [rule.next_state])
        if next_wk < 0:
            raise HeadBoundError("work head moved left of cell 0", list(path) + [rule.next_state])
        if next_wk >= cap:
            raise SpaceBoundError(f"work head reached cell {next_wk}, beyond the cap of {cap} cells")
        return (rule.next_state, next_in, _write_work(tape, h_wk, rule.write), next_wk)

    @staticmethod
    def _run_dfs(
        spec: MachineSpec,
        word: str,
        step_budget: int,
        space_cap: Optional[int] = None,
    ) -> OutcomeDistribution:
        """Enumerate every computation path one by one."""
        for symbol in word:
            if symbol not in spec.input_alphabet:
                raise PostselectError(f"input symbol {symbol!r} is not in the input alphabet")
        cap = space_cap if space_cap is not None else settings.MAX_WORK_CELLS
        outcome = {"accept": Fraction(0), "reject": Fraction(0), "nonpost": Fraction(0), "nonhalt": Fraction(0)}
        halting_time: Dict[int, Fraction] = {}
        max_work_cell = 0

        if spec.is_halting(spec.initial):
            key = "accept" if spec.initial == spec.accept else "reject" if spec.initial == spec.reject else "nonpost"
            outcome[key] = Fraction(1)
            halting_time[0] = Fraction(1)
        else:
            stack = [((spec.initial, 0, (), 0), Fraction(1), 0, (spec.initial,))]
            while stack:
                config, mass, depth, path = stack.pop()
                if depth == step_budget:
                    outcome["nonhalt"] += mass
                    continue
                state, h_in, tape, h_wk = config
                triple = (state, _input_symbol(word, h_in), _read_work(tape, h_wk))
                rules = spec.rules(*triple)
                if not rules:
                    raise UndefinedTransitionError(
                        f"no transition at {_triple_text(triple)} after path {' -> '.join(path)}"
                    )
                for rule in reversed(rules):
                    if rule.probability == 0:
                        continue
                    successor = MachineService._step(config, rule, word, path, cap)
                    max_work_cell = max(max_work_cell, successor[3])
                    branch = mass * rule.probability
                    if spec.is_halting(rule.next_state):
                        key = "accept" if rule.next_state == spec.accept else "reject" if rule.next_state == spec.reject else "nonpost"
                        outcome[key] += branch
                        halting_time[depth + 1] = halting_time.get(depth + 1, Fraction(0)) + branch
                    else:
                        stack.append((successor, branch, depth + 1, path + (rule.next_state,)))

        return OutcomeDistribution(
            p_acc=outcome["accept"],
            p_rej=outcome["reject"],
            p_npost=outcome["nonpost"],
            p_nonhalt=outcome["nonhalt"],
            halting_time=dict(sorted(halting_time.items())),
            max_work_cell=max_work_cell,
        )

    @staticmethod
    def run_exhaustive(
        spec: MachineSpec,
        word: str,
        step_budget: int,
        space_cap: Optional[int] = None,
        strategy: str = "propagate",
    ) -> OutcomeDistribution:
        """Exact outcome distribution over all computation paths up to ``step_budget``.

        Both strategies give identical results; ``dfs`` walks paths one at a time
        and is exponential in the budget.
        """
        if step_budget < 0:
            raise PostselectError("step budget must be nonnegative")
        if strategy == "dfs":
            distribution = MachineService._run_dfs(spec, word, step_budget, space_cap)
        elif strategy == "propagate":
            explored = MachineService._explore(spec, word, step_budget, space_cap)
            distribution = OutcomeDistribution(
                p_acc=explored.outcome["accept"],
                p_rej=explored.outcome["reject"],
                p_npost=explored.outcome["nonpost"],
                p_nonhalt=explored.p_nonhalt,
                halting_time=dict(sorted(explored.halting_time.items())),
                max_work_cell=explored.max_work_cell,
            )
        else:
            raise PostselectError(f"unknown strategy {strategy!r}")

        log_pipeline_event(
            "oracle",
            machine=spec.name,
            input_word=word,
            budget=step_budget,
            strategy=strategy,
            p_acc=format_fraction(distribution.p_acc),
        )
        return distribution

    @staticmethod
    def postselect_normalize(distribution: OutcomeDistribution) -> Tuple[Fraction, Fraction]:
        """Condition on halting in accept or reject."""
        if distribution.p_nonhalt != 0:
            raise PostselectionError(
                f"run did not halt absolutely (non-halting mass {format_fraction(distribution.p_nonhalt)})"
            )
        mass = distribution.p_acc + distribution.p_rej
        if mass == 0:
            raise PostselectionError("post-selection event has probability 0")
        return distribution.p_acc / mass, distribution.p_rej / mass

    @staticmethod
    def check_canonical(spec: MachineSpec, word: str, T: int) -> CanonicalReport:
        """Check the canonical form by an exhaustive run to depth T.

        Violations are reported, never raised. Run errors (undefined transition,
        head excursions) become a ``run-error`` finding.
        """
        findings: List[Finding] = []
        if not set(spec.work_alphabet) <= {"0", "1"}:
            findings.append(Finding(tag="non-binary-work-alphabet", message="work alphabet is not a subset of {0,1}"))
        if spec.kind == MachineKind.POSTPTM or spec.nonpost is not None:
            findings.append(Finding(tag="post-selecting", message="canonical machines have no nonpost state"))

        try:
            explored = MachineService._explore(spec, word, T)
        except PostselectError as error:
            findings.append(Finding(tag="run-error", message=error.message))
            return CanonicalReport(is_canonical=False, violations=findings)

        for triple in sorted(explored.reached_triples):
            live = [rule for rule in spec.rules(*triple) if rule.probability != 0]
            if len(live) != 2 or any(rule.probability != HALF for rule in live):
                findings.append(Finding(tag="non-splitting-step", message=f"non-splitting step at {_triple_text(triple)}"))
            state, read_in, read_wk = triple
            if read_wk in (BLANK, "0"):
                other = "0" if read_wk == BLANK else BLANK
                counterpart = spec.rules(state, read_in, other)
                if counterpart and blank_normalized(counterpart) != blank_normalized(spec.rules(*triple)):
                    findings.append(Finding(
                        tag="blank-sensitive",
                        message=f"rules for {_triple_text(triple)} and {_triple_text((state, read_in, other))} differ",
                    ))

        if explored.p_nonhalt != 0 or any(step != T for step in explored.halting_time):
            findings.append(Finding(tag="wrong-halting-time", message="halting time ≠ T"))

        halting: Dict[str, Set[RawConfiguration]] = {}
        for config in explored.halting_configurations:
            state, h_in, tape, h_wk = config
            if state == spec.nonpost:
                findings.append(Finding(tag="post-selecting", message="a path halts in the nonpost state"))
                continue
            tape = tuple(BLANK if cell == "0" else cell for cell in tape)
            while tape and tape[-1] == BLANK:
                tape = tape[:-1]
            halting.setdefault(state, set()).add((state, h_in, tape, h_wk))
            if h_in != 0 or h_wk != 0 or tape:
                findings.append(Finding(
                    tag="dirty-tape-halt",
                    message=f"{state} reached with heads at ({h_in},{h_wk}) and tape {''.join(tape) or BLANK}",
                ))
        for state in sorted(halting):
            if len(halting[state]) > 1:
                findings.append(Finding(
                    tag="multiple-halting-configurations",
                    message=f"{state} is reached in {len(halting[state])} configurations",
                ))

        unique = []
        for finding in findings:
            if finding not in unique:
                unique.append(finding)
        return CanonicalReport(is_canonical=not unique, violations=unique)


def blank_normalized(rules: List[Rule]) -> List[Tuple]:
    return sorted(
        (rule.next_state, BLANK if rule.write == "0" else rule.write, rule.d_in, rule.d_wk, rule.probability)
        for rule in rules
        if rule.probability != 0
    )
