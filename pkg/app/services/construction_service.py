"""Machine-to-machine constructions around post-selection."""

from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from app.core.config import settings
from app.core.errors import PostselectError, PostselectionError, PromiseViolationError
from app.schemas.construction import RestartMachine, RestartSemantics
from app.schemas.machine import BLANK, MachineKind, MachineSpec, Rule
from app.services.machine_service import MachineService
from app.utils.logging import log_pipeline_event

HALF = Fraction(1, 2)
RESTART = "restart"


def _retarget(rule: Rule, mapping: Dict[str, str], probability: Fraction = None) -> Rule:
    return Rule(
        next_state=mapping.get(rule.next_state, rule.next_state),
        write=rule.write,
        d_in=rule.d_in,
        d_wk=rule.d_wk,
        probability=rule.probability if probability is None else probability,
    )


def fresh_state(spec: MachineSpec, base: str) -> str:
    """``base``, or ``base`` with the smallest numeric suffix not already a state of ``spec``."""
    taken = set(spec.states)
    name, suffix = base, 1
    while name in taken:
        name = f"{base}{suffix}"
        suffix += 1
    return name


def postselect_to_unbounded(spec: MachineSpec) -> MachineSpec:
    """Replace every move into nonpost by a fair accept/reject split.

    p_acc becomes p_acc + p_npost/2 and p_rej becomes p_rej + p_npost/2, so the
    acceptance crosses 1/2 exactly when the post-selected acceptance does.
    """
    if spec.nonpost is None:
        return spec
    delta = {}
    for triple, rules in spec.delta.items():
        rewritten = []
        for rule in rules:
            if rule.next_state == spec.nonpost:
                half = rule.probability * HALF
                rewritten.append(_retarget(rule, {spec.nonpost: spec.accept}, half))
                rewritten.append(_retarget(rule, {spec.nonpost: spec.reject}, half))
            else:
                rewritten.append(rule)
        delta[triple] = rewritten
    return spec.model_copy(update={
        "name": f"{spec.name}-unbounded",
        "kind": MachineKind.PTM,
        "states": [state for state in spec.states if state != spec.nonpost],
        "nonpost": None,
        "delta": delta,
        "compile_target": False,
    })


def postselect_to_restart(spec: MachineSpec, step_budget: int = None) -> RestartMachine:
    """Treat entering nonpost as restarting from the initial configuration."""
    if spec.nonpost is None:
        raise PostselectError("restart construction needs a nonpost state")
    restart = fresh_state(spec, RESTART)
    mapping = {spec.nonpost: restart}
    delta = {triple: [_retarget(rule, mapping) for rule in rules] for triple, rules in spec.delta.items()}
    base = spec.model_copy(update={
        "name": f"{spec.name}-restart",
        "states": [restart if state == spec.nonpost else state for state in spec.states],
        "nonpost": restart,
        "delta": delta,
    })
    return RestartMachine(
        base=base,
        restart_state=restart,
        step_budget=step_budget or settings.DEFAULT_STEP_BUDGET,
    )


def restart_semantics_exact(machine: RestartMachine, word: str) -> RestartSemantics:
    """Limiting acceptance p_acc/h and expected running time E[episode]/h for h = p_acc + p_rej."""
    episode = MachineService.run_exhaustive(machine.base, word, machine.step_budget)
    if episode.p_nonhalt != 0:
        raise PostselectError(f"an episode does not halt within {machine.step_budget} steps")
    halting = episode.p_acc + episode.p_rej
    if halting == 0:
        raise PostselectionError("restarting machine never halts: post-selection event has probability 0")
    expected_length = sum((step * mass for step, mass in episode.halting_time.items()), Fraction(0))
    semantics = RestartSemantics(
        limit_acc=episode.p_acc / halting,
        limit_rej=episode.p_rej / halting,
        halting_per_episode=halting,
        expected_episode_length=expected_length,
        expected_steps=expected_length / halting,
    )
    log_pipeline_event("restart-semantics", machine=machine.base.name, input_word=word, halting=str(halting))
    return semantics


def _prefixed(spec: MachineSpec, prefix: str, mapping: Dict[str, str]) -> Tuple[List[str], Dict]:
    def rename(state: str) -> str:
        return mapping.get(state, f"{prefix}{state}")

    states = [rename(state) for state in spec.states if state not in mapping]
    delta = {}
    for (state, read_in, read_wk), rules in spec.delta.items():
        delta[(rename(state), read_in, read_wk)] = [
            Rule(next_state=rename(rule.next_state), write=rule.write, d_in=rule.d_in, d_wk=rule.d_wk,
                 probability=rule.probability)
            for rule in rules
        ]
    return states, delta


def combine_ntms_zero_error(
    first: MachineSpec,
    second: MachineSpec,
    corpus: Sequence[str] = (),
    step_budget: int = None,
) -> MachineSpec:
    """PostPTM that runs ``first`` or ``second`` on a fair coin.

    ``first`` accepting accepts, ``second`` accepting rejects, and every other halt
    is post-selected away. For inputs accepted by exactly one of the two machines
    the post-selected answer has zero error.

    Raises:
        PromiseViolationError: a corpus input is accepted by both machines or by neither.
    """
    budget = step_budget or settings.DEFAULT_STEP_BUDGET
    for word in corpus:
        accepts_first = MachineService.run_exhaustive(first, word, budget).p_acc > 0
        accepts_second = MachineService.run_exhaustive(second, word, budget).p_acc > 0
        if accepts_first == accepts_second:
            raise PromiseViolationError(
                f"input {word!r} is accepted by {'both machines' if accepts_first else 'neither machine'}"
            )

    accept, reject, nonpost, fork = "accept", "reject", "nonpost", "fork"
    first_states, first_delta = _prefixed(first, "n1.", {first.accept: accept, first.reject: nonpost})
    second_states, second_delta = _prefixed(second, "n2.", {second.accept: reject, second.reject: nonpost})
    first_initial = {first.accept: accept, first.reject: nonpost}.get(first.initial, f"n1.{first.initial}")
    second_initial = {second.accept: reject, second.reject: nonpost}.get(second.initial, f"n2.{second.initial}")

    delta = {
        (fork, BLANK, BLANK): [
            Rule(next_state=first_initial, write=BLANK, d_in=0, d_wk=0, probability=HALF),
            Rule(next_state=second_initial, write=BLANK, d_in=0, d_wk=0, probability=HALF),
        ],
    }
    delta.update(first_delta)
    delta.update(second_delta)

    combined = MachineSpec(
        name=f"{first.name}+{second.name}",
        kind=MachineKind.POSTPTM,
        states=[fork] + first_states + second_states + [accept, reject, nonpost],
        initial=fork,
        accept=accept,
        reject=reject,
        nonpost=nonpost,
        input_alphabet=sorted(set(first.input_alphabet) | set(second.input_alphabet)),
        work_alphabet=sorted(set(first.work_alphabet) | set(second.work_alphabet)),
        delta=delta,
    )
    log_pipeline_event("combine", machine=combined.name, states=len(combined.states), corpus=len(corpus))
    return combined


def postptm_to_ntm(spec: MachineSpec) -> MachineSpec:
    """Read a PostPTM as an NTM: nonpost becomes reject, accepting paths are kept."""
    if spec.nonpost is None:
        return spec.model_copy(update={"name": f"{spec.name}-ntm", "kind": MachineKind.NTM})
    mapping = {spec.nonpost: spec.reject}
    delta = {triple: [_retarget(rule, mapping) for rule in rules] for triple, rules in spec.delta.items()}
    return spec.model_copy(update={
        "name": f"{spec.name}-ntm",
        "kind": MachineKind.NTM,
        "states": [state for state in spec.states if state != spec.nonpost],
        "nonpost": None,
        "delta": delta,
        "compile_target": False,
    })
