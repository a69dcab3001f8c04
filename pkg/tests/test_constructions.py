"""Test the constructions around post-selection."""

from fractions import Fraction

import pytest

from app.core.errors import PostselectError, PromiseViolationError
from app.schemas.machine import MachineKind
from app.services.construction_service import (
    combine_ntms_zero_error,
    postptm_to_ntm,
    postselect_to_restart,
    postselect_to_unbounded,
    restart_semantics_exact,
)
from app.services.machine_service import MachineService


def test_unbounded_splits_nonpost(post_eighth):
    """Half of the nonpost mass goes to each verdict."""
    built = postselect_to_unbounded(post_eighth)
    assert built.kind == MachineKind.PTM
    assert built.nonpost is None
    assert MachineService.validate_well_formed(built) == []
    distribution = MachineService.run_exhaustive(built, "", 3)
    assert (distribution.p_acc, distribution.p_rej) == (Fraction(3, 8), Fraction(5, 8))


def test_unbounded_keeps_side_of_half(post_half):
    """Post-selected acceptance above 1/2 stays above 1/2."""
    distribution = MachineService.run_exhaustive(postselect_to_unbounded(post_half), "", 2)
    assert distribution.p_acc > Fraction(1, 2)


def test_unbounded_without_nonpost(d1):
    assert postselect_to_unbounded(d1) is d1


def test_restart_semantics(post_eighth):
    """Limit 1/4 after an expected six steps."""
    semantics = restart_semantics_exact(postselect_to_restart(post_eighth, 16), "")
    assert semantics.limit_acc == Fraction(1, 4)
    assert semantics.limit_rej == Fraction(3, 4)
    assert semantics.halting_per_episode == Fraction(1, 2)
    assert semantics.expected_episode_length == 3
    assert semantics.expected_steps == 6


def test_restart_matches_postselection(post_half):
    machine = postselect_to_restart(post_half, 16)
    assert machine.base.nonpost == machine.restart_state == "restart"
    semantics = restart_semantics_exact(machine, "")
    accept, _ = MachineService.postselect_normalize(MachineService.run_exhaustive(post_half, "", 16))
    assert semantics.limit_acc == accept == 1
    assert semantics.expected_steps == 2


def test_restart_state_name_is_fresh(post_eighth):
    """A machine that already has a state called restart keeps it."""
    def rename(state):
        return "restart" if state == "w" else state

    delta = {
        (rename(state), read_in, read_wk): [
            rule.model_copy(update={"next_state": rename(rule.next_state)}) for rule in rules
        ]
        for (state, read_in, read_wk), rules in post_eighth.delta.items()
    }
    spec = post_eighth.model_copy(update={"states": [rename(state) for state in post_eighth.states], "delta": delta})
    machine = postselect_to_restart(spec, 16)
    assert machine.restart_state == "restart1"
    assert "restart" in machine.base.states
    assert machine.base.nonpost == "restart1"
    semantics = restart_semantics_exact(machine, "")
    assert semantics.limit_acc == Fraction(1, 4)
    assert semantics.expected_steps == 6


def test_restart_errors(d1, post_eighth):
    with pytest.raises(PostselectError, match="needs a nonpost state"):
        postselect_to_restart(d1)
    with pytest.raises(PostselectError, match="does not halt within 2 steps"):
        restart_semantics_exact(postselect_to_restart(post_eighth, 2), "")


@pytest.mark.parametrize("word, accepted", [("ab", True), ("ba", True), ("bb", False), ("", False)])
def test_combine_zero_error(contains_a_n1, contains_a_n2, word, accepted):
    """The post-selected answer is exact on every promise input."""
    combined = combine_ntms_zero_error(contains_a_n1, contains_a_n2, corpus=[word], step_budget=16)
    assert combined.kind == MachineKind.POSTPTM
    assert MachineService.validate_well_formed(combined) == []
    distribution = MachineService.run_exhaustive(combined, word, 16)
    assert MachineService.postselect_normalize(distribution)[0] == (1 if accepted else 0)


def test_combine_masses(contains_a_n1, contains_a_n2):
    distribution = MachineService.run_exhaustive(combine_ntms_zero_error(contains_a_n1, contains_a_n2), "ab", 16)
    assert distribution.p_acc == Fraction(1, 4)
    assert distribution.p_npost == Fraction(3, 4)


def test_combine_promise(contains_a_n1):
    with pytest.raises(PromiseViolationError, match="both machines"):
        combine_ntms_zero_error(contains_a_n1, contains_a_n1, corpus=["ab"], step_budget=16)
    with pytest.raises(PromiseViolationError, match="neither machine"):
        combine_ntms_zero_error(contains_a_n1, contains_a_n1, corpus=["bb"], step_budget=16)


def test_postptm_to_ntm(post_eighth):
    """Nonpost becomes reject; accepting paths are unchanged."""
    ntm = postptm_to_ntm(post_eighth)
    assert ntm.kind == MachineKind.NTM
    assert ntm.nonpost is None
    distribution = MachineService.run_exhaustive(ntm, "", 3)
    assert distribution.p_acc == Fraction(1, 8)
    assert distribution.p_rej == Fraction(7, 8)
