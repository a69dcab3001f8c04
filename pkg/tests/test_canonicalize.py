"""Test the canonical form construction."""

from fractions import Fraction

import pytest

from app.core.errors import CanonicalizationError
from app.schemas.machine import MachineKind
from app.services.canonicalize_service import canonicalize, default_probes
from app.services.machine_file_service import format_machine_file, parse_machine_file
from app.services.machine_service import MachineService


def test_default_probes(load):
    """All words of length at most two."""
    assert default_probes(load("walker")) == ["", "a", "b", "aa", "ab", "ba", "bb"]


@pytest.mark.parametrize("name, T", [
    ("det_acc", 2),
    ("det_acc", 4),
    ("worker", 3),
    ("worker", 4),
    ("walker", 3),
    ("d1", 3),
    ("quarter", 4),
    ("coin_half", 3),
])
def test_canonicalize_preserves_acceptance(load, name, T):
    """The canonical machine keeps every probe's acceptance and halts at exactly T."""
    spec = load(name)
    canonical = canonicalize(spec, T, 1)
    assert canonical.kind == MachineKind.PTM
    assert canonical.work_alphabet == ["0", "1"]
    assert canonical.name == f"{name}-canonical-T{T}"
    for word in default_probes(spec):
        original = MachineService.run_exhaustive(spec, word, T, space_cap=1)
        result = MachineService.run_exhaustive(canonical, word, T)
        assert result.p_acc == original.p_acc
        assert result.halting_time == {T: Fraction(1)}
        assert MachineService.check_canonical(canonical, word, T).is_canonical


def test_canonical_machine_validates(load):
    """The result is a well-formed compilation target."""
    canonical = canonicalize(load("worker"), 3, 1)
    assert canonical.compile_target
    assert MachineService.validate_well_formed(canonical) == []


def test_canonical_machine_round_trips(load):
    """The canonical machine can be written and read back."""
    canonical = canonicalize(load("d1"), 3, 1)
    assert parse_machine_file(format_machine_file(canonical)).model_dump() == canonical.model_dump()


def test_dirty_cleanup_needs_a_step(load):
    """A verdict on a dirty tape at step T cannot be cleaned in time."""
    with pytest.raises(CanonicalizationError, match="cleanup does not finish"):
        canonicalize(load("worker"), 2, 1)


def test_slow_machine_misses_clock(load):
    """A machine still running at T is refused."""
    with pytest.raises(CanonicalizationError, match="does not halt within 3 steps"):
        canonicalize(load("slow5"), 3, 1)


def test_post_selecting_machine_refused(post_half):
    with pytest.raises(CanonicalizationError, match="cannot canonicalize a postptm machine"):
        canonicalize(post_half, 2, 1)


def test_non_binary_work_alphabet_refused(d1):
    spec = d1.model_copy(update={"work_alphabet": ["0", "1", "2"]})
    with pytest.raises(CanonicalizationError, match="subset of"):
        canonicalize(spec, 3, 1)


def test_explicit_probes(load):
    """Only the given probes are checked."""
    canonical = canonicalize(load("quarter"), 2, 1, probe_inputs=["a"])
    assert MachineService.run_exhaustive(canonical, "a", 2).p_acc == Fraction(1, 4)
    with pytest.raises(CanonicalizationError):
        canonicalize(load("quarter"), 2, 1)


@pytest.mark.parametrize("T", [2, 4, 8, 16, 32])
def test_state_count_grows_linearly_after_halting(det_acc, T):
    """Det_acc halts at step 2; each later step adds one idle state: s0, s1, T - 2 idles, accept, reject."""
    assert len(canonicalize(det_acc, T, 1).states) == T + 2


def test_state_count_bound(load):
    """Past the last halt the two-cell machine gains at most two idle states per step."""
    counts = [len(canonicalize(load("scribe"), T, 2).states) for T in range(7, 13)]
    assert all(later - earlier <= 2 for earlier, later in zip(counts, counts[1:]))


def test_two_cell_cleanup(load, scribe_canonical):
    """Sweeping right then left blanks both cells and parks the work head by step 8."""
    scribe = load("scribe")
    assert "clean-accept@4:0:0:R*" in scribe_canonical.states
    assert "clean-accept@5:0:1:L*" in scribe_canonical.states
    assert "clean-accept@6:0:0:L*" in scribe_canonical.states
    for word in ("", "a"):
        original = MachineService.run_exhaustive(scribe, word, 8, space_cap=2)
        result = MachineService.run_exhaustive(scribe_canonical, word, 8, space_cap=2)
        assert original.p_acc == result.p_acc == Fraction(3, 4)
        assert result.halting_time == {8: Fraction(1)}
        assert result.max_work_cell == 1
        assert MachineService.check_canonical(scribe_canonical, word, 8).is_canonical


def test_two_cell_needs_both_cells(load):
    with pytest.raises(CanonicalizationError):
        canonicalize(load("scribe"), 8, 1)


def test_two_cell_cleanup_must_fit(load):
    """The dirty accepting path halts at step 4 and needs three cleanup steps."""
    canonicalize(load("scribe"), 7, 2)
    with pytest.raises(CanonicalizationError, match="cleanup does not finish"):
        canonicalize(load("scribe"), 6, 2)
