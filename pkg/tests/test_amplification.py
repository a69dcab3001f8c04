"""Test the amplifier runs, the decision procedure and the one-sided recognizer."""

from fractions import Fraction

import pytest

from app.core.errors import NotCanonicalError, PromiseViolationError, UndefinedDecisionError
from app.schemas.decision import PreparedDecision
from app.schemas.quantum import StateVector
from app.services.amplification_service import (
    coeq_recognize,
    covering_p,
    infer_space_bound,
    iterate_u_p,
    overall_decide,
    prepare_decision,
    run_M_p,
    verify_y_bounds,
)

APPROX = 1e-8
HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def d1_prepared(d1):
    return prepare_decision(d1, "a", 2, 1)


@pytest.fixture(scope="module")
def quarter_prepared(quarter):
    return prepare_decision(quarter, "a", 2, 1)


def test_prepare_decision(d1_prepared):
    assert d1_prepared.acceptance == Fraction(3, 4)
    assert d1_prepared.width == 13
    assert d1_prepared.u_tilde.ratio() == pytest.approx(-0.2, abs=APPROX)


def test_prepare_requires_canonical(d1):
    with pytest.raises(NotCanonicalError):
        prepare_decision(d1, "", 2, 1)


def test_infer_space_bound(d1, load):
    assert infer_space_bound(d1, "a", 2) == 1
    assert infer_space_bound(load("worker"), "", 2) == 1


def test_iterate_doubles_second_amplitude():
    u = iterate_u_p(StateVector.from_amplitudes([1.0, 1.0]), 2)
    assert u.ratio() == pytest.approx(4.0, abs=APPROX)
    assert u.log2_survival < 0


def test_runs_on_d1(d1_prepared):
    """M[0] applies two iterations, M[1] one."""
    first, second = run_M_p(d1_prepared, 0), run_M_p(d1_prepared, 1)
    assert (first.steps, second.steps) == (2, 1)
    assert first.p_minus == pytest.approx(81 / 82, abs=APPROX)
    assert second.p_minus == pytest.approx(49 / 58, abs=APPROX)
    assert first.outcome == second.outcome == "-"
    assert first.quadrant == "fourth"
    with pytest.raises(ValueError):
        run_M_p(d1_prepared, 2)


def test_decide_d1(d1_prepared):
    trace = overall_decide(d1_prepared)
    assert trace.verdict == "accept"
    assert trace.outcome == "accept"
    assert trace.counter == -2
    assert trace.p_acc == pytest.approx(3969 / 3978, abs=APPROX)
    assert trace.product_ratio == pytest.approx(441.0, rel=1e-6)
    assert trace.covering_p == 0


def test_decide_quarter(quarter_prepared):
    trace = overall_decide(quarter_prepared)
    assert [record.p_plus for record in trace.records] == [
        pytest.approx(49 / 50, abs=APPROX),
        pytest.approx(25 / 26, abs=APPROX),
    ]
    assert trace.verdict == "reject"
    assert trace.p_acc == pytest.approx(1 / 1226, abs=APPROX)
    assert trace.records[0].quadrant == "first"


def test_decide_undefined_at_half(coin_half):
    prepared = prepare_decision(coin_half, "", 1, 1)
    with pytest.raises(UndefinedDecisionError, match="A = 1/2"):
        overall_decide(prepared)


def test_sampling_is_seeded(d1_prepared):
    first = overall_decide(d1_prepared, sample=200, seed=7)
    second = overall_decide(d1_prepared, sample=200, seed=7)
    assert first.sample_counts == second.sample_counts
    assert sum(first.sample_counts.values()) == 200
    assert set(first.sample_counts) == {"accept", "reject", "nonpost"}


@pytest.mark.parametrize("acceptance, T, expected", [
    (Fraction(3, 4), 2, 0),
    (Fraction(1, 4), 2, 0),
    (Fraction(0), 2, 1),
    (Fraction(1), 3, 2),
    (Fraction(7, 16), 4, 0),
    (Fraction(1, 2), 3, None),
])
def test_covering_p(acceptance, T, expected):
    assert covering_p(acceptance, T) == expected


def test_verify_y_bounds():
    report = verify_y_bounds(6)
    assert report.y_plus == pytest.approx(25 / 34)
    assert report.y_prime_minus == pytest.approx(25 / 34)
    assert report.bound == Fraction(25, 34)
    assert report.exceeds_seven_tenths
    assert [scan.checked for scan in report.scans] == [2 ** T for T in range(1, 7)]
    assert all(scan.min_correct >= Fraction(25, 34) for scan in report.scans)
    assert report.holds


def test_coeq_accepts_d1(d1_prepared):
    result = coeq_recognize(d1_prepared)
    assert result.p_acc == pytest.approx(0.8, abs=APPROX)
    assert result.verdict == "accept"


def test_coeq_rejects_half(coin_half):
    result = coeq_recognize(prepare_decision(coin_half, "", 1, 1))
    assert result.p_acc == pytest.approx(0.0, abs=1e-12)
    assert result.verdict == "reject"


def test_coeq_promise():
    prepared = PreparedDecision(
        machine="gap",
        input_word="",
        T=2,
        space_bound=1,
        acceptance=Fraction(5, 8),
        u_tilde=StateVector.from_amplitudes([9 / 8, -1 / 8]),
        width=1,
        gates=0,
    )
    with pytest.raises(PromiseViolationError):
        coeq_recognize(prepared)


@pytest.mark.slow
def test_decide_on_corpus(corpus_entry):
    """Right verdict within the 3/10 error bound and a 7/3 product ratio on every corpus machine."""
    label, spec, word, T, space_bound = corpus_entry
    prepared = prepare_decision(spec, word, T, space_bound)
    acceptance = prepared.acceptance
    expected_ratio = float((HALF - acceptance) / (HALF + acceptance))
    assert prepared.u_tilde.ratio() == pytest.approx(expected_ratio, abs=APPROX), label

    if acceptance == HALF:
        with pytest.raises(UndefinedDecisionError):
            overall_decide(prepared)
        assert coeq_recognize(prepared).p_acc == pytest.approx(0.0, abs=1e-12), label
        return

    trace = overall_decide(prepared)
    accepted = acceptance > HALF
    assert trace.verdict == ("accept" if accepted else "reject"), label
    assert (trace.p_rej if accepted else trace.p_acc) <= 0.3, label
    assert trace.product_ratio >= 7 / 3, label
    assert coeq_recognize(prepared).verdict == "accept", label
