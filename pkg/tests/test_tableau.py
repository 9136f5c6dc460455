from dataclasses import replace

import pytest

from src.errors import GateViolation, NotAccepting, ParseError
from src.numerics import PrimOp
from src.ram import OpSetGate
from src.tableau import (
    DirectArithmetic,
    TableauCircuit,
    TableauWitness,
    build_tableau,
    make_witnesses,
    run_checks,
    step_fragment,
    verify_tableau,
    witnesses_for,
)
from src.tm import ACCEPT, REJECT, TAPE_EXCEEDED


def test_witnesses_of_acceptall(load_tm):
    w = make_witnesses(load_tm("acceptall"), 1, 2)
    assert w.w1 == 3
    assert w.w3 == 18
    assert w.w2 == 19173953
    assert w.elements() == [65, 73, 73]
    assert w.w4 == 1838599
    assert w.w5 == 262657


def test_witness_file_format(load_tm):
    w = make_witnesses(load_tm("staircase"), 0, 3)
    text = w.dumps()
    assert text.startswith(f"w1={w.w1}\nw2=0x")
    assert TableauWitness.loads(text) == w
    assert TableauWitness.loads("# comment\n" + text.replace("w2=", "w2 = ")) == w


def test_witness_file_errors():
    with pytest.raises(ParseError):
        TableauWitness.loads("w1=3\nw2=1\n")
    with pytest.raises(ParseError):
        TableauWitness.loads("w1=3\nw2=1\nw3=0\nw4=1\nw5=zz\n")
    with pytest.raises(ParseError):
        TableauWitness.loads("w9=3\n")


def test_rejecting_runs_have_no_witnesses(load_tm):
    with pytest.raises(NotAccepting):
        make_witnesses(load_tm("reject"), 0, 2)
    assert build_tableau(load_tm("reject"), 0, 2).final_state == REJECT


@pytest.mark.parametrize("name, input, s", [
    ("acceptall", 1, 2),
    ("acceptall", 0, 1),
    ("flipper", 0, 2),
    ("staircase", 0, 3),
    ("bouncer", 0, 4),
    ("unary", 3, 3),
])
def test_genuine_witnesses_are_accepted(load_tm, name, input, s):
    spec = load_tm(name)
    verdict = verify_tableau(spec, input, make_witnesses(spec, input, s))
    assert verdict.accepted
    assert verdict.reason == "accepted"


def test_genuine_witnesses_stay_inside_shl_and_booleans(load_tm):
    spec = load_tm("bouncer")
    verdict = verify_tableau(spec, 0, make_witnesses(spec, 0, 3), strict=True)
    assert verdict.accepted
    assert verdict.violations == 0


def test_every_single_bit_flip_is_rejected(load_tm):
    spec = load_tm("acceptall")
    w = make_witnesses(spec, 1, 2)
    for bit in range(27):
        assert not verify_tableau(spec, 1, replace(w, w2=w.w2 ^ (1 << bit))), bit


def test_rejection_reasons(load_tm):
    spec = load_tm("acceptall")
    w = make_witnesses(spec, 1, 2)
    assert verify_tableau(spec, 0, w).reason == "initial_tape"
    assert verify_tableau(spec, 4, w).reason == "input_width"
    assert verify_tableau(spec, 1, replace(w, w5=w.w5 + 1)).reason == "w5_identity"
    assert verify_tableau(spec, 1, replace(w, w2=w.w2 | 1 << 27)).reason == "excess_bits"
    assert verify_tableau(spec, 1, replace(w, w1=1 << 30)).reason == "too_large"


def test_final_state_is_selectable(load_tm):
    spec = load_tm("staircase")
    tableau = build_tableau(spec, 0, 2)
    assert tableau.final_state == TAPE_EXCEEDED
    w = witnesses_for(tableau)
    assert not verify_tableau(spec, 0, w)
    assert verify_tableau(spec, 0, w, final_state=TAPE_EXCEEDED)


def test_padding_keeps_the_tableau_valid(load_tm):
    spec = load_tm("flipper")
    w = witnesses_for(build_tableau(spec, 0, 2).padded(9))
    assert w.n == 9
    assert verify_tableau(spec, 0, w)


def test_strict_backend_reports_the_operation():
    ar = DirectArithmetic(3, 0, gate=OpSetGate.parse("shl,bool"), strict=True)
    with pytest.raises(GateViolation):
        ar.apply(PrimOp.ADD, 1, 1)
    lenient = DirectArithmetic(3, 0, gate=OpSetGate.parse("shl,bool"))
    lenient.apply(PrimOp.ADD, 1, 1)
    assert lenient.violations == 1


def test_shr_free_and_bounded_fragments_agree(load_tm):
    spec = load_tm("bouncer")
    w = make_witnesses(spec, 0, 3)
    for shr_free in (True, False):
        fragment = step_fragment(spec, shr_free=shr_free)
        arith = DirectArithmetic(w.w1, w.w3, gate=OpSetGate())
        circuit = TableauCircuit(arith, spec, 0, w.w2, w.w4, w.w5, fragment)
        assert run_checks(circuit, ACCEPT).accepted
    assert step_fragment(spec).scale_shift > 0
    assert step_fragment(spec, shr_free=False).scale_shift == 0
