import pytest

from src.errors import BudgetExceeded, ForwardReference, GenerationFailed, ParseError
from src.numerics import PrimOp
from src.slp import LAZY_OPS, dump_slp, eval_slp_direct, gen_random_slp, nonzero_direct, parse_slp


def test_fixture_evaluates_to_3576(load_slp):
    p = load_slp("carry_sum")
    assert p.n == 14
    assert eval_slp_direct(p).output == 3576
    assert nonzero_direct(p)


def test_parse_and_dump_keep_the_program():
    text = "inputs 1\nadd 2 1\nshl 3 1\n"
    p = parse_slp(text)
    assert p.input_slots == 1
    assert p.first_step == 3
    assert dump_slp(p) == text
    assert eval_slp_direct(p, [5]).output == 12


def test_forward_reference_is_rejected():
    with pytest.raises(ForwardReference):
        parse_slp("add 1 2\n")


def test_bad_lines():
    with pytest.raises(ParseError):
        parse_slp("frob 1 1\n")
    with pytest.raises(ParseError):
        parse_slp("add 1\n")
    with pytest.raises(ParseError):
        parse_slp("add 1 1\ninputs 1\n")


def test_input_count_must_match():
    p = parse_slp("inputs 2\nadd 2 3\n")
    with pytest.raises(ParseError):
        eval_slp_direct(p, [1])


def test_direct_evaluation_respects_the_budget(load_slp):
    with pytest.raises(BudgetExceeded):
        eval_slp_direct(load_slp("tower"), budget=1 << 10)


def test_random_programs_stay_within_budget():
    for seed in range(5):
        p = gen_random_slp(10, LAZY_OPS, seed=seed, budget=256, shift_cap=8)
        assert len(p.steps) == 10
        assert eval_slp_direct(p, budget=256).output.bit_length() <= 256


def test_random_programs_are_reproducible():
    a = gen_random_slp(8, [PrimOp.ADD, PrimOp.SHL, PrimOp.SUB], seed=7)
    b = gen_random_slp(8, [PrimOp.ADD, PrimOp.SHL, PrimOp.SUB], seed=7)
    assert dump_slp(a) == dump_slp(b)


def test_frozen_slots_never_feed_shifts():
    p = gen_random_slp(12, [PrimOp.ADD, PrimOp.SHL], seed=3, input_slots=1, inputs=[1 << 40], frozen_slots=[2])
    tainted = {2}
    for offset, step in enumerate(p.steps):
        index = p.first_step + offset
        if step.op is PrimOp.SHL:
            assert step.args[1] not in tainted
        if any(a in tainted for a in step.args):
            tainted.add(index)


@pytest.mark.parametrize("length", [0, 1])
def test_random_programs_need_two_steps(length):
    with pytest.raises(GenerationFailed):
        gen_random_slp(length, LAZY_OPS, seed=1)
    assert len(gen_random_slp(2, LAZY_OPS, seed=1).steps) == 2
