import pytest

from src.errors import ArityMismatch, DivByZero, NotExact
from src.numerics import PrimOp, clear, eval_primitive, natsub_via_bool, set_mask, tweaked_not


def test_natural_subtraction_floors_at_zero():
    assert eval_primitive(PrimOp.SUB, 7, 5) == 2
    assert eval_primitive(PrimOp.SUB, 5, 7) == 0
    assert eval_primitive(PrimOp.SUB, 5, 5) == 0


def test_tweaked_not_flips_up_to_the_top_bit():
    assert tweaked_not(0) == 0
    assert tweaked_not(0b1010) == 0b0101
    assert tweaked_not(1 << 6) == (1 << 6) - 1


def test_clear_and_set_mask():
    assert clear(0b1111, 0b0101) == 0b1010
    assert set_mask(0b1001) == 0b1111
    assert set_mask(0) == 0


def test_exact_division():
    assert eval_primitive(PrimOp.DIV, 12, 4) == 3
    with pytest.raises(NotExact):
        eval_primitive(PrimOp.DIV, 13, 4)
    with pytest.raises(DivByZero):
        eval_primitive(PrimOp.DIV, 1, 0)
    assert eval_primitive(PrimOp.IDIV, 13, 4) == 3


def test_shifts_and_inc():
    assert eval_primitive(PrimOp.SHL, 3, 4) == 48
    assert eval_primitive(PrimOp.SHR, 48, 4) == 3
    assert eval_primitive(PrimOp.INC, 41) == 42


def test_arity_is_checked():
    with pytest.raises(ArityMismatch):
        eval_primitive(PrimOp.ADD, 1)
    with pytest.raises(ArityMismatch):
        eval_primitive(PrimOp.NOT, 1, 2)


@pytest.mark.parametrize("a", range(0, 40))
@pytest.mark.parametrize("b", [0, 1, 2, 5, 7, 16, 31, 39])
def test_natsub_from_boolean_operations(a, b):
    assert natsub_via_bool(a, b) == max(a - b, 0)


def test_mnemonics_parse_case_insensitively():
    assert PrimOp.parse(" SHL ") is PrimOp.SHL
    with pytest.raises(ValueError):
        PrimOp.parse("pow")
