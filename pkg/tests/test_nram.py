import pytest

from src.errors import NotAccepting, SchemeConstraint
from src.nram import NramScheme, pack_alpha, unpack_alpha, verify_nram
from src.numerics import PrimOp

CASES = [
    ("acceptall", 1, 1),
    ("flipper", 0, 2),
]
ALL_SCHEMES = [scheme for scheme in NramScheme]


@pytest.mark.parametrize("scheme", ALL_SCHEMES)
@pytest.mark.parametrize("name, input, s", CASES)
def test_genuine_certificates_pass_inside_their_set(load_tm, scheme, name, input, s):
    spec = load_tm(name)
    pack = pack_alpha(scheme, spec, input, s)
    verdict = verify_nram(scheme, pack.alpha, spec, input, strict=True)
    assert verdict.accepted, verdict.reason
    assert verdict.violations == 0
    assert verdict.operations > 0
    assert verdict.scheme is scheme


@pytest.mark.parametrize("scheme", ALL_SCHEMES)
def test_unpacking_returns_the_witnesses(load_tm, scheme):
    spec = load_tm("acceptall")
    pack = pack_alpha(scheme, spec, 1, 1)
    parts = unpack_alpha(scheme, pack.alpha)
    assert parts["w1"] == pack.witness.w1
    assert parts["w2"] == pack.witness.w2
    assert parts["w3"] == pack.witness.w3
    assert parts["w4"] == pack.witness.w4
    assert parts["w5"] == pack.witness.w5


def test_shl_low_block(load_tm):
    spec = load_tm("acceptall")
    assert pack_alpha("shl", spec, 0, 3).alpha % 8 == 3
    assert pack_alpha("shl", spec, 1, 1).alpha % 4 == 1


def test_shl_needs_a_power_of_two_width(load_tm):
    with pytest.raises(SchemeConstraint):
        pack_alpha("shl", load_tm("staircase"), 0, 3)


def test_shr_element_width_is_a_power_of_two(load_tm):
    pack = pack_alpha("shr", load_tm("flipper"), 0, 2)
    assert pack.u & (pack.u - 1) == 0
    assert pack.alpha & (pack.u - 1) == pack.u - 1
    assert pack.advice


def test_div_advice_holds_every_shift(load_tm):
    pack = pack_alpha("div", load_tm("flipper"), 0, 2)
    assert len(pack.advice) > 0
    assert all(a.bit_length() <= pack.u for a in pack.advice)
    assert pack_alpha("mul", load_tm("flipper"), 0, 2).advice == []


@pytest.mark.parametrize("scheme", ALL_SCHEMES)
def test_bit_flips_are_rejected(load_tm, scheme):
    spec = load_tm("acceptall")
    pack = pack_alpha(scheme, spec, 1, 1)
    bits = pack.alpha.bit_length()
    for position in sorted({0, 1, 2, bits // 3, bits // 2, bits - 2, bits - 1}):
        verdict = verify_nram(scheme, pack.alpha ^ (1 << position), spec, 1)
        assert not verdict.accepted, position


@pytest.mark.parametrize("scheme", ALL_SCHEMES)
def test_trailing_bits_are_rejected(load_tm, scheme):
    spec = load_tm("acceptall")
    pack = pack_alpha(scheme, spec, 1, 1)
    verdict = verify_nram(scheme, pack.alpha | 1 << (4 * pack.alpha.bit_length()), spec, 1)
    assert not verdict.accepted
    assert verdict.reason == "trailing"


@pytest.mark.parametrize("scheme, s", [("shl", 3), ("shr", 2), ("div", 2), ("mul", 2)])
def test_rejecting_runs(load_tm, scheme, s):
    spec = load_tm("reject")
    with pytest.raises(NotAccepting):
        pack_alpha(scheme, spec, 0, s)
    pack = pack_alpha(scheme, spec, 0, s, allow_rejecting=True)
    verdict = verify_nram(scheme, pack.alpha, spec, 0)
    assert not verdict.accepted
    assert verdict.reason == "final_state"


@pytest.mark.parametrize("scheme", ALL_SCHEMES)
def test_junk_never_raises(load_tm, scheme):
    spec = load_tm("acceptall")
    for alpha in (0, 1, 2, 3, 0xff, 1 << 100, (1 << 64) - 1, 0x5a5a5a5a5a):
        verdict = verify_nram(scheme, alpha, spec, 1)
        assert not verdict.accepted


def test_oversized_certificates(load_tm):
    verdict = verify_nram("mul", 1 << (1 << 23), load_tm("acceptall"), 1)
    assert verdict.reason == "too_large"


def test_gates():
    assert NramScheme.SHL.gate.allowed >= {PrimOp.SHL, PrimOp.INC, PrimOp.AND}
    assert PrimOp.SHR not in NramScheme.MUL.gate.allowed
    assert NramScheme.SHL.shr_free and NramScheme.MUL.shr_free
    assert not NramScheme.DIV.shr_free
