import random

import pytest

from src.errors import ArityMismatch, GenerationFailed, UnsupportedOp
from src.lazy import (
    LazyEvaluator,
    LazyMode,
    Ordering,
    PobitIndex,
    aln_omegas,
    balanced_digits,
    compare_indices,
    enumerate_indices,
    eval_bit,
    formal_vars,
    next_index,
    nonzero_lazy,
    position_oracle,
    space_report,
    substitute_aln,
)
from src.slp import LAZY_OPS, eval_slp_direct, gen_random_slp, parse_slp


def _zero(p, aln=False):
    return PobitIndex.zero(len(formal_vars(p, aln)))


def test_fixture_bits(load_slp):
    p = load_slp("carry_sum")
    zero = _zero(p)
    assert eval_bit(p, p.n, zero.moved(3)) == 1
    assert [eval_bit(p, p.n, zero.moved(k)) for k in range(14)] == [(3576 >> k) & 1 for k in range(14)]
    assert nonzero_lazy(p)


def test_every_intermediate_value(load_slp):
    p = load_slp("carry_sum")
    values = eval_slp_direct(p).values
    evaluator = LazyEvaluator(p)
    for t, value in enumerate(values):
        assert [evaluator.bit(t, evaluator.zero.moved(k)) for k in range(13)] == [(value >> k) & 1 for k in range(13)]


def test_enumerated_positions_cover_the_changes(load_slp):
    p = load_slp("carry_sum")
    positions = [position_oracle(p, index) for index in enumerate_indices(p)]
    assert positions == sorted(set(positions))
    assert {3, 9, 10, 12} <= set(positions)


def test_index_comparison(load_slp):
    p = load_slp("carry_sum")
    zero = _zero(p)
    assert compare_indices(p, zero, zero.moved(1)) is Ordering.LESS
    # the two shift amounts are 10 and 9
    assert compare_indices(p, zero.bump(0), zero.bump(1).moved(1)) is Ordering.EQUAL
    assert compare_indices(p, zero.bump(0), zero.bump(1)) is Ordering.GREATER
    with pytest.raises(ArityMismatch):
        compare_indices(p, PobitIndex.zero(5), zero)


def test_next_index_walks_upwards(load_slp):
    p = load_slp("carry_sum")
    first = next_index(p)
    assert first == _zero(p)
    second = next_index(p, first)
    assert position_oracle(p, second) > position_oracle(p, first)


def test_tower_beyond_direct_evaluation(load_slp):
    p = load_slp("tower")
    assert nonzero_lazy(p)
    report = space_report()
    assert 0 < report.max_scalar_bits < 1 << 10
    assert eval_bit(p, p.n, _zero(p)) == 0


def test_tower_minus_one_ends_in_a_one():
    p = parse_slp("".join(f"shl 1 {k}\n" for k in range(1, 7)) + "sub 7 1\n")
    assert eval_bit(p, p.n, _zero(p)) == 1
    assert eval_bit(p, p.n, _zero(p).moved(1)) == 1


def test_space_report_of_an_explicit_evaluator(load_slp):
    evaluator = LazyEvaluator(load_slp("carry_sum"))
    evaluator.nonzero()
    report = space_report(evaluator)
    assert report.max_live_indices > 0


@pytest.mark.parametrize("seed", range(30))
def test_differential_against_direct(seed):
    rng = random.Random(seed)
    inputs = [rng.getrandbits(10)]
    try:
        p = gen_random_slp(8, LAZY_OPS, seed=seed, budget=256, input_slots=1, inputs=inputs, shift_cap=12)
    except GenerationFailed:
        pytest.skip("no program fits the budget")
    value = eval_slp_direct(p, inputs, 256).output
    evaluator = LazyEvaluator(p, inputs)
    assert evaluator.nonzero() == (value != 0)
    assert [evaluator.bit(p.n, evaluator.zero.moved(k)) for k in range(24)] == [(value >> k) & 1 for k in range(24)]


def test_aln_mode(load_slp):
    p = load_slp("aln_cmp")
    assert nonzero_lazy(p, mode=LazyMode.ALN)
    assert not nonzero_lazy(p, [1 << 20])
    assert nonzero_lazy(p, [1 << 21])


def test_aln_mode_cancellation():
    p = parse_slp("inputs 1\nadd 2 1\nsub 3 2\n")
    assert nonzero_lazy(p, mode=LazyMode.ALN)
    assert not nonzero_lazy(parse_slp("inputs 1\nsub 2 2\n"), mode=LazyMode.ALN)


def test_aln_bits_above_the_constant_part():
    # X + 5 for a huge X: the low bits are those of 5, bit X is set
    p = parse_slp("inputs 1\nadd 1 1\nadd 3 3\nadd 4 1\nadd 2 5\n")
    zero = _zero(p, aln=True)
    assert [eval_bit(p, p.n, zero.moved(k), mode=LazyMode.ALN) for k in range(4)] == [1, 0, 1, 0]
    assert eval_bit(p, p.n, zero.bump(0), mode=LazyMode.ALN) == 1
    assert eval_bit(p, p.n, zero.bump(0).moved(-1), mode=LazyMode.ALN) == 0


def test_aln_shift_amounts_must_not_depend_on_x():
    with pytest.raises(UnsupportedOp):
        nonzero_lazy(parse_slp("inputs 1\nshl 1 2\n"), mode=LazyMode.ALN)


def test_aln_omegas_double():
    p = parse_slp("inputs 1\nadd 2 1\n")
    omegas = aln_omegas(p, 3)
    assert omegas[1] == 2 * omegas[0] and omegas[2] == 2 * omegas[1]


def test_unsupported_operations():
    with pytest.raises(UnsupportedOp):
        LazyEvaluator(parse_slp("add 1 1\ndiv 2 2\n"))


@pytest.mark.parametrize("value", [0, 1, 5, 6, 255, 1 << 20, 0b1011001110])
def test_balanced_digits(value):
    digits = balanced_digits(value)
    assert all(d in (-1, 0, 1) for d in digits)
    assert sum(d << i for i, d in enumerate(digits)) == value


def test_live_indices_without_shifts_stay_within_the_program_length():
    p = parse_slp("add 1 1\nadd 2 1\nadd 3 3\nsub 4 2\nxor 5 3\nor 6 4\n")
    evaluator = LazyEvaluator(p, cache_size=0)
    assert evaluator.nonzero() == (eval_slp_direct(p).output != 0)
    assert space_report(evaluator).max_live_indices <= p.n + 1


@pytest.mark.parametrize("squarings", [1, 2, 3])
def test_squaring_chain_keeps_space_bounded(squarings):
    p = parse_slp("add 1 1\nadd 2 1\n" + "".join(f"mul {k} {k}\n" for k in range(4, 4 + squarings)))
    value = eval_slp_direct(p).output
    assert value == 3 ** (2 ** squarings)
    evaluator = LazyEvaluator(p, cache_size=64)
    width = value.bit_length() + 2
    assert [evaluator.bit(p.n, evaluator.zero.moved(k)) for k in range(width)] == [(value >> k) & 1 for k in range(width)]
    report = space_report(evaluator)
    # four memo tables, at most two indices per entry, plus the evaluation stack
    assert report.max_live_indices <= 4 * 2 * 64 + p.n + 1
    assert report.max_scalar_bits <= 4 * (p.n + 1) ** 2


def test_enumeration_is_streamed_in_order(load_slp):
    p = load_slp("carry_sum")
    evaluator = LazyEvaluator(p, cache_size=8)
    positions = [position_oracle(p, index) for index in evaluator.iter_candidates(p.n)]
    assert positions == sorted(set(positions))
    value = eval_slp_direct(p).output
    doubled = value ^ (value << 1)
    changes = [position_oracle(p, index) for index in evaluator.iter_changes(p.n)]
    assert changes == [i for i in range(doubled.bit_length()) if (doubled >> i) & 1]


def test_substituted_x_is_computed_by_a_prefix():
    p = parse_slp("inputs 1\nadd 1 1\nadd 3 3\nadd 4 1\nadd 2 5\n")
    assert eval_slp_direct(substitute_aln(p, 16)).output == (1 << 16) + 5
    with pytest.raises(ValueError):
        substitute_aln(p, 12)


@pytest.mark.parametrize("text", [
    "inputs 1\nadd 2 1\nsub 3 2\n",
    "inputs 1\nsub 2 2\n",
    "inputs 1\nadd 2 2\nsub 3 2\nsub 4 2\n",
])
def test_aln_answer_holds_for_every_listed_omega(text):
    p = parse_slp(text)
    expected = nonzero_lazy(p, mode=LazyMode.ALN)
    for omega in aln_omegas(p, 9):
        assert nonzero_lazy(substitute_aln(p, omega)) == expected
