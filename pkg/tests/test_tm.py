import pytest

from src.errors import InputTooWide, MalformedDescription, MissingTransition, ParseError, StepBudgetExhausted
from src.tm import ACCEPT, REJECT, TAPE_EXCEEDED, TmConfig, decode_id, dump_tm, encode_id, parse_tm, run_tm


def test_acceptall_trace(load_tm):
    run = run_tm(load_tm("acceptall"), 1, 2)
    assert run.halted
    assert run.verdict == ACCEPT
    assert run.trace == [65, 73, 73]


def test_fall_off_the_left_end_rejects(load_tm):
    assert run_tm(load_tm("falloff"), 0, 2).verdict == REJECT


def test_tape_bound_is_a_halting_state(load_tm):
    spec = load_tm("staircase")
    assert run_tm(spec, 0, 2).verdict == TAPE_EXCEEDED
    assert run_tm(spec, 0, 3).verdict == ACCEPT
    assert run_tm(spec, 0).verdict == ACCEPT


def test_halting_machines_walk_back_to_cell_0(load_tm):
    run = run_tm(load_tm("staircase"), 0, 3)
    assert run.config.head == 0
    assert run.trace[-1] == run.trace[-2]


def test_looping_machine_exhausts_the_budget(load_tm):
    run = run_tm(load_tm("looper"), 0, 2, max_steps=50)
    assert not run.halted
    assert run.verdict is None
    with pytest.raises(StepBudgetExhausted):
        run_tm(load_tm("looper"), 0, 2, max_steps=50, strict=True)


def test_input_must_fit_the_tape(load_tm):
    with pytest.raises(InputTooWide):
        run_tm(load_tm("acceptall"), 4, 2)


@pytest.mark.parametrize("tape, head, state", [(0, 0, 0), (3, 1, 2), (1, 0, 3), (2, 1, 1)])
def test_instantaneous_descriptions(tape, head, state):
    cfg = TmConfig(tape, head, state, 2)
    assert decode_id(encode_id(cfg, 2, 2), 2, 2) == cfg


def test_malformed_descriptions():
    with pytest.raises(MalformedDescription):
        decode_id(0b011 << 6, 2, 2)  # two head bits
    with pytest.raises(MalformedDescription):
        decode_id(0b100 << 8 | 0b0001 << 4, 3, 2)  # state below the head
    with pytest.raises(MalformedDescription):
        encode_id(TmConfig(0, 2, 0, 2), 2, 2)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_tm("states 3\nstart 0\n0 0 -> 1 0 S\n0 1 -> 1 1 S\n")
    with pytest.raises(ParseError):
        parse_tm("states 4\n1 0 -> 0 0 S\n")
    with pytest.raises(MissingTransition):
        parse_tm("states 4\n0 0 -> 1 0 S\n")
    with pytest.raises(ParseError):
        parse_tm("0 0 -> 1 0 S\n")


def test_dump_parses_back(load_tm):
    spec = load_tm("bouncer")
    assert parse_tm(dump_tm(spec)) == spec


def test_halting_state(load_tm):
    spec = load_tm("staircase")
    assert spec.halting_state(TmConfig(state=0)) is None
    assert spec.halting_state(run_tm(spec, 0, 2).config) == TAPE_EXCEEDED
    assert spec.halting_state(run_tm(spec, 0, 3).config) == ACCEPT
