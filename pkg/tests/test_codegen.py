import itertools

import pytest

from src.codegen import (
    decode_parallel,
    emit_bounded_step,
    emit_parallel_runner,
    emit_step,
    pack_inputs,
    read_step_registers,
    remove_shr,
    run_fragment,
    runner_registers,
    runner_states,
    step_registers,
    trace_parallel,
)
from src.errors import InputTooWide, UnsupportedProgram
from src.numerics import PrimOp
from src.ram import parse_ram, run_ram, trace_ram
from src.tm import TAPE_EXCEEDED, TmConfig, TmSpec, run_tm, step_tm

MACHINES = ["acceptall", "evenlow", "flipper", "staircase", "bouncer", "looper"]


def _configs(spec, s):
    for tape, head, state in itertools.product(range(1 << s), range(s), range(spec.k)):
        yield TmConfig(tape, head, state, s)


@pytest.mark.parametrize("name", MACHINES)
@pytest.mark.parametrize("s", [1, 2, 3])
def test_bounded_step_matches_step_tm(load_tm, name, s):
    spec = load_tm(name)
    step = emit_bounded_step(spec)
    for cfg in _configs(spec, s):
        registers = run_fragment(step.commands, step_registers(spec, cfg, bounded=True))
        assert read_step_registers(spec, registers, s) == step_tm(spec, cfg), cfg


@pytest.mark.parametrize("name", MACHINES)
def test_plain_step_matches_step_tm(load_tm, name):
    spec = load_tm(name)
    step = emit_step(spec)
    for cfg in _configs(spec, 3):
        cfg = TmConfig(cfg.tape, cfg.head, cfg.state)
        registers = run_fragment(step.commands, step_registers(spec, cfg))
        assert read_step_registers(spec, registers) == step_tm(spec, cfg), cfg


@pytest.mark.parametrize("name", ["flipper", "bouncer"])
def test_shr_free_step_matches(load_tm, name):
    spec = load_tm(name)
    step = emit_bounded_step(spec)
    rewritten = remove_shr(step.program)
    assert PrimOp.SHR not in rewritten.program.ops()
    for cfg in _configs(spec, 2):
        run = run_ram(rewritten.program, registers=step_registers(spec, cfg, bounded=True))
        assert run.halted
        assert read_step_registers(spec, rewritten.decode(run.state.registers), 2) == step_tm(spec, cfg)


def test_fragments_use_only_boolean_ops_and_unit_shifts(load_tm):
    step = emit_bounded_step(load_tm("bouncer"))
    allowed = {PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.NOT, PrimOp.CLEAR, PrimOp.SHL, PrimOp.SHR}
    for command in step.commands:
        assert command.op in allowed
        if command.op in (PrimOp.SHL, PrimOp.SHR):
            assert command.args[1].constant == 1
    assert step.shr_count() > 0


def test_remove_shr_on_a_register_shift():
    p = parse_ram("1: r1 = shr r0 r2\n2: r0 = or r1 c0\n3: halt\n")
    rewritten = remove_shr(p)
    for x, k in [(0b1011011, 2), (255, 0), (1 << 40, 39)]:
        run = run_ram(rewritten.program, x, registers={2: k})
        assert rewritten.decode(run.state.registers)[0] == x >> k


def test_remove_shr_refuses_mul():
    with pytest.raises(UnsupportedProgram):
        remove_shr(parse_ram("1: r0 = mul r0 r0\n2: halt\n"))


def test_remove_shr_refuses_shifted_amounts():
    with pytest.raises(UnsupportedProgram):
        remove_shr(parse_ram("1: r1 = shr r0 c1\n2: r0 = shl r0 r1\n3: halt\n"))


def test_parallel_runner(load_tm):
    spec = load_tm("staircase")
    machines = [(1, 0), (2, 1), (3, 0), (3, 5), (4, 2)]
    layout = pack_inputs(machines, spec.c)
    run = run_ram(emit_parallel_runner(spec), layout.packed, registers=runner_registers(layout), max_steps=1000000)
    assert run.halted
    expected = [run_tm(spec, inp, s).config.state for s, inp in machines]
    assert runner_states(layout, run.output) == expected
    assert all(cfg.head == 0 for cfg in decode_parallel(layout, run.state.registers))


def test_parallel_runner_with_an_unbounded_top_machine(load_tm):
    spec = load_tm("staircase")
    machines = [(2, 1), (3, 5)]
    layout = pack_inputs(machines, spec.c, top_input=3)
    run = run_ram(emit_parallel_runner(spec), layout.packed, registers=runner_registers(layout), max_steps=1000000)
    assert run.halted
    expected = [run_tm(spec, inp, s).config.state for s, inp in machines] + [run_tm(spec, 3).config.state]
    assert runner_states(layout, run.output) == expected
    assert decode_parallel(layout, run.state.registers)[-1].s is None


def test_parallel_runner_halts_when_every_bounded_machine_does(load_tm):
    spec = load_tm("runaway")
    machines = [(2, 0), (3, 1)]
    assert [run_tm(spec, inp, s).config.state for s, inp in machines] == [TAPE_EXCEEDED, TAPE_EXCEEDED]
    layout = pack_inputs(machines, spec.c)
    run = run_ram(emit_parallel_runner(spec), layout.packed, registers=runner_registers(layout), max_steps=200000)
    assert run.halted
    assert runner_states(layout, run.output) == [TAPE_EXCEEDED, TAPE_EXCEEDED]


@pytest.mark.parametrize("name, machines", [
    ("staircase", [(1, 0), (2, 1), (3, 5), (4, 2)]),
    ("bouncer", [(2, 0), (2, 3), (3, 6)]),
    ("runaway", [(2, 0), (3, 1)]),
    ("acceptall", [(1, 1), (1, 0), (1, 1)]),
])
def test_parallel_runner_matches_independent_runs_at_every_step(load_tm, name, machines):
    spec = load_tm(name)
    layout = pack_inputs(machines, spec.c)
    trace, halted = trace_parallel(spec, layout, 1000000)
    assert halted
    expected = [TmConfig(inp, 0, 0, s) for s, inp in machines]
    for configs in trace:
        assert configs == expected
        expected = [step_tm(spec, cfg) for cfg in expected]
    assert all(TmSpec.is_stable(cfg) for cfg in trace[-1])


@pytest.mark.parametrize("name", ["flipper", "bouncer"])
def test_shr_free_step_keeps_the_scaled_registers_at_every_step(load_tm, name):
    spec = load_tm(name)
    program = emit_bounded_step(spec).program
    rewritten = remove_shr(program)
    top = rewritten.original_top
    back = {new: old for old, new in rewritten.labels.items()}
    for cfg in _configs(spec, 2):
        registers = step_registers(spec, cfg, bounded=True)
        original, _ = trace_ram(program, registers=registers)
        scaled, halted = trace_ram(rewritten.program, registers=registers, labels=back)
        assert halted
        assert [(back[label], rewritten.decode(r)) for label, r in scaled] == [
            (label, {i: r.get(i, 0) for i in range(top + 1)}) for label, r in original if label in rewritten.labels
        ]


def test_shr_free_loop_keeps_the_scaled_registers_at_every_step():
    p = parse_ram(
        "1: r1 = shr r1 c1\n"
        "2: r3 = shr r0 r2\n"
        "3: r0 = xor r0 r3\n"
        "4: if r1 == c0 goto 6 else 1\n"
        "5: halt\n"
        "6: r0 = inc r0\n"
        "7: halt\n"
    )
    rewritten = remove_shr(p)
    back = {new: old for old, new in rewritten.labels.items()}
    registers = {1: 0b1011, 2: 3}
    original, _ = trace_ram(p, 0b110110111, registers)
    scaled, halted = trace_ram(rewritten.program, 0b110110111, registers, labels=back)
    assert halted and len(original) > 10
    assert [(back[label], rewritten.decode(r)) for label, r in scaled] == [
        (label, {i: r.get(i, 0) for i in range(rewritten.original_top + 1)}) for label, r in original
    ]


def test_pack_inputs_layout():
    layout = pack_inputs([(2, 3), (1, 1)], c=2)
    assert layout.offsets == [0, 3]
    assert layout.B == 0b101001
    assert layout.heads == 0b1001
    assert layout.packed == 3 | 1 << 3
    top = pack_inputs([(2, 3), (1, 1)], c=2, top_input=1)
    assert top.offsets == [0, 3, 5] and top.heads == top.B
    assert top.packed == 3 | 1 << 3 | 1 << 5
    with pytest.raises(InputTooWide):
        pack_inputs([(1, 2)], c=2)
