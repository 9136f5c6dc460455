"""Compile Turing machines into RAM programs.

Emitted step fragments keep the configuration in four fixed registers:

    R2 tape       the tape contents
    R3 head       one bit per machine, at the head cell
    R4 state      state number shifted up to the head cell
    R5 boundary   one bit at the start of every machine's segment

and advance every machine packed into those registers by one transition using only
Boolean operations and shifts by one. The parallel runner additionally expects the
packed input in R0, the segment marker B in R1 and the start heads in R6.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .errors import InputTooWide, UnsupportedProgram
from .numerics import PrimOp, eval_primitive
from .ram import C0, C1, Command, CommandKind, Operand, RamProgram, Relation, trace_ram
from .tm import HALTING_STATES, REJECT, TAPE_EXCEEDED, Move, TmConfig, TmSpec

logger = logging.getLogger(__name__)

INPUT, MARKER, TAPE, HEAD, STATE, BOUNDARY, HEADS = 0, 1, 2, 3, 4, 5, 6
SCRATCH = 7
# label of the parallel runner's halt test
RUNNER_LOOP = 5


@dataclass
class StepProgram:
    commands: List[Command]
    bounded: bool
    spec: TmSpec

    @property
    def program(self) -> RamProgram:
        return RamProgram.from_list(self.commands)

    def shr_count(self) -> int:
        return sum(1 for c in self.commands if c.op is PrimOp.SHR)


class _Fragment:
    """Straight-line emitter handing out scratch registers."""

    def __init__(self, first_scratch: int = SCRATCH):
        self.commands: List[Command] = []
        self._next = first_scratch

    def emit(self, op: PrimOp, *args: Operand) -> Operand:
        target = self._next
        self._next += 1
        self.commands.append(Command.assign(target, op, *args))
        return Operand.reg(target)

    def shift(self, op: PrimOp, x: Operand, times: int) -> Operand:
        for _ in range(times):
            x = self.emit(op, x, C1)
        return x

    def any_of(self, values: Sequence[Operand]) -> Operand:
        if not values:
            return C0
        acc = values[0]
        for value in values[1:]:
            acc = self.emit(PrimOp.OR, acc, value)
        return acc

    def all_of(self, values: Sequence[Operand]) -> Operand:
        acc = values[0]
        for value in values[1:]:
            acc = self.emit(PrimOp.AND, acc, value)
        return acc

    def copy(self, target: int, value: Operand):
        self.commands.append(Command.assign(target, PrimOp.OR, value, C0))


def _emit(spec: TmSpec, bounded: bool) -> StepProgram:
    f = _Fragment()
    head, tape, state, boundary = (Operand.reg(r) for r in (HEAD, TAPE, STATE, BOUNDARY))
    c = spec.c
    literals = []
    for j in range(c):
        on = f.emit(PrimOp.AND, f.shift(PrimOp.SHR, state, j), head)
        literals.append((f.emit(PrimOp.CLEAR, head, on), on))
    read_one = f.emit(PrimOp.AND, tape, head)
    read_zero = f.emit(PrimOp.CLEAR, head, read_one)

    writes: List[Operand] = []
    moves: Dict[Move, List[Operand]] = {Move.L: [], Move.R: [], Move.S: []}
    target_bits: List[List[Operand]] = [[] for _ in range(c)]
    halting: List[Operand] = []
    for q in range(spec.k):
        in_q = f.all_of([literals[j][(q >> j) & 1] for j in range(c)])
        if q in HALTING_STATES:
            halting.append(in_q)
            for j in range(c):
                if (q >> j) & 1:
                    target_bits[j].append(in_q)
            continue
        for b, read in ((0, read_zero), (1, read_one)):
            tr = spec.delta(q, b)
            term = f.emit(PrimOp.AND, in_q, read)
            if tr.bit:
                writes.append(term)
            moves[tr.move].append(term)
            for j in range(c):
                if (tr.state >> j) & 1:
                    target_bits[j].append(term)

    halted = f.any_of(halting)
    writes.append(f.emit(PrimOp.AND, halted, read_one))
    # cell 0 is the rightmost digit of the tape numeral: L is a right motion, R a left one
    is_right_motion = f.any_of(moves[Move.L])
    is_left_motion = f.any_of(moves[Move.R])
    fall = f.emit(PrimOp.AND, is_right_motion, boundary)
    go_down = f.emit(PrimOp.OR, f.emit(PrimOp.CLEAR, is_right_motion, boundary), f.emit(PrimOp.CLEAR, halted, boundary))
    stays = [f.any_of(moves[Move.S]), f.emit(PrimOp.AND, halted, boundary), fall]
    forced = {REJECT: fall}
    if bounded:
        last_cell = f.shift(PrimOp.SHR, boundary, c)
        overflow = f.emit(PrimOp.AND, is_left_motion, last_cell)
        go_up = f.emit(PrimOp.CLEAR, is_left_motion, last_cell)
        stays.append(overflow)
        forced[TAPE_EXCEEDED] = overflow
    else:
        go_up = is_left_motion
    stay = f.any_of(stays)
    overridden = f.any_of(list(forced.values()))

    def moved(x: Operand) -> Operand:
        return f.any_of([
            f.shift(PrimOp.SHR, f.emit(PrimOp.AND, x, go_down), 1),
            f.shift(PrimOp.SHL, f.emit(PrimOp.AND, x, go_up), 1),
            f.emit(PrimOp.AND, x, stay),
        ])

    new_tape = f.emit(PrimOp.OR, f.any_of(writes), f.emit(PrimOp.CLEAR, tape, head))
    new_head = moved(head)
    parts = []
    for j in range(c):
        bit = f.emit(PrimOp.CLEAR, f.any_of(target_bits[j]), overridden)
        bit = f.any_of([bit] + [x for s, x in forced.items() if (s >> j) & 1])
        parts.append(f.shift(PrimOp.SHL, moved(bit), j))
    new_state = f.any_of(parts)
    f.copy(TAPE, new_tape)
    f.copy(HEAD, new_head)
    f.copy(STATE, new_state)
    logger.debug("emitted %s step of %d commands for %d states", "bounded" if bounded else "plain", len(f.commands), spec.k)
    return StepProgram(f.commands, bounded, spec)


def emit_step(spec: TmSpec) -> StepProgram:
    """One transition of an unbounded machine; the caller sets boundary to 1."""
    return _emit(spec, bounded=False)


def emit_bounded_step(spec: TmSpec) -> StepProgram:
    """One transition with tape-bound detection; boundary marks every segment start
    plus the start of the segment above, so its bit below that, shifted by c, is cell s - 1."""
    return _emit(spec, bounded=True)


def step_registers(spec: TmSpec, cfg: TmConfig, bounded: bool = False) -> Dict[int, int]:
    """Registers holding ``cfg`` for a standalone run of a step fragment."""
    boundary = 1
    if bounded:
        boundary |= 1 << spec.width(cfg.s)
    return {TAPE: cfg.tape, HEAD: 1 << cfg.head, STATE: cfg.state << cfg.head, BOUNDARY: boundary}


def read_step_registers(spec: TmSpec, registers: Dict[int, int], s: Optional[int] = None) -> TmConfig:
    head_field = registers.get(HEAD, 0)
    head = max(0, head_field.bit_length() - 1)
    state = (registers.get(STATE, 0) >> head) & ((1 << spec.c) - 1)
    return TmConfig(registers.get(TAPE, 0), head, state, s)


@dataclass
class PackedLayout:
    c: int
    bounds: List[int]
    inputs: List[int]
    top_input: Optional[int] = None
    offsets: List[int] = field(default_factory=list)
    B: int = 0
    heads: int = 0
    packed: int = 0

    @property
    def machines(self) -> int:
        return len(self.bounds)

    @property
    def has_top(self) -> bool:
        return self.top_input is not None


def pack_inputs(machines: Sequence[Tuple[int, int]], c: int, top_input: Optional[int] = None) -> PackedLayout:
    """Lay out bounded machines (s_j, inp_j) side by side, each in s_j + c - 1 bits.

    B marks every segment start plus one bit above the last bounded segment, which
    the bounded step needs to find each segment's last cell. With ``top_input`` an
    unbounded machine starts at that bit and runs on ``top_input``; without it the
    bit only closes the last segment.
    """
    bounds, inputs, offsets = [], [], []
    offset, packed, marker = 0, 0, 0
    for s, inp in machines:
        if s < 1 or inp >> s:
            raise InputTooWide(f"input {inp} does not fit on {s} cell(s)")
        bounds.append(s)
        inputs.append(inp)
        offsets.append(offset)
        marker |= 1 << offset
        packed |= inp << offset
        offset += s + c - 1
    heads = marker
    marker |= 1 << offset
    if top_input is not None:
        offsets.append(offset)
        heads = marker
        packed |= top_input << offset
    return PackedLayout(c, bounds, inputs, top_input, offsets, marker, heads, packed)


def runner_registers(layout: PackedLayout) -> Dict[int, int]:
    """Initial registers of the parallel runner besides the packed input in R0."""
    return {MARKER: layout.B, HEADS: layout.heads}


def decode_parallel(layout: PackedLayout, registers: Dict[int, int]) -> List[TmConfig]:
    """Per-machine configurations; an unbounded top machine comes last with s=None."""
    tape, head, state = (registers.get(r, 0) for r in (TAPE, HEAD, STATE))
    configs = []
    for i, offset in enumerate(layout.offsets):
        bounded = i < layout.machines
        width = layout.bounds[i] + layout.c - 1 if bounded else None
        mask = (1 << width) - 1 if bounded else -1
        seg_head = (head >> offset) & mask
        position = max(0, seg_head.bit_length() - 1)
        cells = (1 << layout.bounds[i]) - 1 if bounded else -1
        configs.append(TmConfig(
            tape=(tape >> offset) & cells,
            head=position,
            state=(state >> (offset + position)) & ((1 << layout.c) - 1),
            s=layout.bounds[i] if bounded else None,
        ))
    return configs


class _Assembler:
    """Collects commands with symbolic jump targets and resolves them to labels."""

    def __init__(self):
        self._items: List[Tuple[Command, Optional[Any], Optional[Any]]] = []
        self._labels: Dict[Any, int] = {}

    def mark(self, name: Any):
        self._labels[name] = len(self._items) + 1

    def label(self, name: Any) -> int:
        return self._labels[name]

    def emit(self, command: Command):
        self._items.append((command, None, None))

    def compare(self, a: Operand, relation: Relation, b: Operand, yes: Any, no: Any):
        self._items.append((Command.compare(a, relation, b, 0, 0), yes, no))

    def jump(self, to: Any):
        self._items.append((Command.jump(0), to, None))

    def assemble(self) -> RamProgram:
        end = len(self._items) + 1
        commands = []
        for command, yes, no in self._items:
            if command.kind is CommandKind.COMPARE:
                command = Command.compare(command.args[0], command.relation, command.args[1],
                                          self._labels.get(yes, end), self._labels.get(no, end))
            elif command.kind is CommandKind.JUMP:
                command = Command.jump(self._labels.get(yes, end))
            commands.append(command)
        if any(label == end for label in self._labels.values()) or any(
            c.true_label == end or c.false_label == end for c in commands
        ):
            commands.append(Command.halt())
        return RamProgram.from_list(commands)


def emit_parallel_runner(spec: TmSpec) -> RamProgram:
    """Step every packed machine until all of them sit stable at cell 0 in a halting state,
    then leave the state register in R0.

    Expects the packed input in R0, the segment marker B in R1 and the start heads in
    R6 (see ``runner_registers``). Control passes ``RUNNER_LOOP`` once before every
    parallel step and once more before halting.
    """
    step = emit_bounded_step(spec)
    scratch = max(max(c.registers()) for c in step.commands) + 1
    t1, t2 = scratch, scratch + 1
    heads, head, state = Operand.reg(HEADS), Operand.reg(HEAD), Operand.reg(STATE)
    asm = _Assembler()
    asm.emit(Command.assign(TAPE, PrimOp.OR, Operand.reg(INPUT), C0))
    asm.emit(Command.assign(HEAD, PrimOp.OR, heads, C0))
    asm.emit(Command.assign(BOUNDARY, PrimOp.OR, Operand.reg(MARKER), C0))
    asm.emit(Command.assign(STATE, PrimOp.AND, C0, C0))
    asm.mark("test")
    asm.compare(head, Relation.EQ, heads, "low-states", "step")
    asm.mark("low-states")
    asm.emit(Command.assign(t1, PrimOp.SHL, heads, C1))
    asm.emit(Command.assign(t1, PrimOp.OR, heads, Operand.reg(t1)))
    asm.emit(Command.assign(t2, PrimOp.CLEAR, state, Operand.reg(t1)))
    asm.compare(Operand.reg(t2), Relation.EQ, C0, "nonzero-states", "step")
    asm.mark("nonzero-states")
    asm.emit(Command.assign(t1, PrimOp.SHR, state, C1))
    asm.emit(Command.assign(t1, PrimOp.OR, state, Operand.reg(t1)))
    asm.emit(Command.assign(t1, PrimOp.AND, Operand.reg(t1), heads))
    asm.compare(Operand.reg(t1), Relation.EQ, heads, "done", "step")
    asm.mark("step")
    for command in step.commands:
        asm.emit(command)
    asm.jump("test")
    asm.mark("done")
    asm.emit(Command.assign(INPUT, PrimOp.OR, state, C0))
    asm.emit(Command.halt())
    return asm.assemble()


def runner_states(layout: PackedLayout, output: int) -> List[int]:
    """Final state of every machine from the runner's output (heads are at cell 0)."""
    return [(output >> offset) & ((1 << layout.c) - 1) for offset in layout.offsets]


def trace_parallel(
    spec: TmSpec, layout: PackedLayout, max_steps: Optional[int] = None,
) -> Tuple[List[List[TmConfig]], bool]:
    """Decoded per-machine configurations before every parallel step, and whether the runner halted."""
    snapshots, halted = trace_ram(
        emit_parallel_runner(spec), layout.packed, runner_registers(layout), [RUNNER_LOOP], max_steps,
    )
    return [decode_parallel(layout, registers) for _, registers in snapshots], halted


@dataclass
class ShrFreeProgram:
    """A program without right shifts whose registers hold the original ones scaled by R[scale].

    ``labels`` maps each original label to the first label of its rewrite.
    """
    program: RamProgram
    scale_register: int
    original_top: int
    shadows: Dict[int, int]
    labels: Dict[int, int] = field(default_factory=dict)

    def decode(self, registers: Dict[int, int]) -> Dict[int, int]:
        scale = registers.get(self.scale_register, 1) or 1
        return {i: registers.get(i, 0) // scale for i in range(self.original_top + 1)}


_LINEAR = {PrimOp.ADD, PrimOp.SUB, PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.CLEAR}


def _amount_closure(p: RamProgram) -> set:
    relevant = {
        c.args[1].register for c in p.commands.values()
        if c.kind is CommandKind.ASSIGN and c.op in (PrimOp.SHL, PrimOp.SHR) and c.args[1].is_register
    }
    changed = True
    while changed:
        changed = False
        for c in p.commands.values():
            if c.kind is CommandKind.ASSIGN and c.target in relevant:
                for a in c.args:
                    if a.is_register and a.register not in relevant:
                        relevant.add(a.register)
                        changed = True
    return relevant


def remove_shr(p: RamProgram) -> ShrFreeProgram:
    """Rewrite ``p`` without right shifts.

    Every original register R[i] is kept as R[i] * S with S = R[k+1] a power of two.
    A right shift by X scales S (and every other register) up by 2^X and clears the
    bits of the shifted register below the new scale. Registers feeding shift amounts
    keep a native copy, which must never depend on a right shift.
    """
    for label, c in p.commands.items():
        if c.kind is CommandKind.ASSIGN and c.op in (PrimOp.MUL, PrimOp.DIV, PrimOp.IDIV):
            raise UnsupportedProgram(f"label {label}: '{c.op.value}' does not commute with scaling")
    relevant = _amount_closure(p)
    for label, c in p.commands.items():
        if c.kind is CommandKind.ASSIGN and c.target in relevant and c.op is PrimOp.SHR:
            raise UnsupportedProgram(f"label {label}: a shift amount is computed with shr")
    top = max(p.registers())
    scale = top + 1
    shadows = {r: scale + 1 + r for r in sorted(relevant)}
    temp, temp2 = scale + top + 2, scale + top + 3
    s_reg = Operand.reg(scale)

    def scaled(a: Operand) -> Operand:
        if a.is_register or a.constant == 0:
            return a
        return s_reg

    def amount(a: Operand) -> Operand:
        return Operand.reg(shadows[a.register]) if a.is_register else a

    def native(a: Operand) -> Operand:
        return Operand.reg(shadows[a.register]) if a.is_register else a

    asm = _Assembler()
    asm.emit(Command.assign(scale, PrimOp.OR, C1, C0))
    for r, shadow in shadows.items():
        asm.emit(Command.assign(shadow, PrimOp.OR, Operand.reg(r), C0))
    for label in sorted(p.commands):
        asm.mark(label)
        c = p.commands[label]
        if c.kind is CommandKind.HALT:
            asm.emit(Command.halt())
        elif c.kind is CommandKind.JUMP:
            asm.jump(c.true_label)
        elif c.kind is CommandKind.COMPARE:
            asm.compare(scaled(c.args[0]), c.relation, scaled(c.args[1]), c.true_label, c.false_label)
        else:
            _rewrite_assign(asm, c, scaled, amount, scale, top, temp, temp2)
            if c.target in shadows:
                if c.op is PrimOp.INC:
                    asm.emit(Command.assign(shadows[c.target], PrimOp.ADD, native(c.args[0]), C1))
                else:
                    asm.emit(Command.assign(shadows[c.target], c.op, *(native(a) for a in c.args)))
    result = ShrFreeProgram(asm.assemble(), scale, top, shadows, {label: asm.label(label) for label in p.commands})
    logger.debug("removed right shifts: %d -> %d commands", len(p), len(result.program))
    return result


def _rewrite_assign(asm: _Assembler, c: Command, scaled, amount, scale: int, top: int, temp: int, temp2: int):
    target, op = c.target, c.op
    s_reg = Operand.reg(scale)
    if op in _LINEAR:
        asm.emit(Command.assign(target, op, *(scaled(a) for a in c.args)))
    elif op is PrimOp.INC:
        asm.emit(Command.assign(target, PrimOp.ADD, scaled(c.args[0]), s_reg))
    elif op is PrimOp.NOT:
        # the scaled value's zero low bits would flip to ones
        asm.emit(Command.assign(temp, PrimOp.NOT, s_reg))
        asm.emit(Command.assign(target, PrimOp.NOT, scaled(c.args[0])))
        asm.emit(Command.assign(target, PrimOp.CLEAR, Operand.reg(target), Operand.reg(temp)))
    elif op is PrimOp.SHL:
        asm.emit(Command.assign(target, PrimOp.SHL, scaled(c.args[0]), amount(c.args[1])))
    elif op is PrimOp.SHR:
        shift = amount(c.args[1])
        asm.emit(Command.assign(temp, PrimOp.SHL, s_reg, shift))
        asm.emit(Command.assign(temp2, PrimOp.NOT, Operand.reg(temp)))
        asm.emit(Command.assign(target, PrimOp.CLEAR, scaled(c.args[0]), Operand.reg(temp2)))
        for r in range(top + 1):
            if r != target:
                asm.emit(Command.assign(r, PrimOp.SHL, Operand.reg(r), shift))
        asm.emit(Command.assign(scale, PrimOp.OR, Operand.reg(temp), C0))
    else:
        raise UnsupportedProgram(f"'{op.value}' cannot be rewritten")


class IntArithmetic:
    """Plain integers; the reference for the verifier's arithmetic backends."""
    zero = 0
    one = 1

    def apply(self, op: PrimOp, a, b=None):
        return eval_primitive(op, a, b)

    def shift(self, op: PrimOp, a, amount: int):
        return eval_primitive(op, a, amount)


def run_fragment(commands: Sequence[Command], registers: Dict[int, Any], arith=None) -> Dict[int, Any]:
    """Execute straight-line assignments over ``arith``; shifts must be by the constant 1.

    A constant 1 anywhere else reads as ``arith.one``, which lets scaled
    backends stand in for the integers.
    """
    arith = arith or IntArithmetic()
    registers = dict(registers)

    def read(a: Operand):
        if a.is_register:
            return registers.get(a.register, arith.zero)
        return arith.one if a.constant else arith.zero

    for c in commands:
        if c.kind is not CommandKind.ASSIGN:
            raise UnsupportedProgram("fragments are straight-line")
        if c.op in (PrimOp.SHL, PrimOp.SHR):
            if c.args[1].is_register or c.args[1].constant != 1:
                raise UnsupportedProgram("fragment shifts must be by the constant 1")
            registers[c.target] = arith.shift(c.op, read(c.args[0]), 1)
        else:
            registers[c.target] = arith.apply(c.op, *(read(a) for a in c.args))
    return registers
