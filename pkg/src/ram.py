"""RAM programs: text format, gated interpreter, expansion-limit bound, ARAM harness and trace extraction."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .configs import DEFAULT_BUDGETS
from .errors import BudgetExceeded, DanglingLabel, GateViolation, ParseError, StepBudgetExhausted
from .numerics import BOOLEAN_OPS, PrimOp, eval_primitive, result_bits_estimate
from .slp import Slp, SlpStep

logger = logging.getLogger(__name__)


class CommandKind(str, Enum):
    ASSIGN = "assign"
    COMPARE = "compare"
    JUMP = "jump"
    HALT = "halt"


class Relation(str, Enum):
    EQ = "=="
    LE = "<="


@dataclass(frozen=True)
class Operand:
    """A register ``r<i>`` or one of the constants ``c0``/``c1``."""
    register: Optional[int] = None
    constant: Optional[int] = None

    @classmethod
    def reg(cls, index: int) -> "Operand":
        return cls(register=index)

    @classmethod
    def const(cls, value: int) -> "Operand":
        assert value in (0, 1), "RAM constants are restricted to 0 and 1"
        return cls(constant=value)

    @classmethod
    def parse(cls, text: str, line: Optional[int] = None) -> "Operand":
        match = re.fullmatch(r"r(\d+)|c([01])", text)
        if not match:
            raise ParseError(f"bad operand '{text}'", line)
        if match.group(1) is not None:
            return cls.reg(int(match.group(1)))
        return cls.const(int(match.group(2)))

    @property
    def is_register(self) -> bool:
        return self.register is not None

    def __str__(self):
        return f"r{self.register}" if self.is_register else f"c{self.constant}"


C0 = Operand.const(0)
C1 = Operand.const(1)


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    op: Optional[PrimOp] = None
    args: Tuple[Operand, ...] = ()
    target: Optional[int] = None
    relation: Optional[Relation] = None
    true_label: Optional[int] = None
    false_label: Optional[int] = None

    @classmethod
    def assign(cls, target: int, op: PrimOp, *args: Operand) -> "Command":
        return cls(CommandKind.ASSIGN, op=op, args=tuple(args), target=target)

    @classmethod
    def compare(cls, a: Operand, relation: Relation, b: Operand, true_label: int, false_label: int) -> "Command":
        return cls(CommandKind.COMPARE, args=(a, b), relation=relation, true_label=true_label, false_label=false_label)

    @classmethod
    def jump(cls, label: int) -> "Command":
        return cls(CommandKind.JUMP, true_label=label)

    @classmethod
    def halt(cls) -> "Command":
        return cls(CommandKind.HALT)

    def registers(self) -> set:
        regs = {a.register for a in self.args if a.is_register}
        if self.target is not None:
            regs.add(self.target)
        return regs

    def render(self) -> str:
        if self.kind is CommandKind.ASSIGN:
            return f"r{self.target} = {self.op.value} " + " ".join(str(a) for a in self.args)
        if self.kind is CommandKind.COMPARE:
            return f"if {self.args[0]} {self.relation.value} {self.args[1]} goto {self.true_label} else {self.false_label}"
        if self.kind is CommandKind.JUMP:
            return f"goto {self.true_label}"
        return "halt"


@dataclass
class RamProgram:
    commands: Dict[int, Command] = field(default_factory=dict)

    @classmethod
    def from_list(cls, commands: Sequence[Command]) -> "RamProgram":
        return cls({label: command for label, command in enumerate(commands, start=1)})

    def registers(self) -> set:
        regs = {0}
        for command in self.commands.values():
            regs |= command.registers()
        return regs

    def ops(self) -> set:
        return {c.op for c in self.commands.values() if c.kind is CommandKind.ASSIGN}

    def __len__(self):
        return len(self.commands)


@dataclass
class OpSetGate:
    allowed: FrozenSet[PrimOp] = frozenset(PrimOp)
    bounded_shift_only: bool = False

    @classmethod
    def parse(cls, text: str, bounded_shift_only: bool = False) -> "OpSetGate":
        allowed = set()
        for name in text.split(","):
            name = name.strip().lower()
            if not name:
                continue
            if name == "bool":
                allowed |= BOOLEAN_OPS
            elif name == "all":
                allowed |= set(PrimOp)
            else:
                try:
                    allowed.add(PrimOp.parse(name))
                except ValueError:
                    raise ParseError(f"unknown operation '{name}' in gate")
        return cls(frozenset(allowed), bounded_shift_only)

    def check(self, op: PrimOp, amount: Optional[Operand] = None, label: Optional[int] = None):
        if op not in self.allowed:
            raise GateViolation(op.value, label)
        if self.bounded_shift_only and op in (PrimOp.SHL, PrimOp.SHR):
            if amount is None or amount.is_register:
                raise GateViolation(f"{op.value} by a register", label)

    def admits(self, program: RamProgram) -> bool:
        try:
            for label, command in program.commands.items():
                if command.kind is CommandKind.ASSIGN:
                    self.check(command.op, command.args[-1] if command.op.arity == 2 else None, label)
        except GateViolation:
            return False
        return True


@dataclass
class RamState:
    registers: Dict[int, int] = field(default_factory=dict)
    pc: int = 1
    steps: int = 0
    max_value_seen: int = 0

    def read(self, operand: Operand) -> int:
        if operand.is_register:
            return self.registers.get(operand.register, 0)
        return operand.constant

    def write(self, index: int, value: int):
        self.registers[index] = value
        if value > self.max_value_seen:
            self.max_value_seen = value


@dataclass
class RamRun:
    output: int
    state: RamState
    halted: bool


_LINE = re.compile(r"^(\d+)\s*:\s*(.+)$")
_ASSIGN = re.compile(r"^r(\d+)\s*=\s*(\w+)\s+(\S+)(?:\s+(\S+))?$")
_COMPARE = re.compile(r"^if\s+(\S+)\s*(<=|==)\s*(\S+)\s+goto\s+(\d+)\s+else\s+(\d+)$")
_JUMP = re.compile(r"^goto\s+(\d+)$")


def parse_ram(text) -> RamProgram:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    commands: Dict[int, Command] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise ParseError(f"expected '<label>: <command>', got '{line}'", lineno)
        label, body = int(match.group(1)), match.group(2).strip()
        if label != len(commands) + 1:
            raise ParseError(f"labels must be consecutive from 1, got {label}", lineno)
        if body == "halt":
            commands[label] = Command.halt()
        elif _JUMP.match(body):
            commands[label] = Command.jump(int(_JUMP.match(body).group(1)))
        elif _COMPARE.match(body):
            m = _COMPARE.match(body)
            commands[label] = Command.compare(
                Operand.parse(m.group(1), lineno), Relation(m.group(2)), Operand.parse(m.group(3), lineno),
                int(m.group(4)), int(m.group(5)),
            )
        elif _ASSIGN.match(body):
            m = _ASSIGN.match(body)
            try:
                op = PrimOp.parse(m.group(2))
            except ValueError:
                raise ParseError(f"unknown mnemonic '{m.group(2)}'", lineno)
            args = tuple(Operand.parse(a, lineno) for a in m.groups()[2:] if a is not None)
            if len(args) != op.arity:
                raise ParseError(f"'{op.value}' takes {op.arity} operand(s)", lineno)
            commands[label] = Command.assign(int(m.group(1)), op, *args)
        else:
            raise ParseError(f"cannot parse command '{body}'", lineno)
    program = RamProgram(commands)
    for label, command in commands.items():
        for target in (command.true_label, command.false_label):
            if target is not None and target not in commands:
                raise DanglingLabel(f"label {label} jumps to missing label {target}")
    return program


def dump_ram(p: RamProgram) -> str:
    return "".join(f"{label}: {p.commands[label].render()}\n" for label in sorted(p.commands))


def _execute(
    p: RamProgram,
    state: RamState,
    gate: OpSetGate,
    max_steps: int,
    value_bits: int,
    on_assign=None,
    on_step=None,
) -> bool:
    while state.steps < max_steps:
        if on_step is not None:
            on_step(state)
        command = p.commands.get(state.pc)
        if command is None or command.kind is CommandKind.HALT:
            return True
        state.steps += 1
        if command.kind is CommandKind.ASSIGN:
            gate.check(command.op, command.args[-1] if command.op.arity == 2 else None, state.pc)
            a = state.read(command.args[0])
            b = state.read(command.args[1]) if len(command.args) > 1 else None
            if result_bits_estimate(command.op, a, b) > value_bits + 1:
                raise BudgetExceeded(f"label {state.pc}: '{command.op.value}' exceeds {value_bits} bits")
            value = eval_primitive(command.op, a, b)
            state.write(command.target, value)
            if on_assign is not None:
                on_assign(command)
            state.pc += 1
        elif command.kind is CommandKind.COMPARE:
            a, b = state.read(command.args[0]), state.read(command.args[1])
            holds = a == b if command.relation is Relation.EQ else a <= b
            state.pc = command.true_label if holds else command.false_label
        else:
            state.pc = command.true_label
    if on_step is not None:
        on_step(state)
    command = p.commands.get(state.pc)
    return command is None or command.kind is CommandKind.HALT


def run_ram(
    p: RamProgram,
    input: int = 0,
    gate: Optional[OpSetGate] = None,
    max_steps: Optional[int] = None,
    registers: Optional[Dict[int, int]] = None,
    value_bits: Optional[int] = None,
) -> RamRun:
    """Run from label 1 with ``input`` in R[0]; extra initial registers may be supplied."""
    gate = gate or OpSetGate()
    max_steps = DEFAULT_BUDGETS.max_steps if max_steps is None else max_steps
    value_bits = DEFAULT_BUDGETS.value_bits if value_bits is None else value_bits
    state = RamState()
    state.write(0, input)
    for index, value in (registers or {}).items():
        state.write(index, value)
    halted = _execute(p, state, gate, max_steps, value_bits)
    if not halted:
        logger.debug("step budget %d exhausted at label %d", max_steps, state.pc)
    return RamRun(state.registers.get(0, 0), state, halted)


def trace_ram(
    p: RamProgram,
    input: int = 0,
    registers: Optional[Dict[int, int]] = None,
    labels: Optional[Iterable[int]] = None,
    max_steps: Optional[int] = None,
) -> Tuple[List[Tuple[int, Dict[int, int]]], bool]:
    """Snapshots (label, registers) taken whenever control reaches one of ``labels`` (any label by default).

    Returns the snapshots and whether the program halted.
    """
    max_steps = DEFAULT_BUDGETS.max_steps if max_steps is None else max_steps
    wanted = None if labels is None else set(labels)
    snapshots: List[Tuple[int, Dict[int, int]]] = []

    def snap(state: RamState):
        if wanted is None or state.pc in wanted:
            snapshots.append((state.pc, dict(state.registers)))

    state = RamState()
    state.write(0, input)
    for index, value in (registers or {}).items():
        state.write(index, value)
    halted = _execute(p, state, OpSetGate(), max_steps, DEFAULT_BUDGETS.value_bits, on_step=snap)
    return snapshots, halted


def trace_to_slp(
    p: RamProgram,
    input: int = 0,
    gate: Optional[OpSetGate] = None,
    max_steps: Optional[int] = None,
) -> Slp:
    """The straight-line program of the assignments executed on ``input``."""
    gate = gate or OpSetGate()
    max_steps = DEFAULT_BUDGETS.max_steps if max_steps is None else max_steps
    slp = Slp(input_slots=1)
    where: Dict[int, int] = {0: 2}

    def index_of(operand: Operand) -> int:
        if operand.is_register:
            return where.get(operand.register, 0)
        return operand.constant

    def record(command: Command):
        slp.steps.append(SlpStep(command.op, tuple(index_of(a) for a in command.args)))
        where[command.target] = slp.n

    state = RamState()
    state.write(0, input)
    halted = _execute(p, state, gate, max_steps, DEFAULT_BUDGETS.value_bits, record)
    if not halted:
        raise StepBudgetExhausted(f"program did not halt within {max_steps} steps")
    if where[0] != slp.n:
        slp.steps.append(SlpStep(PrimOp.OR, (where[0], 0)))
    return slp


def el_bound(gate: OpSetGate, t: int, n: int, bit_cap: Optional[int] = None) -> int:
    """2^L(t) - 1 where L grows by the worst case of any allowed operation per step."""
    bit_cap = DEFAULT_BUDGETS.el_bit_cap if bit_cap is None else bit_cap
    bits = max(n, 1)
    for _ in range(t):
        growth = 0
        if gate.allowed & {PrimOp.ADD, PrimOp.INC}:
            growth = max(growth, 1)
        if PrimOp.MUL in gate.allowed:
            growth = max(growth, bits)
        if PrimOp.SHL in gate.allowed:
            if bits > bit_cap.bit_length():
                raise BudgetExceeded(f"shift growth past {bit_cap} bits")
            growth = max(growth, 1 << bits)
        bits += growth
        if bits > bit_cap:
            raise BudgetExceeded(f"expansion-limit bound needs {bits} bits (cap {bit_cap})")
    return (1 << bits) - 1


@dataclass
class AramReport:
    schedule: List[int]
    verdicts: List[bool]
    halted: List[bool]
    stabilized: bool
    verdict: Optional[bool]


def run_aram(
    p: RamProgram,
    input: int,
    gate: Optional[OpSetGate],
    schedule: Sequence[int],
    max_steps: Optional[int] = None,
    tail: Optional[int] = None,
) -> AramReport:
    """Evaluate g(input, x) with the ALN x in R[1] for each x of the schedule.

    The verdict is reported only when the last ``tail`` entries (default: the later half)
    agree, which approximates "for almost all x".
    """
    verdicts, halted = [], []
    for x in schedule:
        run = run_ram(p, input, gate, max_steps, registers={1: x})
        halted.append(run.halted)
        verdicts.append(run.halted and run.output != 0)
    if tail is None:
        tail = max(1, (len(schedule) + 1) // 2)
    window = verdicts[-tail:]
    stabilized = bool(window) and all(v == window[0] for v in window)
    return AramReport(list(schedule), verdicts, halted, stabilized, window[0] if stabilized else None)
