"""Straight-line programs: model, text format, direct evaluation and random generation."""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from .configs import DEFAULT_BUDGETS
from .errors import BudgetExceeded, ForwardReference, GenerationFailed, ArithmeticViolation, ParseError
from .numerics import PrimOp, eval_primitive, result_bits_estimate

logger = logging.getLogger(__name__)

LAZY_OPS = (
    PrimOp.ADD, PrimOp.SUB, PrimOp.MUL, PrimOp.SHL, PrimOp.SHR,
    PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.NOT, PrimOp.INC, PrimOp.CLEAR,
)


@dataclass(frozen=True)
class SlpStep:
    op: PrimOp
    args: Tuple[int, ...]

    def __str__(self):
        return " ".join([self.op.value] + [str(a) for a in self.args])


@dataclass
class Slp:
    steps: List[SlpStep] = field(default_factory=list)
    input_slots: int = 0

    @property
    def first_step(self) -> int:
        return 2 + self.input_slots

    @property
    def n(self) -> int:
        """Index of the output value v_n."""
        return self.first_step + len(self.steps) - 1

    def step_at(self, index: int) -> Optional[SlpStep]:
        if index < self.first_step:
            return None
        return self.steps[index - self.first_step]

    def is_input(self, index: int) -> bool:
        return 2 <= index < self.first_step

    def ops(self) -> set:
        return {step.op for step in self.steps}

    def prefix(self, last: int) -> "Slp":
        """The program truncated so that ``last`` is its output index."""
        keep = max(0, last - self.first_step + 1)
        return Slp(list(self.steps[:keep]), self.input_slots)

    def extended(self, steps: Iterable[SlpStep]) -> "Slp":
        return Slp(list(self.steps) + list(steps), self.input_slots)


@dataclass
class SlpValue:
    values: List[int]

    @property
    def output(self) -> int:
        return self.values[-1]


def _check_step(step: SlpStep, index: int, line: Optional[int] = None):
    if len(step.args) != step.op.arity:
        raise ParseError(f"'{step.op.value}' takes {step.op.arity} operand(s)", line)
    for arg in step.args:
        if arg < 0 or arg >= index:
            raise ForwardReference(f"step {index} refers to v{arg}", line)


def validate_slp(p: Slp):
    for offset, step in enumerate(p.steps):
        _check_step(step, p.first_step + offset)


def parse_slp(text) -> Slp:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    program = Slp()
    seen_step = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "inputs":
            if seen_step or len(parts) != 2:
                raise ParseError("'inputs K' must be a single header line", lineno)
            try:
                program.input_slots = int(parts[1])
            except ValueError:
                raise ParseError(f"bad input count '{parts[1]}'", lineno)
            continue
        seen_step = True
        try:
            op = PrimOp.parse(parts[0])
        except ValueError:
            raise ParseError(f"unknown mnemonic '{parts[0]}'", lineno)
        try:
            args = tuple(int(a) for a in parts[1:])
        except ValueError:
            raise ParseError(f"operand indices must be decimal: '{line}'", lineno)
        step = SlpStep(op, args)
        _check_step(step, program.first_step + len(program.steps), lineno)
        program.steps.append(step)
    return program


def dump_slp(p: Slp) -> str:
    lines = []
    if p.input_slots:
        lines.append(f"inputs {p.input_slots}")
    lines.extend(str(step) for step in p.steps)
    return "\n".join(lines) + "\n"


def _apply_checked(op: PrimOp, a: int, b: Optional[int], budget: int) -> int:
    if result_bits_estimate(op, a, b) > budget + 1:
        raise BudgetExceeded(f"'{op.value}' would exceed {budget} bits")
    value = eval_primitive(op, a, b)
    if value.bit_length() > budget:
        raise BudgetExceeded(f"'{op.value}' produced {value.bit_length()} bits (budget {budget})")
    return value


def eval_slp_direct(p: Slp, inputs: Sequence[int] = (), budget: Optional[int] = None) -> SlpValue:
    if budget is None:
        budget = DEFAULT_BUDGETS.direct_bits
    if len(inputs) != p.input_slots:
        raise ParseError(f"program expects {p.input_slots} input(s), got {len(inputs)}")
    values = [0, 1] + [int(v) for v in inputs]
    for value in values:
        if value < 0:
            raise ArithmeticViolation("inputs must be nonnegative")
        if value.bit_length() > budget:
            raise BudgetExceeded(f"input of {value.bit_length()} bits exceeds budget {budget}")
    for step in p.steps:
        a = values[step.args[0]]
        b = values[step.args[1]] if len(step.args) > 1 else None
        values.append(_apply_checked(step.op, a, b, budget))
    return SlpValue(values)


def nonzero_direct(p: Slp, inputs: Sequence[int] = (), budget: Optional[int] = None) -> bool:
    return eval_slp_direct(p, inputs, budget).output != 0


def gen_random_slp(
    length: int,
    ops: Iterable[PrimOp] = LAZY_OPS,
    seed: int = 0,
    budget: Optional[int] = None,
    input_slots: int = 0,
    inputs: Sequence[int] = (),
    shift_cap: int = 64,
    frozen_slots: Sequence[int] = (),
    retries: int = 200,
) -> Slp:
    """Random program of ``length`` steps whose direct evaluation stays inside ``budget``.

    Shift amounts are drawn only from values not above ``shift_cap``. Indices listed in
    ``frozen_slots`` (and everything computed from them) are never used as shift amounts.
    """
    if budget is None:
        budget = DEFAULT_BUDGETS.direct_bits
    if length < 2:
        raise GenerationFailed(f"random programs need at least two steps, got {length}")
    ops = list(ops)
    rng = random.Random(seed)
    program = Slp(input_slots=input_slots)
    values = [0, 1] + list(inputs)
    if len(values) != program.first_step:
        values += [0] * (program.first_step - len(values))
    tainted = [index in frozen_slots for index in range(len(values))]
    for _ in range(length):
        index = len(values)
        for _attempt in range(retries):
            op = rng.choice(ops)
            args = tuple(rng.randrange(index) for _ in range(op.arity))
            if op in (PrimOp.SHL, PrimOp.SHR):
                amounts = [i for i in range(index) if values[i] <= shift_cap and not tainted[i]]
                args = (args[0], rng.choice(amounts))
            if op is PrimOp.DIV:
                b = values[args[1]]
                if b == 0 or values[args[0]] % b:
                    continue
            if op is PrimOp.IDIV and values[args[1]] == 0:
                continue
            try:
                value = _apply_checked(op, values[args[0]], values[args[1]] if op.arity == 2 else None, budget)
            except BudgetExceeded:
                continue
            program.steps.append(SlpStep(op, args))
            values.append(value)
            tainted.append(any(tainted[a] for a in args))
            break
        else:
            raise GenerationFailed(f"no admissible step at index {index} after {retries} tries")
    logger.debug("generated %d-step program with seed %d", length, seed)
    return program
