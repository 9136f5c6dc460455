"""Tableau verification with left shifts and Boolean operations only.

Given w1 (field width w), w3 ((n-1)*m), w4 and w5 (the masks O^n of 2^w - 1 and of
1 at width m = 3w) and the tableau w2, the checks below accept exactly the
tableaus of a bounded run that starts on the input and ends stable in the wanted
halting state. One parallel step of the compiled machine advances every element
at once and each element must equal its predecessor's successor.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterator, List, Optional

from ..codegen import BOUNDARY, HEAD, STATE, TAPE, emit_bounded_step, remove_shr, run_fragment
from ..configs import DEFAULT_BUDGETS, Budgets
from ..errors import LazyRamError
from ..numerics import PrimOp
from ..ram import Command
from ..tm import ACCEPT, TmSpec
from .arith import Arithmetic, DirectArithmetic
from .witness import TableauWitness

logger = logging.getLogger(__name__)

W1, W3 = "w1", "w3"


@dataclass
class Check:
    name: str
    lhs: Any
    rhs: Any


@dataclass
class Verdict:
    accepted: bool
    reason: str = "accepted"
    violations: int = 0

    def __bool__(self):
        return self.accepted


@dataclass
class StepFragment:
    commands: List[Command]
    scale_shift: int


def step_fragment(spec: TmSpec, shr_free: bool = True) -> StepFragment:
    """The bounded step, by default rewritten without right shifts.

    The rewritten step leaves its results scaled by 2^(number of right shifts).
    """
    step = emit_bounded_step(spec)
    if not shr_free:
        return StepFragment(step.commands, 0)
    program = remove_shr(step.program).program
    return StepFragment([program.commands[label] for label in sorted(program.commands)], step.shr_count())


class TableauCircuit:
    def __init__(self, arith: Arithmetic, spec: TmSpec, input: int, w2, w4, w5, fragment: StepFragment):
        self.arith = arith
        self.spec = spec
        self.input = input
        self.w2, self.w4, self.w5 = w2, w4, w5
        self.fragment = fragment
        self.head = None
        self.state = None
        self.last_field = None

    def _op(self, op: PrimOp, a, b=None):
        return self.arith.apply(op, a, b)

    def _by_m(self, x):
        for _ in range(3):
            x = self.arith.shl(x, W1)
        return x

    def _by_2w(self, x):
        return self.arith.shl(self.arith.shl(x, W1), W1)

    def checks(self) -> Iterator[Check]:
        """Every check except the final state's; the head and state vectors are kept for that one."""
        ar, op = self.arith, self._op
        one, zero = ar.one, ar.zero
        ones_below = lambda top: op(PrimOp.CLEAR, op(PrimOp.NOT, top), op(PrimOp.NOT, one))
        a = ones_below(ar.shl(one, W1))
        low_c = ones_below(ar.shl(one, self.spec.c))
        yield Check("tape_width", op(PrimOp.AND, a, low_c), low_c)
        inp = ar.const(self.input)
        yield Check("input_width", op(PrimOp.CLEAR, ar.shl(inp, self.spec.c - 1), a), zero)

        w2, w4, w5 = self.w2, self.w4, self.w5
        yield Check("w5_identity", op(PrimOp.OR, self._by_m(w5), one), op(PrimOp.OR, w5, self._by_m(ar.shl(one, W3))))
        yield Check("w4_identity", op(PrimOp.OR, self._by_m(w4), a), op(PrimOp.OR, w4, self._by_m(ar.shl(a, W3))))
        w4_state = ar.shl(w4, W1)
        w4_head = ar.shl(w4_state, W1)
        fields = op(PrimOp.OR, w4, op(PrimOp.OR, w4_state, w4_head))
        yield Check("excess_bits", op(PrimOp.CLEAR, w2, fields), zero)

        # every field moves to the top third of its element
        tape = self._by_2w(op(PrimOp.AND, w2, w4))
        state = ar.shl(op(PrimOp.AND, w2, w4_state), W1)
        head = op(PrimOp.AND, w2, w4_head)
        boundary = op(PrimOp.OR, self._by_2w(w5), self._by_m(w5))
        out = run_fragment(
            self.fragment.commands,
            {TAPE: tape, HEAD: head, STATE: state, BOUNDARY: boundary},
            ar,
        )
        t = self.fragment.scale_shift
        first = self._by_2w(a)
        last = ar.shl(first, W3)
        self.head, self.state, self.last_field = head, state, last
        initial = {TAPE: self._by_2w(inp), STATE: zero, HEAD: self._by_2w(one)}
        for name, register, vector in (("tape", TAPE, tape), ("state", STATE, state), ("head", HEAD, head)):
            yield Check(f"initial_{name}", op(PrimOp.AND, vector, first), initial[register])
            successors = self._by_m(op(PrimOp.CLEAR, out[register], ar.shl(last, t)))
            yield Check(f"{name}_chain", successors, ar.shl(op(PrimOp.CLEAR, vector, first), t))
        anchor = ar.shl(self._by_2w(one), W3)
        yield Check("final_head", op(PrimOp.AND, head, last), anchor)

    def final_state_check(self, halting_state: int = ACCEPT) -> Check:
        ar = self.arith
        expected = ar.shl(self._by_2w(ar.const(halting_state)), W3)
        return Check("final_state", self._op(PrimOp.AND, self.state, self.last_field), expected)


def run_checks(circuit: TableauCircuit, final_state: int = ACCEPT) -> Verdict:
    """First failing check wins; arithmetic failures on junk witnesses are rejections."""
    arith = circuit.arith
    try:
        for check in circuit.checks():
            if not arith.eq(check.lhs, check.rhs):
                logger.debug("check '%s' failed", check.name)
                return Verdict(False, check.name, arith.violations)
        check = circuit.final_state_check(final_state)
        if not arith.eq(check.lhs, check.rhs):
            return Verdict(False, check.name, arith.violations)
    except LazyRamError as e:
        logger.debug("verification aborted: %s", e)
        return Verdict(False, rejection_reason(e), arith.violations)
    return Verdict(True, "accepted", arith.violations)


def rejection_reason(error: LazyRamError) -> str:
    name = type(error).__name__
    return {
        "BudgetExceeded": "too_large",
        "GateViolation": "gate",
        "NotExact": "inexact",
        "DivByZero": "inexact",
    }.get(name, getattr(error, "reason", None) or name)


def witness_too_large(w: TableauWitness, budgets: Budgets) -> bool:
    cap = budgets.witness_bits
    return (
        w.w1 < 1 or w.w1 > cap or w.w3 > cap
        or max(w.w2.bit_length(), w.w4.bit_length(), w.w5.bit_length()) > cap
    )


def verify_tableau(
    spec: TmSpec,
    input: int,
    w: TableauWitness,
    final_state: int = ACCEPT,
    budgets: Optional[Budgets] = None,
    strict: bool = False,
) -> Verdict:
    budgets = budgets or DEFAULT_BUDGETS
    if witness_too_large(w, budgets):
        return Verdict(False, "too_large")
    arith = DirectArithmetic(w.w1, w.w3, strict=strict, bit_cap=budgets.witness_bits)
    circuit = TableauCircuit(arith, spec, input, w.w2, w.w4, w.w5, step_fragment(spec))
    verdict = run_checks(circuit, final_state)
    logger.debug("tableau verdict: %s (%s)", verdict.accepted, verdict.reason)
    return verdict
