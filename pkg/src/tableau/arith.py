"""Arithmetic backends the tableau checks run on.

A backend supplies the integers of the checks (``one``, ``zero``, constants), the
Boolean operations, and left shifts by the symbolic amounts ``"w1"``/``"w3"`` or by
small constants. Every primitive it performs is counted against an ``OpSetGate``;
a strict backend raises ``GateViolation`` instead.
"""
from __future__ import annotations

import logging
from typing import Any, List, Optional, Tuple, Union

from ..configs import DEFAULT_BUDGETS
from ..errors import BudgetExceeded, GateViolation, UnsupportedOp
from ..numerics import BOOLEAN_OPS, PrimOp, eval_primitive, tweaked_not
from ..ram import OpSetGate
from .vectors import eq_vec, make_O

logger = logging.getLogger(__name__)

Amount = Union[str, int]

SHL_BOOL = OpSetGate(frozenset({PrimOp.SHL}) | BOOLEAN_OPS)


class Arithmetic:
    """Base backend. Constant shift amounts are applied one position at a time."""
    zero: Any = 0
    one: Any = 1

    def __init__(self, gate: Optional[OpSetGate] = None, strict: bool = False):
        self.gate = gate or OpSetGate()
        self.strict = strict
        self.violations = 0
        self.operations = 0

    def use(self, op: PrimOp):
        self.operations += 1
        if op not in self.gate.allowed:
            self.violations += 1
            logger.debug("operation '%s' outside the gate", op.value)
            if self.strict:
                raise GateViolation(op.value)

    def shl(self, x, amount: Amount):
        if isinstance(amount, int):
            for _ in range(amount):
                x = self.shl_step(x, 1)
            return x
        return self.shl_step(x, amount)

    def shift(self, op: PrimOp, x, amount: int):
        if op is PrimOp.SHL:
            return self.shl(x, amount)
        for _ in range(amount):
            x = self.shr_one(x)
        return x

    def shl_step(self, x, amount: Amount):
        raise NotImplementedError

    def shr_one(self, x):
        raise UnsupportedOp(f"{type(self).__name__} has no right shift")

    def apply(self, op: PrimOp, a, b=None):
        raise NotImplementedError

    def const(self, value: int):
        raise NotImplementedError

    def eq(self, x, y):
        return x == y


class DirectArithmetic(Arithmetic):
    """Plain integers scaled by ``one = 2^one_shift``; shift amounts are native integers."""

    def __init__(
        self,
        w1: int,
        w3: int,
        one_shift: int = 0,
        gate: Optional[OpSetGate] = None,
        strict: bool = False,
        bit_cap: Optional[int] = None,
    ):
        super().__init__(gate or SHL_BOOL, strict)
        self.amounts = {"w1": w1, "w3": w3}
        self.one_shift = one_shift
        self.one = 1 << one_shift
        self.bit_cap = DEFAULT_BUDGETS.witness_bits if bit_cap is None else bit_cap

    def _guard(self, value: int) -> int:
        if value.bit_length() > self.bit_cap:
            raise BudgetExceeded(f"intermediate of {value.bit_length()} bits (cap {self.bit_cap})")
        return value

    def resolve(self, amount: Amount) -> int:
        return self.amounts[amount] if isinstance(amount, str) else amount

    def shl_step(self, x: int, amount: Amount) -> int:
        k = self.resolve(amount)
        self.use(PrimOp.SHL)
        if x and x.bit_length() + k > self.bit_cap:
            raise BudgetExceeded(f"shift by {k} exceeds {self.bit_cap} bits")
        return x << k

    def shr_one(self, x: int) -> int:
        self.use(PrimOp.SHR)
        return x >> 1

    def apply(self, op: PrimOp, a: int, b: Optional[int] = None) -> int:
        self.use(op)
        return self._guard(eval_primitive(op, a, b))

    def const(self, value: int) -> int:
        if self.one_shift:
            self.use(PrimOp.SHL)
        return self._guard(value << self.one_shift)


class RecordingArithmetic(DirectArithmetic):
    """Unscaled integers that log every single left shift as (result, amount)."""

    def __init__(self, w1: int, w3: int, bit_cap: Optional[int] = None):
        super().__init__(w1, w3, gate=OpSetGate(), bit_cap=bit_cap)
        self.shifts: List[Tuple[int, int]] = []

    def shl_step(self, x: int, amount: Amount) -> int:
        result = super().shl_step(x, amount)
        self.shifts.append((result, self.resolve(amount)))
        return result


class VectorArithmetic(DirectArithmetic):
    """K candidates side by side in slots of T bits; constants become O^K vectors.

    ``eq`` answers with a flag vector holding 1 at bit T*i where slot i agrees.
    """

    def __init__(self, w1: int, w3: int, T: int, K: int, bit_cap: Optional[int] = None):
        super().__init__(w1, w3, gate=OpSetGate(), bit_cap=bit_cap)
        self.T, self.K = T, K
        self.one = make_O(1, T, K)
        self.zero = 0
        self.window = (1 << (T * K)) - 1

    def const(self, value: int) -> int:
        return make_O(value, self.T, self.K)

    def apply(self, op: PrimOp, a: int, b: Optional[int] = None) -> int:
        if op is PrimOp.NOT:
            # tweaked negation only makes sense slot by slot, for uniform vectors
            slot = a & ((1 << self.T) - 1)
            if a != make_O(slot, self.T, self.K):
                raise UnsupportedOp("negation of a candidate-dependent vector")
            self.use(op)
            return make_O(tweaked_not(slot), self.T, self.K)
        return super().apply(op, a, b)

    def eq(self, x: int, y: int) -> int:
        return eq_vec(self.T, x & self.window, y & self.window, self.K)

    def all_flags(self) -> int:
        return make_O(1, self.T, self.K)
