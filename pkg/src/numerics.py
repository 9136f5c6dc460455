"""Tweaked arithmetic and Boolean primitives over nonnegative integers.

Every register and SLP node holds a Python ``int`` that is never negative. The
operations below are the RAM's basic operation set: subtraction is natural
subtraction, negation flips bits only up to the most significant one, and
``clear`` is an untweaked ``a AND NOT b``.
"""
from __future__ import annotations

from enum import Enum
from typing import Optional

from .errors import ArityMismatch, DivByZero, NotExact


class PrimOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    IDIV = "idiv"
    SHL = "shl"
    SHR = "shr"
    AND = "and"
    OR = "or"
    XOR = "xor"
    NOT = "not"
    CLEAR = "clear"
    INC = "inc"

    @property
    def arity(self) -> int:
        return 1 if self in (PrimOp.NOT, PrimOp.INC) else 2

    @classmethod
    def parse(cls, mnemonic: str) -> "PrimOp":
        return cls(mnemonic.strip().lower())


BOOLEAN_OPS = frozenset({PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.NOT, PrimOp.CLEAR})
SHIFT_OPS = frozenset({PrimOp.SHL, PrimOp.SHR})


def bit_length(a: int) -> int:
    return a.bit_length()


def tweaked_not(a: int) -> int:
    # not(0) = 0: there is no bit to flip
    return a ^ ((1 << a.bit_length()) - 1)


def clear(a: int, b: int) -> int:
    return a & ~b


def eval_primitive(op: PrimOp, a: int, b: Optional[int] = None) -> int:
    if (b is None) != (op.arity == 1):
        raise ArityMismatch(f"'{op.value}' takes {op.arity} operand(s)")
    if op is PrimOp.ADD:
        return a + b
    if op is PrimOp.SUB:
        return a - b if a > b else 0
    if op is PrimOp.MUL:
        return a * b
    if op is PrimOp.DIV:
        if b == 0:
            raise DivByZero("exact division by zero")
        q, r = divmod(a, b)
        if r:
            raise NotExact(f"{a} is not a multiple of {b}")
        return q
    if op is PrimOp.IDIV:
        if b == 0:
            raise DivByZero("integer division by zero")
        return a // b
    if op is PrimOp.SHL:
        return a << b
    if op is PrimOp.SHR:
        return a >> b
    if op is PrimOp.AND:
        return a & b
    if op is PrimOp.OR:
        return a | b
    if op is PrimOp.XOR:
        return a ^ b
    if op is PrimOp.NOT:
        return tweaked_not(a)
    if op is PrimOp.CLEAR:
        return clear(a, b)
    if op is PrimOp.INC:
        return a + 1
    raise ArityMismatch(f"unknown operation {op!r}")


def set_mask(a: int) -> int:
    """All ones up to and including the most significant one of ``a``."""
    return a | tweaked_not(a)


def natsub_via_bool(a: int, b: int) -> int:
    """Natural subtraction built only from addition, Boolean operations and ``set_mask``."""
    sa, sb = set_mask(a), set_mask(b)
    if sa | sb != sa:
        return 0
    if sa == sb and (a + tweaked_not(b)) & (sa + 1) == 0:
        return 0
    return (a + tweaked_not(b + sa)) & sa


def result_bits_estimate(op: PrimOp, a: int, b: Optional[int]) -> int:
    """Upper bound on the bit-length of ``op(a, b)`` without computing it."""
    la = a.bit_length()
    lb = 0 if b is None else b.bit_length()
    if op in (PrimOp.ADD, PrimOp.INC):
        return max(la, lb) + 1
    if op is PrimOp.MUL:
        return la + lb
    if op is PrimOp.SHL:
        return la + b if a else 0
    return max(la, lb)
