from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from ..numerics import PrimOp
from ..slp import Slp


@dataclass(frozen=True)
class FormalVar:
    """A shift site. Its standard evaluation is 2^(direction * value(v[operand_step])).

    ``operand_step`` is None for the ALN variable, whose amount is the symbolic omega.
    """
    step: int
    direction: int
    operand_step: Optional[int]

    @property
    def is_aln(self) -> bool:
        return self.operand_step is None


@dataclass(frozen=True, order=True)
class PobitIndex:
    """Names the position sum_j exponents[j] * direction_j * x_j + offset.

    Enumerated indices carry nonnegative exponents; query positions built during
    evaluation (and differences of indices) may carry negative ones.
    """
    exponents: Tuple[int, ...]
    offset: int = 0

    @classmethod
    def zero(cls, arity: int) -> "PobitIndex":
        return cls((0,) * arity, 0)

    def __add__(self, other: "PobitIndex") -> "PobitIndex":
        return PobitIndex(tuple(a + b for a, b in zip(self.exponents, other.exponents)), self.offset + other.offset)

    def __sub__(self, other: "PobitIndex") -> "PobitIndex":
        return PobitIndex(tuple(a - b for a, b in zip(self.exponents, other.exponents)), self.offset - other.offset)

    def bump(self, var: int, delta: int = 1) -> "PobitIndex":
        exponents = list(self.exponents)
        exponents[var] += delta
        return PobitIndex(tuple(exponents), self.offset)

    def moved(self, delta: int) -> "PobitIndex":
        return PobitIndex(self.exponents, self.offset + delta)

    @property
    def is_constant(self) -> bool:
        return not any(self.exponents)

    def scalar_bits(self) -> int:
        return max([abs(self.offset).bit_length()] + [abs(e).bit_length() for e in self.exponents])


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1

    @classmethod
    def of(cls, sign: int) -> "Ordering":
        return cls((sign > 0) - (sign < 0))


def formal_vars(p: Slp, aln: bool = False) -> List[FormalVar]:
    """Formal variables in definition order; the ALN variable, when present, comes first."""
    variables = []
    if aln:
        variables.append(FormalVar(step=2, direction=1, operand_step=None))
    for offset, step in enumerate(p.steps):
        if step.op in (PrimOp.SHL, PrimOp.SHR):
            variables.append(FormalVar(
                step=p.first_step + offset,
                direction=1 if step.op is PrimOp.SHL else -1,
                operand_step=step.args[1],
            ))
    return variables


def balanced_digits(value: int) -> List[int]:
    """Digits b_i = a_(i-1) - a_i in {-1, 0, 1}, one above the most significant bit included."""
    digits, previous = [], 0
    for i in range(value.bit_length() + 1):
        current = (value >> i) & 1
        digits.append(previous - current)
        previous = current
    return digits
