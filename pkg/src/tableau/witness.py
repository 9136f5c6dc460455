from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

from ..configs import DEFAULT_BUDGETS, Budgets
from ..errors import BudgetExceeded, NotAccepting, ParseError, StepBudgetExhausted
from ..tm import ACCEPT, TmSpec, run_tm
from ..utils import parse_int
from .vectors import decode_vector, encode_vector, make_O

logger = logging.getLogger(__name__)


@dataclass
class Tableau:
    """The packed run of a bounded machine, stable configuration repeated once at the end."""
    ids: List[int]
    s: int
    c: int
    final_state: int

    @property
    def w(self) -> int:
        return self.s + self.c - 1

    @property
    def m(self) -> int:
        return 3 * self.w

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def value(self) -> int:
        return encode_vector(self.ids, self.m)

    def padded(self, n: int) -> "Tableau":
        if n < self.n:
            raise BudgetExceeded(f"run needs {self.n} elements, only {n} allowed")
        return Tableau(self.ids + [self.ids[-1]] * (n - self.n), self.s, self.c, self.final_state)


@dataclass
class TableauWitness:
    w1: int
    w2: int
    w3: int
    w4: int
    w5: int

    @property
    def m(self) -> int:
        return 3 * self.w1

    @property
    def n(self) -> int:
        return self.w3 // self.m + 1

    def elements(self) -> List[int]:
        return decode_vector(self.m, self.w2, self.n)

    def dumps(self) -> str:
        return (
            f"w1={self.w1}\n"
            f"w2={hex(self.w2)}\n"
            f"w3={self.w3}\n"
            f"w4={hex(self.w4)}\n"
            f"w5={hex(self.w5)}\n"
        )

    @classmethod
    def loads(cls, text: str) -> "TableauWitness":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in ("w1", "w2", "w3", "w4", "w5"):
                raise ParseError(f"expected 'w<k>=<value>', got '{line}'", lineno)
            try:
                values[key] = parse_int(value.strip())
            except ValueError:
                raise ParseError(f"bad number for {key}", lineno)
        missing = [k for k in ("w1", "w2", "w3", "w4", "w5") if k not in values]
        if missing:
            raise ParseError(f"witness file lacks {', '.join(missing)}")
        return cls(**values)


def build_tableau(spec: TmSpec, input: int, s: int, budgets: Optional[Budgets] = None) -> Tableau:
    """Tableau of the bounded run on ``input``, whatever halting state it ends in."""
    budgets = budgets or DEFAULT_BUDGETS
    run = run_tm(spec, input, s, budgets.max_steps)
    if not run.halted:
        raise StepBudgetExhausted(f"machine did not halt on {s} cell(s) within {budgets.max_steps} steps")
    tableau = Tableau(run.trace, s, spec.c, run.config.state)
    if tableau.n * tableau.m > budgets.witness_bits:
        raise BudgetExceeded(f"tableau of {tableau.n * tableau.m} bits exceeds {budgets.witness_bits}")
    return tableau


def witnesses_for(tableau: Tableau) -> TableauWitness:
    m, n = tableau.m, tableau.n
    return TableauWitness(
        w1=tableau.w,
        w2=tableau.value,
        w3=(n - 1) * m,
        w4=make_O((1 << tableau.w) - 1, m, n),
        w5=make_O(1, m, n),
    )


def make_witnesses(spec: TmSpec, input: int, s: int, budgets: Optional[Budgets] = None) -> TableauWitness:
    tableau = build_tableau(spec, input, s, budgets)
    if tableau.final_state != ACCEPT:
        raise NotAccepting(f"run on {s} cell(s) ends in state {tableau.final_state}")
    logger.debug("witnesses for a %d-element tableau of width %d", tableau.n, tableau.m)
    return witnesses_for(tableau)
