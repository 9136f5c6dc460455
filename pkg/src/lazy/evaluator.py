"""Polynomial-space evaluation of straight-line programs.

Values are never materialized. Every value is described by the positions where
its bits change, named symbolically by ``PobitIndex`` forms over the program's
shift amounts. Bits and change positions are recomputed on demand by walking
the positions in order; the only memory kept across calls is a set of bounded
LRU caches.
"""
from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from ..configs import DEFAULT_BUDGETS
from ..errors import ArityMismatch, LazyRamError, ParseError, UnsupportedOp
from ..numerics import BOOLEAN_OPS, PrimOp
from ..slp import Slp, SlpStep, eval_slp_direct, validate_slp
from .index import FormalVar, Ordering, PobitIndex, formal_vars

logger = logging.getLogger(__name__)

SUPPORTED_OPS = frozenset({
    PrimOp.ADD, PrimOp.SUB, PrimOp.MUL, PrimOp.SHL, PrimOp.SHR, PrimOp.INC,
    PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.NOT, PrimOp.CLEAR,
})


class LazyMode(str, Enum):
    PLAIN = "plain"
    ALN = "aln"


@dataclass
class SpaceReport:
    max_scalar_bits: int = 0
    max_live_indices: int = 0


class SpaceMeter:
    """Peak sizes seen during one evaluation, shared with auxiliary evaluators.

    Live indices are the query positions on the bit-evaluation stack plus every
    index held by a tracked cache.
    """

    def __init__(self):
        self.depth = 0
        self._stores: List[Tuple[Callable, int]] = []
        self.report = SpaceReport()

    def scalar(self, value: int):
        bits = abs(value).bit_length()
        if bits > self.report.max_scalar_bits:
            self.report.max_scalar_bits = bits

    def index(self, index: PobitIndex):
        bits = index.scalar_bits()
        if bits > self.report.max_scalar_bits:
            self.report.max_scalar_bits = bits

    def track(self, memo: Callable, weight: int = 1):
        """Counts ``weight`` indices for every entry of an ``lru_cache`` wrapper."""
        self._stores.append((memo, weight))

    def untrack(self, memo: Callable):
        self._stores = [(m, w) for m, w in self._stores if m is not memo]

    @property
    def live(self) -> int:
        return self.depth + sum(weight * memo.cache_info().currsize for memo, weight in self._stores)

    def sample(self):
        live = self.live
        if live > self.report.max_live_indices:
            self.report.max_live_indices = live

    def enter(self):
        self.depth += 1
        self.sample()

    def leave(self):
        self.sample()
        self.depth -= 1


def _change_points(value: int) -> List[int]:
    return [i for i in range(value.bit_length() + 1) if ((value >> i) & 1) != ((value >> (i - 1)) & 1 if i else 0)]


class _StepBuilder:
    """Appends steps to a copy of a prefix program."""

    def __init__(self, base: Slp):
        self.program = Slp(list(base.steps), base.input_slots)
        self._constants = {0: 0, 1: 1}

    def emit(self, op: PrimOp, *args: int) -> int:
        self.program.steps.append(SlpStep(op, tuple(args)))
        return self.program.n

    def constant(self, k: int) -> int:
        if k not in self._constants:
            index = 1
            for digit in bin(k)[3:]:
                index = self.emit(PrimOp.ADD, index, index)
                if digit == "1":
                    index = self.emit(PrimOp.ADD, index, 1)
            self._constants[k] = index
        return self._constants[k]

    def scaled(self, k: int, index: int) -> int:
        return index if k == 1 else self.emit(PrimOp.MUL, self.constant(k), index)

    def total(self, indices: Sequence[int]) -> int:
        if not indices:
            return 0
        acc = indices[0]
        for index in indices[1:]:
            acc = self.emit(PrimOp.ADD, acc, index)
        return acc


def substitute_aln(p: Slp, omega: int) -> Slp:
    """The program with X = 2^omega computed by a prefix instead of read from slot 2.

    ``omega`` must be a power of two. Inputs after X move down one slot.
    """
    if omega <= 0 or omega & (omega - 1):
        raise ValueError(f"omega must be a power of two, got {omega}")
    if p.input_slots < 1:
        raise UnsupportedOp("ALN programs need input slot 2 for X")
    builder = _StepBuilder(Slp([], p.input_slots - 1))
    exponent = builder.constant(omega.bit_length() - 1)
    x = builder.emit(PrimOp.SHL, 1, builder.emit(PrimOp.SHL, 1, exponent))

    def moved(index: int) -> int:
        if index < 2:
            return index
        if index == 2:
            return x
        if index < p.first_step:
            return index - 1
        return x + 1 + index - p.first_step

    for step in p.steps:
        builder.emit(step.op, *(moved(a) for a in step.args))
    return builder.program


class LazyEvaluator:
    """Bit oracle for every value of one program.

    In ALN mode input slot 2 is the symbolic X = 2^omega and ``inputs`` supplies
    the remaining slots; answers then hold for every sufficiently large omega.
    ``cache_size`` bounds each memo table; 0 recomputes everything.
    """

    def __init__(
        self,
        p: Slp,
        inputs: Sequence[int] = (),
        mode: LazyMode = LazyMode.PLAIN,
        meter: Optional[SpaceMeter] = None,
        cache_size: Optional[int] = None,
    ):
        mode = LazyMode(mode)
        for step in p.steps:
            if step.op not in SUPPORTED_OPS:
                raise UnsupportedOp(f"'{step.op.value}' has no lazy evaluation")
        validate_slp(p)
        self.p = p
        self.aln = mode is LazyMode.ALN
        self.mode = mode
        first_concrete = 3 if self.aln else 2
        if self.aln and p.input_slots < 1:
            raise UnsupportedOp("ALN mode needs input slot 2 for X")
        if len(inputs) != p.first_step - first_concrete:
            raise ParseError(f"program expects {p.first_step - first_concrete} concrete input(s), got {len(inputs)}")
        self._raw_inputs = tuple(int(v) for v in inputs)
        self.inputs = {first_concrete + k: v for k, v in enumerate(self._raw_inputs)}
        self.vars: List[FormalVar] = formal_vars(p, self.aln)
        self.var_at = {var.step: j for j, var in enumerate(self.vars) if not var.is_aln}
        self.zero = PobitIndex.zero(len(self.vars))
        self.meter = meter or SpaceMeter()
        self.cache_size = DEFAULT_BUDGETS.lazy_cache if cache_size is None else cache_size
        self._bit_memo = lru_cache(maxsize=self.cache_size)(self._bit)
        self._step_memo = lru_cache(maxsize=self.cache_size)(self._step)
        self._change_memo = lru_cache(maxsize=self.cache_size)(self._change)
        self._sign_memo = lru_cache(maxsize=self.cache_size)(self._aux_sign)
        # a bound and a result per step/change entry
        self._memos = ((self._bit_memo, 1), (self._step_memo, 2), (self._change_memo, 2), (self._sign_memo, 1))
        for memo, weight in self._memos:
            self.meter.track(memo, weight)
        self._counts: Dict[int, int] = {}
        self._nonzero: Dict[int, bool] = {}
        # each step of the program can nest a few dozen interpreter frames
        frames = 200 * (len(p.steps) + 8)
        if sys.getrecursionlimit() < frames:
            sys.setrecursionlimit(frames)
        if self.aln:
            self._check_shifts_free_of_x()

    def _check_shifts_free_of_x(self):
        tainted = {2}
        for offset, step in enumerate(self.p.steps):
            index = self.p.first_step + offset
            if step.op in (PrimOp.SHL, PrimOp.SHR) and step.args[1] in tainted:
                raise UnsupportedOp(f"shift amount of step {index} depends on X")
            if any(a in tainted for a in step.args):
                tainted.add(index)

    @property
    def arity(self) -> int:
        return len(self.vars)

    def check_index(self, index: PobitIndex):
        if len(index.exponents) != self.arity:
            raise ArityMismatch(f"index names {len(index.exponents)} variables, program has {self.arity}")

    def release(self):
        """Drops every cache and stops reporting them to the shared meter."""
        for memo, _ in self._memos:
            memo.cache_clear()
            self.meter.untrack(memo)

    # ordering

    def sign(self, form: PobitIndex) -> int:
        """Sign of the position named by ``form`` under the standard evaluation."""
        self.meter.index(form)
        coefficients = [e * var.direction for e, var in zip(form.exponents, self.vars)]
        if self.aln and coefficients[0]:
            return 1 if coefficients[0] > 0 else -1
        live = tuple(
            (j, c) for j, c in enumerate(coefficients)
            if c and not self.vars[j].is_aln and self.nonzero_at(self.vars[j].operand_step)
        )
        delta = form.offset
        if not live:
            return (delta > 0) - (delta < 0)
        if delta >= 0 and all(c > 0 for _, c in live):
            return 1
        if delta <= 0 and all(c < 0 for _, c in live):
            return -1
        return self._sign_memo(live, delta)

    def _aux_sign(self, live: Tuple[Tuple[int, int], ...], delta: int) -> int:
        operands = [self.vars[j].operand_step for j, _ in live]
        builder = _StepBuilder(self.p.prefix(max(operands)))
        positive = [builder.scaled(c, b) for (_, c), b in zip(live, operands) if c > 0]
        negative = [builder.scaled(-c, b) for (_, c), b in zip(live, operands) if c < 0]
        if delta > 0:
            positive.append(builder.constant(delta))
        elif delta < 0:
            negative.append(builder.constant(-delta))
        p_index, n_index = builder.total(positive), builder.total(negative)
        above = builder.emit(PrimOp.SUB, p_index, n_index)
        below = builder.emit(PrimOp.SUB, n_index, p_index)
        logger.debug("deciding a %d-term comparison with a %d-step auxiliary program", len(live), len(builder.program.steps))
        child = LazyEvaluator(builder.program, self._raw_inputs, self.mode, self.meter, self.cache_size)
        try:
            if child.nonzero_at(above):
                return 1
            if child.nonzero_at(below):
                return -1
            return 0
        finally:
            child.release()

    def compare(self, i1: PobitIndex, i2: PobitIndex) -> Ordering:
        return Ordering.of(self.sign(i1 - i2))

    def _beyond(self, index: PobitIndex, bound: Optional[PobitIndex], down: bool) -> bool:
        if bound is None:
            return True
        s = self.sign(index - bound)
        return s < 0 if down else s > 0

    def _nearest(self, options: Iterable[Optional[PobitIndex]], down: bool) -> Optional[PobitIndex]:
        """The lowest option (highest when ``down``); equal positions keep the smaller tuple."""
        best = None
        for option in options:
            if option is None:
                continue
            if best is None:
                best = option
                continue
            s = self.sign(option - best)
            if (s > 0 if down else s < 0) or (s == 0 and option < best):
                best = option
        return best

    # interesting positions

    def next_candidate(
        self, t: int, bound: Optional[PobitIndex] = None, down: bool = False,
    ) -> Optional[PobitIndex]:
        """Nearest enumerated index of v_t strictly above ``bound`` (below it when ``down``).

        A missing bound starts from the bottom (the top when ``down``). The
        enumerated indices name distinct nonnegative positions, zero included,
        and cover every position where v_t changes.
        """
        result = self._step_memo(t, bound, down)
        self.meter.sample()
        return result

    def _step(self, t: int, bound: Optional[PobitIndex], down: bool) -> Optional[PobitIndex]:
        if bound is not None:
            self.meter.index(bound)
            if self.sign(bound) < 0 and not down:
                return self.zero
            if self.sign(bound) <= 0 and down:
                return None
        elif not down:
            return self.zero
        best = self._nearest(self._options(t, bound, down), down)
        if best is not None and self.sign(best) <= 0:
            best = None
        if best is None and down:
            best = self.zero
        if best is not None:
            self.meter.index(best)
        return best

    def _points(self, points: Iterable[PobitIndex], bound, down) -> Iterator[PobitIndex]:
        return (point for point in points if self._beyond(point, bound, down))

    def _options(self, t: int, bound: Optional[PobitIndex], down: bool) -> Iterator[Optional[PobitIndex]]:
        """Indices beyond ``bound`` from which the nearest candidate of v_t is picked."""
        if t == 0:
            return
        if t == 1:
            yield from self._points((self.zero, self.zero.moved(1)), bound, down)
            return
        if self.p.is_input(t):
            if self.aln and t == 2:
                e = self.zero.bump(0)
                yield from self._points((e, e.moved(1)), bound, down)
            else:
                yield from self._points((self.zero.moved(i) for i in _change_points(self.inputs[t])), bound, down)
            return
        step = self.p.step_at(t)
        op, a = step.op, step.args[0]
        if op in (PrimOp.ADD, PrimOp.SUB, PrimOp.INC):
            below = None if bound is None else bound.moved(-1)
            for operand in (a, 1 if op is PrimOp.INC else step.args[1]):
                yield self.next_change(operand, bound, down)
                change = self.next_change(operand, below, down)
                yield change.moved(1) if change is not None else None
        elif op is PrimOp.NOT:
            yield self.next_change(a, bound, down)
        elif op in BOOLEAN_OPS:
            yield self.next_change(a, bound, down)
            yield self.next_change(step.args[1], bound, down)
        elif op in (PrimOp.SHL, PrimOp.SHR):
            var = self.var_at[t]
            change = self.next_change(a, None if bound is None else bound.bump(var, -1), down)
            yield change.bump(var) if change is not None else None
        else:
            b = step.args[1]
            spread = (self.count_changes(a) * self.count_changes(b)).bit_length() + 1
            for p in self.iter_changes(a):
                for k in range(spread + 1):
                    change = self.next_change(b, None if bound is None else (bound - p).moved(-k), down)
                    yield (p + change).moved(k) if change is not None else None

    def next_change(
        self, t: int, bound: Optional[PobitIndex] = None, down: bool = False,
    ) -> Optional[PobitIndex]:
        """Nearest position i beyond ``bound`` where bit i of v_t differs from bit i - 1."""
        result = self._change_memo(t, bound, down)
        self.meter.sample()
        return result

    def _change(self, t: int, bound: Optional[PobitIndex], down: bool) -> Optional[PobitIndex]:
        index = self.next_candidate(t, bound, down)
        while index is not None:
            if self.bit(t, index) != self.bit(t, index.moved(-1)):
                return index
            index = self.next_candidate(t, index, down)
        return None

    def iter_candidates(self, t: int) -> Iterator[PobitIndex]:
        index = self.next_candidate(t)
        while index is not None:
            yield index
            index = self.next_candidate(t, index)

    def iter_changes(self, t: int, down: bool = False) -> Iterator[PobitIndex]:
        index = self.next_change(t, None, down)
        while index is not None:
            yield index
            index = self.next_change(t, index, down)

    def count_changes(self, t: int) -> int:
        if t not in self._counts:
            self._counts[t] = sum(1 for _ in self.iter_changes(t))
            self.meter.scalar(self._counts[t])
        return self._counts[t]

    def nonzero_at(self, t: int) -> bool:
        if t not in self._nonzero:
            self._nonzero[t] = self.next_change(t) is not None
        return self._nonzero[t]

    def nonzero(self) -> bool:
        return self.nonzero_at(self.p.n)

    # bits

    def bit(self, t: int, q: PobitIndex) -> int:
        self.meter.enter()
        self.meter.index(q)
        try:
            return self._bit_memo(t, q)
        finally:
            self.meter.leave()

    def _bit(self, t: int, q: PobitIndex) -> int:
        if t == 0 or self.sign(q) < 0:
            return 0
        if t == 1:
            return int(self.sign(q) == 0)
        if self.p.is_input(t):
            if self.aln and t == 2:
                return int(self.sign(q - self.zero.bump(0)) == 0)
            value = self.inputs[t]
            for i in reversed(_change_points(value)):
                if self.sign(q.moved(-i)) >= 0:
                    return (value >> i) & 1
            return value & 1
        step = self.p.step_at(t)
        op, a = step.op, step.args[0]
        if op in (PrimOp.SHL, PrimOp.SHR):
            return self.bit(a, q.bump(self.var_at[t], -1))
        if op is PrimOp.NOT:
            top = self.next_change(a, None, down=True)
            if top is None or self.sign(q - top) >= 0:
                return 0
            return 1 - self.bit(a, q)
        if op is PrimOp.MUL:
            return self._product_bit(a, step.args[1], q)
        b = 1 if op is PrimOp.INC else step.args[1]
        if op is PrimOp.AND:
            return self.bit(a, q) and self.bit(b, q)
        if op is PrimOp.OR:
            return self.bit(a, q) or self.bit(b, q)
        if op is PrimOp.XOR:
            return self.bit(a, q) ^ self.bit(b, q)
        if op is PrimOp.CLEAR:
            return self.bit(a, q) and 1 - self.bit(b, q)
        if op is PrimOp.SUB and not self._exceeds(a, b):
            return 0
        return self.bit(a, q) ^ self.bit(b, q) ^ self._carry(a, b, q, borrow=op is PrimOp.SUB)

    def _region_below(self, a: int, b: int, bound: Optional[PobitIndex]) -> Optional[PobitIndex]:
        """Highest change of either operand below ``bound``; both bits are constant from there up to it."""
        return self._nearest((self.next_change(a, bound, True), self.next_change(b, bound, True)), down=True)

    def _carry(self, a: int, b: int, q: PobitIndex, borrow: bool) -> int:
        u = self._region_below(a, b, q)
        while u is not None:
            x, y = self.bit(a, u), self.bit(b, u)
            if borrow and x != y:
                return y
            if not borrow and x == y:
                return x
            u = self._region_below(a, b, u)
        return 0

    def _exceeds(self, a: int, b: int) -> bool:
        u = self._region_below(a, b, None)
        while u is not None:
            x, y = self.bit(a, u), self.bit(b, u)
            if x != y:
                return x == 1
            u = self._region_below(a, b, u)
        return False

    def _digit(self, t: int, index: PobitIndex) -> int:
        return self.bit(t, index.moved(-1)) - self.bit(t, index)

    def _next_term(self, a: int, b: int, after: Optional[PobitIndex]) -> Optional[PobitIndex]:
        # the product is the sum of digit(a, p) * digit(b, r) * 2^(p + r) over change points
        return self._nearest(
            (p + r for p in self.iter_changes(a)
             for r in (self.next_change(b, None if after is None else after - p),) if r is not None),
            down=False,
        )

    def _term_coefficient(self, a: int, b: int, z: PobitIndex) -> int:
        total = 0
        for p in self.iter_changes(a):
            target = z - p
            r = self.next_change(b, target.moved(-1))
            if r is not None and self.sign(r - target) == 0:
                total += self._digit(a, p) * self._digit(b, r)
        return total

    def _product_bit(self, a: int, b: int, q: PobitIndex) -> int:
        carry, previous = 0, None
        z = self._next_term(a, b, None)
        while z is not None and self.sign(q - z) >= 0:
            if previous is not None:
                carry = self._settle(carry, z - previous)
            carry += self._term_coefficient(a, b, z)
            previous = z
            self.meter.scalar(carry)
            z = self._next_term(a, b, z)
        if previous is None:
            return 0
        return self._settle(carry, q - previous) & 1

    def _settle(self, carry: int, gap: PobitIndex) -> int:
        """``carry`` shifted right by the (nonnegative) position ``gap``."""
        if carry in (0, -1):
            return carry
        spread = abs(carry).bit_length() + 1
        if self.sign(gap.moved(-spread)) >= 0:
            return 0 if carry >= 0 else -1
        for k in range(spread):
            if self.sign(gap.moved(-k)) == 0:
                return carry >> k
        raise LazyRamError("negative gap between ordered product terms")


_last: Optional[LazyEvaluator] = None


def _evaluator(p: Slp, inputs: Sequence[int], mode: LazyMode) -> LazyEvaluator:
    global _last
    _last = LazyEvaluator(p, inputs, mode)
    return _last


def enumerate_indices(p: Slp, inputs: Sequence[int] = (), mode: LazyMode = LazyMode.PLAIN) -> Iterator[PobitIndex]:
    """Each name in a superset of the output's interesting positions, exactly once, in increasing order."""
    evaluator = _evaluator(p, inputs, mode)
    yield from evaluator.iter_candidates(p.n)


def position_oracle(
    p: Slp,
    index: PobitIndex,
    inputs: Sequence[int] = (),
    omega: Optional[int] = None,
    budget: Optional[int] = None,
) -> int:
    """Concrete position of ``index``; only for programs whose shift amounts fit the budget."""
    aln = omega is not None
    variables = formal_vars(p, aln)
    if len(index.exponents) != len(variables):
        raise ArityMismatch(f"index names {len(index.exponents)} variables, program has {len(variables)}")
    operands = [var.operand_step for var in variables if not var.is_aln]
    values = [0, 1]
    if operands:
        # shift amounts never depend on X, so a zero placeholder is enough
        concrete = ([0] if aln else []) + list(inputs)
        values = eval_slp_direct(p.prefix(max(operands)), concrete, budget or DEFAULT_BUDGETS.direct_bits).values
    position = index.offset
    for e, var in zip(index.exponents, variables):
        amount = omega if var.is_aln else values[var.operand_step]
        position += e * var.direction * amount
    return position


def compare_indices(
    p: Slp, i1: PobitIndex, i2: PobitIndex, inputs: Sequence[int] = (), mode: LazyMode = LazyMode.PLAIN,
) -> Ordering:
    evaluator = _evaluator(p, inputs, mode)
    evaluator.check_index(i1)
    evaluator.check_index(i2)
    return evaluator.compare(i1, i2)


def next_index(
    p: Slp,
    current: Optional[PobitIndex] = None,
    t: Optional[int] = None,
    inputs: Sequence[int] = (),
    mode: LazyMode = LazyMode.PLAIN,
) -> Optional[PobitIndex]:
    """The smallest enumerated index strictly above ``current``; None when exhausted."""
    evaluator = _evaluator(p, inputs, mode)
    if current is not None:
        evaluator.check_index(current)
    return evaluator.next_candidate(p.n if t is None else t, current)


def eval_bit(
    p: Slp, t: int, index: PobitIndex, inputs: Sequence[int] = (), mode: LazyMode = LazyMode.PLAIN,
) -> int:
    if not 0 <= t <= p.n:
        raise ArityMismatch(f"v{t} is not a value of this program")
    evaluator = _evaluator(p, inputs, mode)
    evaluator.check_index(index)
    return evaluator.bit(t, index)


def nonzero_lazy(p: Slp, inputs: Sequence[int] = (), mode: LazyMode = LazyMode.PLAIN) -> bool:
    result = _evaluator(p, inputs, mode).nonzero()
    logger.debug("lazy %s evaluation of %d steps: %s", LazyMode(mode).value, len(p.steps), result)
    return result


def space_report(evaluator: Optional[LazyEvaluator] = None) -> SpaceReport:
    """Peak space of ``evaluator`` (default: the most recent module-level evaluation)."""
    evaluator = evaluator or _last
    if evaluator is None:
        return SpaceReport()
    report = evaluator.meter.report
    return SpaceReport(report.max_scalar_bits, report.max_live_indices)


def aln_omegas(p: Slp, count: int = 3) -> List[int]:
    """Doubling omegas starting where the ALN answer is guaranteed to have settled."""
    s = max(1, len(p.steps))
    first = 1 << (s * s)
    return [first << k for k in range(count)]
