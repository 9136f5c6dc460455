"""Single-integer certificates for tableau acceptance, one layout per operation set.

A certificate alpha packs the tableau witnesses so that a verifier restricted to
one of {shl, shr, div, mul} (plus inc and the Boolean operations) can take them
apart again and run the tableau checks:

    shl  low block 1^u 0..., then w2, w4, w5 at distance W = n*m; the length
         n = 2^m + 1 follows from m, so w3 is derived, not stored
    shr  elements [u-1, 2^u-1, 0, w1..w5, X1, W1, X2, W2, ...] of width u = 2^k,
         every left shift of the checks replaced by a claimed result X
         (with W = 2^Z - 1 for its amount Z)
    div  elements [2^u-1, 0, Z1, w2, Z3, w4, w5, X1, X2, ...], Z = 2^w - 1
    mul  elements [2^u-1, 0, Z1, w2, Z3, w4, w5]; values are never shifted down,
         they carry a known power of 2^u instead

Each backend counts every primitive it performs against the scheme's gate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .configs import DEFAULT_BUDGETS, Budgets
from .errors import (
    BudgetExceeded,
    GenerationFailed,
    LazyRamError,
    NotAccepting,
    SchemeConstraint,
    UnsupportedOp,
    WitnessRejected,
)
from .numerics import BOOLEAN_OPS, PrimOp, eval_primitive
from .ram import OpSetGate
from .tableau.arith import Amount, Arithmetic, DirectArithmetic, RecordingArithmetic
from .tableau.vectors import encode_vector
from .tableau.verify import TableauCircuit, Verdict, rejection_reason, run_checks, step_fragment
from .tableau.witness import TableauWitness, build_tableau, make_witnesses, witnesses_for
from .tm import ACCEPT, TmSpec

logger = logging.getLogger(__name__)


class NramScheme(str, Enum):
    SHL = "shl"
    SHR = "shr"
    DIV = "div"
    MUL = "mul"

    @property
    def operation(self) -> PrimOp:
        return PrimOp(self.value)

    @property
    def gate(self) -> OpSetGate:
        return OpSetGate(frozenset({self.operation, PrimOp.INC}) | BOOLEAN_OPS)

    @property
    def shr_free(self) -> bool:
        """Whether the verifier runs the step rewritten without right shifts."""
        return self in (NramScheme.SHL, NramScheme.MUL)


@dataclass
class AlphaPack:
    scheme: NramScheme
    alpha: int
    u: int
    witness: TableauWitness
    advice: List[int] = field(default_factory=list)


@dataclass
class NramVerdict(Verdict):
    scheme: Optional[NramScheme] = None
    operations: int = 0


def _require(condition: bool, reason: str):
    if not condition:
        raise WitnessRejected(reason)


class _Gated:
    """Integer primitives counted against the backend's gate and capped in size."""

    bit_cap: int

    def op(self, op: PrimOp, a: int, b: Optional[int] = None) -> int:
        self.use(op)
        value = eval_primitive(op, a, b)
        if value.bit_length() > self.bit_cap:
            raise BudgetExceeded(f"intermediate of {value.bit_length()} bits (cap {self.bit_cap})")
        return value

    def exhausted(self) -> bool:
        return True


class ShlArithmetic(_Gated, DirectArithmetic):
    """Components are shifted to a common scale 2^(3W) instead of down to bit 0."""

    scheme = NramScheme.SHL

    def __init__(self, alpha: int, strict: bool = False, bit_cap: Optional[int] = None):
        super().__init__(0, 0, gate=self.scheme.gate, strict=strict, bit_cap=bit_cap)
        self.alpha = alpha

    def unpack(self) -> Tuple[int, int, int]:
        alpha = self.alpha
        w1 = self.op(PrimOp.CLEAR, self.op(PrimOp.INC, alpha), alpha)
        m = self.op(PrimOp.OR, w1, self.shl_step(w1, 1))
        w3 = self.shl_step(m, m)
        W = self.op(PrimOp.OR, w3, m)
        tops = [self.shl_step(1, W)]
        for _ in range(3):
            tops.append(self.shl_step(tops[-1], W))
        below = [self.op(PrimOp.NOT, top) for top in tops]
        _require(self.op(PrimOp.AND, alpha, below[0]) == self.op(PrimOp.NOT, w1), "layout")
        _require(self.op(PrimOp.CLEAR, alpha, below[3]) == 0, "trailing")
        blocks = [self.op(PrimOp.AND, alpha, self.op(PrimOp.CLEAR, below[i + 1], below[i])) for i in range(3)]
        w2 = self.shl_step(self.shl_step(blocks[0], W), W)
        w4 = self.shl_step(blocks[1], W)
        w5 = blocks[2]
        self.amounts = {"w1": w1, "w3": w3}
        self.one = tops[2]
        self.one_shift = self.one.bit_length() - 1
        return w2, w4, w5

    def describe(self, w2: int, w4: int, w5: int) -> Dict[str, int]:
        shift = self.one_shift
        return {
            "u": self.amounts["w1"].bit_length() - 1,
            "w1": self.amounts["w1"],
            "w2": w2 >> shift,
            "w3": self.amounts["w3"],
            "w4": w4 >> shift,
            "w5": w5 >> shift,
        }


class _StreamArithmetic(_Gated, Arithmetic):
    """Plain integers, witnesses and shift claims read element by element from alpha."""

    scheme: NramScheme

    def __init__(self, alpha: int, strict: bool = False, bit_cap: Optional[int] = None):
        super().__init__(self.scheme.gate, strict)
        self.alpha = alpha
        self.bit_cap = DEFAULT_BUDGETS.witness_bits if bit_cap is None else bit_cap
        self.cur = alpha
        self.mask = 0
        self.read = 0

    def apply(self, op: PrimOp, a, b=None):
        return self.op(op, a, b)

    def const(self, value: int) -> int:
        return value

    def next_element(self) -> int:
        element = self.op(PrimOp.AND, self.cur, self.mask)
        self.cur = self._advance(self.cur)
        self.read += 1
        return element

    def _advance(self, cur: int) -> int:
        raise NotImplementedError

    def exhausted(self) -> bool:
        return self.cur == 0


class ShrAdviceArithmetic(_StreamArithmetic):
    scheme = NramScheme.SHR

    def _advance(self, cur: int) -> int:
        return self.op(PrimOp.SHR, cur, self.u)

    def unpack(self) -> Tuple[int, int, int]:
        alpha = self.alpha
        u = self.op(PrimOp.CLEAR, self.op(PrimOp.INC, alpha), alpha)
        if u > self.bit_cap:
            raise BudgetExceeded(f"element width {u} exceeds {self.bit_cap}")
        rest = self.op(PrimOp.SHR, alpha, u)
        mask = self.op(PrimOp.NOT, self.op(PrimOp.CLEAR, self.op(PrimOp.INC, rest), rest))
        _require(self.op(PrimOp.SHR, self.op(PrimOp.INC, mask), u) == 1, "layout")
        _require(self.op(PrimOp.AND, alpha, mask) == self.op(PrimOp.NOT, u), "layout")
        self.u, self.mask = u, mask
        self.cur = self.op(PrimOp.SHR, rest, u)
        _require(self.next_element() == 0, "layout")
        w1, w2, w3, w4, w5 = (self.next_element() for _ in range(5))
        if w1 < 1 or w1 > self.bit_cap or w3 > self.bit_cap:
            raise BudgetExceeded("field or tableau width out of range")
        self.amounts = {"w1": w1, "w3": w3}
        return w2, w4, w5

    def shl_step(self, x: int, amount: Amount) -> int:
        z = self.amounts[amount] if isinstance(amount, str) else amount
        claimed, low = self.next_element(), self.next_element()
        bound = self.op(PrimOp.INC, low)
        _require(self.op(PrimOp.AND, bound, low) == 0, "shift_advice")
        _require(self.op(PrimOp.SHR, bound, z) == 1, "shift_advice")
        _require(self.op(PrimOp.SHR, claimed, z) == x, "shift_advice")
        _require(self.op(PrimOp.AND, claimed, low) == 0, "shift_advice")
        return claimed

    def shr_one(self, x: int) -> int:
        return self.op(PrimOp.SHR, x, 1)

    def describe(self, w2: int, w4: int, w5: int) -> Dict[str, int]:
        return {"u": self.u, "w1": self.amounts["w1"], "w2": w2, "w3": self.amounts["w3"], "w4": w4, "w5": w5}


class _DivLayout:
    """Shared unpacking of [2^u-1, 0, Z1, w2, Z3, w4, w5, ...]."""

    def _split_header(self, alpha: int) -> int:
        D = self.op(PrimOp.CLEAR, self.op(PrimOp.INC, alpha), alpha)
        self.D, self.mask = D, self.op(PrimOp.NOT, D)
        return D

    def _check_width(self, z: int):
        _require(self.op(PrimOp.AND, self.op(PrimOp.INC, z), z) == 0, "shift_width")


class DivAdviceArithmetic(_DivLayout, _StreamArithmetic):
    scheme = NramScheme.DIV

    def _advance(self, cur: int) -> int:
        return self.op(PrimOp.DIV, self.op(PrimOp.CLEAR, cur, self.mask), self.D)

    def unpack(self) -> Tuple[int, int, int]:
        self._split_header(self.alpha)
        self.next_element()
        _require(self.next_element() == 0, "layout")
        z1, w2, z3, w4, w5 = (self.next_element() for _ in range(5))
        self._check_width(z1)
        self._check_width(z3)
        self.widths = {"w1": z1, "w3": z3, 1: 1}
        return w2, w4, w5

    def shl_step(self, x: int, amount: Amount) -> int:
        if amount not in self.widths:
            raise UnsupportedOp(f"no shift certificate for amount {amount!r}")
        z = self.widths[amount]
        claimed = self.next_element()
        _require(self.op(PrimOp.AND, claimed, z) == 0, "shift_advice")
        _require(self.op(PrimOp.DIV, claimed, self.op(PrimOp.INC, z)) == x, "shift_advice")
        return claimed

    def shr_one(self, x: int) -> int:
        return self.op(PrimOp.DIV, self.op(PrimOp.CLEAR, x, 1), self.op(PrimOp.INC, 1))

    def describe(self, w2: int, w4: int, w5: int) -> Dict[str, int]:
        z1, z3 = self.widths["w1"], self.widths["w3"]
        return {
            "u": self.D.bit_length() - 1,
            "w1": z1.bit_length(),
            "w2": w2,
            "w3": z3.bit_length(),
            "w4": w4,
            "w5": w5,
        }


@dataclass(frozen=True)
class Scaled:
    """The integer value / 2^(u*k), kept without ever dividing."""
    value: int
    k: int = 0


class MulArithmetic(_DivLayout, _Gated, Arithmetic):
    scheme = NramScheme.MUL
    one = Scaled(1)
    zero = Scaled(0)

    def __init__(self, alpha: int, strict: bool = False, bit_cap: Optional[int] = None):
        super().__init__(self.scheme.gate, strict)
        self.alpha = alpha
        self.bit_cap = DEFAULT_BUDGETS.witness_bits if bit_cap is None else bit_cap
        self._powers: List[int] = [1]

    def power(self, k: int) -> int:
        while len(self._powers) <= k:
            self._powers.append(self.op(PrimOp.MUL, self._powers[-1], self.D))
        return self._powers[k]

    def unpack(self) -> Tuple[Scaled, Scaled, Scaled]:
        alpha = self.alpha
        self._split_header(alpha)
        parts = [
            Scaled(self.op(PrimOp.AND, self.op(PrimOp.MUL, self.mask, self.power(j)), alpha), j)
            for j in range(7)
        ]
        _require(parts[1].value == 0, "layout")
        _require(self.op(PrimOp.CLEAR, alpha, self.op(PrimOp.NOT, self.power(7))) == 0, "trailing")
        z1, w2, z3, w4, w5 = parts[2:]
        self.steps = {1: Scaled(self.op(PrimOp.INC, 1))}
        for name, z in (("w1", z1), ("w3", z3)):
            filled = self.op(PrimOp.OR, z.value, self.op(PrimOp.NOT, self.power(z.k)))
            self._check_width(filled)
            self.steps[name] = Scaled(self.op(PrimOp.INC, filled), z.k)
        return w2, w4, w5

    def _align(self, a: Scaled, b: Scaled) -> Tuple[int, int, int]:
        if a.k < b.k:
            return self.op(PrimOp.MUL, a.value, self.power(b.k - a.k)), b.value, b.k
        if b.k < a.k:
            return a.value, self.op(PrimOp.MUL, b.value, self.power(a.k - b.k)), a.k
        return a.value, b.value, a.k

    def apply(self, op: PrimOp, a: Scaled, b: Optional[Scaled] = None) -> Scaled:
        if op is PrimOp.NOT:
            # ones below the scale are not part of the value
            flipped = self.op(PrimOp.NOT, a.value)
            return Scaled(self.op(PrimOp.CLEAR, flipped, self.op(PrimOp.NOT, self.power(a.k))), a.k)
        if op not in BOOLEAN_OPS:
            raise UnsupportedOp(f"'{op.value}' on scaled values")
        x, y, k = self._align(a, b)
        return Scaled(self.op(op, x, y), k)

    def shl_step(self, x: Scaled, amount: Amount) -> Scaled:
        factor = self.steps[amount]
        return Scaled(self.op(PrimOp.MUL, x.value, factor.value), x.k + factor.k)

    def const(self, value: int) -> Scaled:
        return Scaled(value)

    def eq(self, x: Scaled, y: Scaled) -> bool:
        a, b, _ = self._align(x, y)
        return a == b

    def describe(self, w2: Scaled, w4: Scaled, w5: Scaled) -> Dict[str, int]:
        unscale = lambda v: v.value // self.power(v.k)
        return {
            "u": self.D.bit_length() - 1,
            "w1": (self.steps["w1"].value // self.power(self.steps["w1"].k)).bit_length() - 1,
            "w2": unscale(w2),
            "w3": (self.steps["w3"].value // self.power(self.steps["w3"].k)).bit_length() - 1,
            "w4": unscale(w4),
            "w5": unscale(w5),
        }


_BACKENDS = {
    NramScheme.SHL: ShlArithmetic,
    NramScheme.SHR: ShrAdviceArithmetic,
    NramScheme.DIV: DivAdviceArithmetic,
    NramScheme.MUL: MulArithmetic,
}


def _record_shifts(
    spec: TmSpec, input: int, w: TableauWitness, budgets: Budgets, final_state: int = ACCEPT
) -> List[Tuple[int, int]]:
    """Results of every left shift the checks perform on genuine witnesses, in order."""
    recorder = RecordingArithmetic(w.w1, w.w3, bit_cap=budgets.witness_bits)
    circuit = TableauCircuit(recorder, spec, input, w.w2, w.w4, w.w5, step_fragment(spec, shr_free=False))
    verdict = run_checks(circuit, final_state)
    if not verdict:
        raise GenerationFailed(f"genuine witnesses fail check '{verdict.reason}'")
    return recorder.shifts


def _pack_shl(spec: TmSpec, input: int, s: int, budgets: Budgets, allow_rejecting: bool) -> AlphaPack:
    w = spec.width(s)
    if w & (w - 1):
        raise SchemeConstraint(f"field width s + c - 1 = {w} is not a power of two")
    m = 3 * w
    n = (1 << m) + 1
    W = n * m
    if 4 * W > budgets.witness_bits:
        raise BudgetExceeded(f"shl certificate needs {4 * W} bits (cap {budgets.witness_bits})")
    tableau = build_tableau(spec, input, s, budgets)
    if tableau.final_state != ACCEPT and not allow_rejecting:
        raise NotAccepting(f"run on {s} cell(s) ends in state {tableau.final_state}")
    witness = witnesses_for(tableau.padded(n))
    alpha = (w - 1) | witness.w2 << W | witness.w4 << 2 * W | witness.w5 << 3 * W
    return AlphaPack(NramScheme.SHL, alpha, w.bit_length() - 1, witness)


def _width(elements: List[int]) -> int:
    return max(1, max(e.bit_length() for e in elements))


def pack_alpha(
    scheme,
    spec: TmSpec,
    input: int,
    s: int,
    budgets: Optional[Budgets] = None,
    allow_rejecting: bool = False,
) -> AlphaPack:
    """Pack the witnesses of the bounded run into one certificate.

    With ``allow_rejecting`` a run that halts outside the accepting state is packed
    too; verify_nram then rejects it at the final state check.
    """
    scheme = NramScheme(scheme)
    budgets = budgets or DEFAULT_BUDGETS
    if scheme is NramScheme.SHL:
        pack = _pack_shl(spec, input, s, budgets, allow_rejecting)
    else:
        if allow_rejecting:
            tableau = build_tableau(spec, input, s, budgets)
            w, final_state = witnesses_for(tableau), tableau.final_state
        else:
            w, final_state = make_witnesses(spec, input, s, budgets), ACCEPT
        advice: List[int] = []
        if scheme is NramScheme.SHR:
            for result, amount in _record_shifts(spec, input, w, budgets, final_state):
                advice += [result, (1 << amount) - 1]
            body = [0, w.w1, w.w2, w.w3, w.w4, w.w5] + advice
            u = 1 << (_width(body) - 1).bit_length()
            elements = [u - 1, (1 << u) - 1] + body
        else:
            if scheme is NramScheme.DIV:
                advice = [result for result, _ in _record_shifts(spec, input, w, budgets, final_state)]
            body = [0, (1 << w.w1) - 1, w.w2, (1 << w.w3) - 1, w.w4, w.w5] + advice
            u = _width(body)
            elements = [(1 << u) - 1] + body
        if len(elements) * u > budgets.witness_bits:
            raise BudgetExceeded(f"{scheme.value} certificate needs {len(elements) * u} bits")
        pack = AlphaPack(scheme, encode_vector(elements, u), u, w, advice)
    logger.debug("packed %s certificate of %d bits", scheme.value, pack.alpha.bit_length())
    return pack


def verify_nram(
    scheme,
    alpha: int,
    spec: TmSpec,
    input: int,
    budgets: Optional[Budgets] = None,
    strict: bool = False,
) -> NramVerdict:
    """Accept iff alpha certifies an accepting tableau; never raises on junk certificates."""
    scheme = NramScheme(scheme)
    budgets = budgets or DEFAULT_BUDGETS
    if alpha < 0 or alpha.bit_length() > budgets.witness_bits:
        return NramVerdict(False, "too_large", scheme=scheme)
    backend = _BACKENDS[scheme](alpha, strict=strict, bit_cap=budgets.witness_bits)
    try:
        w2, w4, w5 = backend.unpack()
    except LazyRamError as e:
        logger.debug("%s certificate rejected while unpacking: %s", scheme.value, e)
        return NramVerdict(False, rejection_reason(e), backend.violations, scheme, backend.operations)
    circuit = TableauCircuit(backend, spec, input, w2, w4, w5, step_fragment(spec, scheme.shr_free))
    verdict = run_checks(circuit, ACCEPT)
    reason = verdict.reason
    if verdict.accepted and not backend.exhausted():
        reason = "trailing"
    accepted = reason == "accepted"
    logger.debug("%s certificate: %s (%s), %d operation(s)", scheme.value, accepted, reason, backend.operations)
    return NramVerdict(accepted, reason, backend.violations, scheme, backend.operations)


def unpack_alpha(scheme, alpha: int, budgets: Optional[Budgets] = None) -> Dict[str, int]:
    """The witnesses a verifier reads out of alpha, back at bit 0."""
    scheme = NramScheme(scheme)
    budgets = budgets or DEFAULT_BUDGETS
    backend = _BACKENDS[scheme](alpha, bit_cap=budgets.witness_bits)
    return backend.describe(*backend.unpack())
