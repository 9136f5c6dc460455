"""Check many candidate tableaus at once and decide acceptance by tableau search.

Candidates sit side by side in slots of T bits. Every constant of the verifier
becomes the vector O^K of that constant at width T, so one pass of the circuit
checks all of them. Each slot is wide enough that nothing a check builds ever
reaches the slot above.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..configs import DEFAULT_BUDGETS, Budgets
from ..errors import BudgetExceeded, InputTooWide, IterationBudgetExhausted, StepBudgetExhausted
from ..numerics import PrimOp
from ..ram import OpSetGate, el_bound
from ..tm import ACCEPT, HALTING_STATES, REJECT, TmSpec
from .arith import VectorArithmetic
from .vectors import encode_vector, make_O, make_U
from .verify import StepFragment, TableauCircuit, step_fragment
from .witness import build_tableau

logger = logging.getLogger(__name__)


class CandidateSource(str, Enum):
    EXPLICIT = "explicit"
    CORRUPTIONS = "corruptions"
    FROM_RUN = "from-run"
    EXHAUSTIVE = "exhaustive"


@dataclass
class CandidatePack:
    T: int
    K: int
    n: int
    packed: int
    candidates: Optional[List[int]] = None  # None when the pack is U^T

    def candidate(self, i: int) -> int:
        if self.candidates is not None:
            return self.candidates[i]
        return (self.packed >> (self.T * i)) & ((1 << self.T) - 1)


@dataclass
class SimulationReport:
    s: int
    n: int
    T: int
    K: int
    base: int = 0
    flags: Dict[int, int] = field(default_factory=dict)  # halting state -> flag vector

    @property
    def res(self) -> int:
        return self.flags.get(ACCEPT, 0)

    @property
    def halting_states(self) -> List[int]:
        """Halting states some correct candidate ends in."""
        return [h for h in HALTING_STATES if self.flags.get(h, 0)]

    @property
    def accepted(self) -> bool:
        return ACCEPT in self.halting_states

    def slot_flags(self, state: Optional[int] = ACCEPT) -> List[int]:
        vector = self.base if state is None else self.flags.get(state, 0)
        return [(vector >> (self.T * i)) & 1 for i in range(self.K)]


def slot_width(spec: TmSpec, s: int, n: int, scale_shift: int) -> int:
    m = 3 * spec.width(s)
    return n * m + m + scale_shift + 1


def candidate_pack(
    spec: TmSpec,
    input: int,
    s: int,
    scale_shift: int,
    source: CandidateSource = CandidateSource.FROM_RUN,
    candidates: Optional[Sequence[int]] = None,
    n: Optional[int] = None,
    count: int = 16,
    seed: int = 0,
    budgets: Optional[Budgets] = None,
) -> CandidatePack:
    budgets = budgets or DEFAULT_BUDGETS
    source = CandidateSource(source)
    if source in (CandidateSource.FROM_RUN, CandidateSource.CORRUPTIONS):
        try:
            tableau = build_tableau(spec, input, s, budgets)
        except (StepBudgetExhausted, InputTooWide) as e:
            logger.debug("no genuine tableau on %d cell(s): %s", s, e)
            return CandidatePack(slot_width(spec, s, 1, scale_shift), 0, 1, 0, [])
        n = tableau.n
        candidates = [tableau.value]
        if source is CandidateSource.CORRUPTIONS:
            rng = np.random.default_rng(seed)
            bits = n * tableau.m
            flips = rng.choice(bits, size=min(count, bits), replace=False)
            candidates += [tableau.value ^ (1 << int(p)) for p in flips]
    elif n is None or n < 1:
        raise ValueError(f"'{source.value}' candidates need a tableau length n >= 1")

    T = slot_width(spec, s, n, scale_shift)
    if source is CandidateSource.EXHAUSTIVE:
        if T > budgets.exhaustive_bits:
            raise BudgetExceeded(f"exhaustive search needs 2^{T} candidates (cap 2^{budgets.exhaustive_bits})")
        return CandidatePack(T, 1 << T, n, make_U(T, budgets.witness_bits))
    candidates = list(candidates or [])
    if len(candidates) * T > budgets.witness_bits:
        raise BudgetExceeded(f"{len(candidates)} candidates of {T} bits exceed {budgets.witness_bits}")
    return CandidatePack(T, len(candidates), n, encode_vector(candidates, T), candidates)


def simulate(
    spec: TmSpec,
    input: int,
    s: int,
    source: CandidateSource = CandidateSource.FROM_RUN,
    candidates: Optional[Sequence[int]] = None,
    n: Optional[int] = None,
    count: int = 16,
    seed: int = 0,
    budgets: Optional[Budgets] = None,
    fragment: Optional[StepFragment] = None,
) -> SimulationReport:
    budgets = budgets or DEFAULT_BUDGETS
    fragment = fragment or step_fragment(spec)
    pack = candidate_pack(spec, input, s, fragment.scale_shift, source, candidates, n, count, seed, budgets)
    report = SimulationReport(s, pack.n, pack.T, pack.K)
    if not pack.K:
        report.flags = {h: 0 for h in HALTING_STATES}
        return report

    w = spec.width(s)
    m = 3 * w
    ar = VectorArithmetic(w, (pack.n - 1) * m, pack.T, pack.K, bit_cap=budgets.witness_bits)
    w4 = ar.const(make_O((1 << w) - 1, m, pack.n))
    w5 = ar.const(make_O(1, m, pack.n))
    circuit = TableauCircuit(ar, spec, input, pack.packed, w4, w5, fragment)
    base = ar.all_flags()
    for check in circuit.checks():
        base = ar.apply(PrimOp.AND, base, ar.eq(check.lhs, check.rhs))
    report.base = base
    for h in HALTING_STATES:
        check = circuit.final_state_check(h)
        report.flags[h] = ar.apply(PrimOp.AND, base, ar.eq(check.lhs, check.rhs))
    logger.debug("simulated %d candidate(s) on %d cell(s): halting states %s", pack.K, s, report.halting_states)
    return report


@dataclass
class AlgorithmResult:
    verdict: Optional[int]  # ACCEPT, REJECT or None when undecided
    s: int
    iterations: int
    reports: List[SimulationReport] = field(default_factory=list)
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT


def default_el(input: int, budgets: Optional[Budgets] = None) -> Callable[[int], int]:
    budgets = budgets or DEFAULT_BUDGETS
    gate = OpSetGate(frozenset({PrimOp.ADD}))
    bits = max(1, input.bit_length())
    return lambda n: el_bound(gate, n, bits, budgets.el_bit_cap)


def algorithm1(
    spec: TmSpec,
    input: int,
    el: Optional[Callable[[int], int]] = None,
    source: CandidateSource = CandidateSource.FROM_RUN,
    iterations: Optional[int] = None,
    detect_reject: bool = False,
    budgets: Optional[Budgets] = None,
    **source_options,
) -> AlgorithmResult:
    """Double n until the tape bound el(n) admits an accepting tableau.

    A machine that never accepts keeps the loop going; the iteration budget ends it.
    """
    budgets = budgets or DEFAULT_BUDGETS
    el = el or default_el(input, budgets)
    iterations = budgets.iterations if iterations is None else iterations
    fragment = step_fragment(spec)
    result = AlgorithmResult(None, 0, 0)
    n = 1
    for round_ in range(1, iterations + 1):
        s = el(n)
        report = simulate(spec, input, s, source, budgets=budgets, fragment=fragment, **source_options)
        result.reports.append(report)
        result.s, result.iterations = s, round_
        logger.debug("round %d: s=%d, halting states %s", round_, s, report.halting_states)
        if report.accepted:
            result.verdict, result.reason = ACCEPT, "accepted"
            return result
        if detect_reject and REJECT in report.halting_states:
            result.verdict, result.reason = REJECT, "rejected"
            return result
        n *= 2
    raise IterationBudgetExhausted(f"no verdict after {iterations} round(s), last s={result.s}")


def algorithm2(
    spec: TmSpec,
    input: int,
    aln: int,
    source: CandidateSource = CandidateSource.FROM_RUN,
    budgets: Optional[Budgets] = None,
    **source_options,
) -> AlgorithmResult:
    """One simulation with the tape bound taken from the large number ``aln``."""
    if aln < 1:
        return AlgorithmResult(REJECT, aln, 0, reason="no_tape")
    if input >> aln:
        return AlgorithmResult(REJECT, aln, 0, reason="input_too_wide")
    report = simulate(spec, input, aln, source, budgets=budgets, **source_options)
    if report.accepted:
        return AlgorithmResult(ACCEPT, aln, 1, [report], "accepted")
    if report.halting_states:
        reason = "halted_in_" + ",".join(str(h) for h in report.halting_states)
    else:
        reason = "no_tableau"
    return AlgorithmResult(REJECT, aln, 1, [report], reason)
