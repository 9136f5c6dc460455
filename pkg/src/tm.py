"""Binary single-tape Turing machines: text format, reference interpreter and the
packed instantaneous-description codec.

Cell i of the tape is bit i of an integer. States 1, 2 and 3 are reserved halting
states (accept, reject, tape exceeded); once in one of them the head drifts back
to cell 0 and the configuration stops changing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .configs import DEFAULT_BUDGETS
from .errors import InputTooWide, MalformedDescription, MissingTransition, ParseError, StepBudgetExhausted

logger = logging.getLogger(__name__)

ACCEPT, REJECT, TAPE_EXCEEDED = 1, 2, 3
HALTING_STATES = (ACCEPT, REJECT, TAPE_EXCEEDED)
MIN_STATES = 4


class Move(str, Enum):
    L = "L"
    R = "R"
    S = "S"


@dataclass(frozen=True)
class Transition:
    state: int
    bit: int
    move: Move


@dataclass
class TmConfig:
    tape: int = 0
    head: int = 0
    state: int = 0
    s: Optional[int] = None

    def read(self) -> int:
        return (self.tape >> self.head) & 1


@dataclass
class TmSpec:
    k: int
    transitions: Dict[Tuple[int, int], Transition] = field(default_factory=dict)
    start: int = 0

    @property
    def c(self) -> int:
        """Bits needed to hold a state number."""
        return (self.k - 1).bit_length()

    def delta(self, state: int, bit: int) -> Transition:
        if state in HALTING_STATES:
            return Transition(state, bit, Move.L)
        try:
            return self.transitions[(state, bit)]
        except KeyError:
            raise MissingTransition(f"no transition for state {state} reading {bit}")

    @staticmethod
    def halting_state(cfg: TmConfig) -> Optional[int]:
        return cfg.state if cfg.state in HALTING_STATES else None

    @staticmethod
    def is_stable(cfg: TmConfig) -> bool:
        return cfg.state in HALTING_STATES and cfg.head == 0

    def width(self, s: int) -> int:
        return s + self.c - 1


@dataclass
class TmRun:
    config: TmConfig
    trace: List[int]
    steps: int
    halted: bool

    @property
    def verdict(self) -> Optional[int]:
        return TmSpec.halting_state(self.config) if self.halted else None


def parse_tm(text) -> TmSpec:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    k, start = None, 0
    transitions: Dict[Tuple[int, int], Transition] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] in ("states", "start"):
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError(f"bad header '{line}'", lineno)
            if parts[0] == "states":
                k = int(parts[1])
            else:
                start = int(parts[1])
            continue
        if len(parts) != 6 or parts[2] != "->":
            raise ParseError(f"expected 'q b -> q' b' M', got '{line}'", lineno)
        if k is None:
            raise ParseError("'states K' must precede the transitions", lineno)
        try:
            q, b, q2, b2 = int(parts[0]), int(parts[1]), int(parts[3]), int(parts[4])
            move = Move(parts[5].upper())
        except ValueError:
            raise ParseError(f"bad transition '{line}'", lineno)
        if b not in (0, 1) or b2 not in (0, 1):
            raise ParseError("tape symbols are 0 and 1", lineno)
        if not (0 <= q < k and 0 <= q2 < k):
            raise ParseError(f"state out of range 0..{k - 1}", lineno)
        if q in HALTING_STATES:
            raise ParseError(f"state {q} is a reserved halting state", lineno)
        if (q, b) in transitions:
            raise ParseError(f"duplicate transition for ({q}, {b})", lineno)
        transitions[(q, b)] = Transition(q2, b2, move)
    if k is None:
        raise ParseError("missing 'states K' header")
    if k < MIN_STATES:
        raise ParseError(f"a machine needs at least {MIN_STATES} states, got {k}")
    if start != 0:
        raise ParseError("the start state must be 0")
    spec = TmSpec(k, transitions, start)
    for q in range(k):
        if q in HALTING_STATES:
            continue
        for b in (0, 1):
            if (q, b) not in transitions:
                raise MissingTransition(f"no transition for state {q} reading {b}")
    return spec


def dump_tm(spec: TmSpec) -> str:
    lines = [f"states {spec.k}", f"start {spec.start}"]
    for (q, b), tr in sorted(spec.transitions.items()):
        lines.append(f"{q} {b} -> {tr.state} {tr.bit} {tr.move.value}")
    return "\n".join(lines) + "\n"


def step_tm(spec: TmSpec, cfg: TmConfig) -> TmConfig:
    if cfg.state in HALTING_STATES:
        return replace(cfg, head=max(0, cfg.head - 1))
    tr = spec.delta(cfg.state, cfg.read())
    tape = (cfg.tape & ~(1 << cfg.head)) | (tr.bit << cfg.head)
    head, state = cfg.head, tr.state
    if tr.move is Move.L:
        if head == 0:
            state = REJECT
        else:
            head -= 1
    elif tr.move is Move.R:
        if cfg.s is not None and head + 1 >= cfg.s:
            state = TAPE_EXCEEDED
        else:
            head += 1
    return TmConfig(tape, head, state, cfg.s)


def encode_id(cfg: TmConfig, s: int, c: int) -> int:
    w = s + c - 1
    if not 0 <= cfg.head < s or cfg.tape >> s or cfg.state >> c:
        raise MalformedDescription(f"configuration does not fit s={s}, c={c}")
    head_field = 1 << cfg.head
    return cfg.tape + ((cfg.state * head_field) << w) + (head_field << (2 * w))


def decode_id(packed: int, s: int, c: int) -> TmConfig:
    w = s + c - 1
    mask = (1 << w) - 1
    tape, state_field, head_field = packed & mask, (packed >> w) & mask, packed >> (2 * w)
    if tape >> s:
        raise MalformedDescription(f"tape field {tape} is wider than {s} cells")
    if head_field == 0 or head_field & (head_field - 1) or head_field >> s:
        raise MalformedDescription(f"head field {head_field} is not a single cell below {s}")
    head = head_field.bit_length() - 1
    if state_field & (head_field - 1):
        raise MalformedDescription("state field is not aligned with the head")
    state = state_field >> head
    if state >> c:
        raise MalformedDescription(f"state {state} needs more than {c} bits")
    return TmConfig(tape, head, state, s)


def run_tm(
    spec: TmSpec,
    input: int,
    s: Optional[int] = None,
    max_steps: Optional[int] = None,
    strict: bool = False,
) -> TmRun:
    """Iterate ``step_tm`` until the configuration is stable.

    Bounded runs record the packed trace; a stable run's trace ends with the
    configuration repeated once, the step that leaves it unchanged.
    """
    if max_steps is None:
        max_steps = DEFAULT_BUDGETS.max_steps
    if s is not None and (s < 1 or input >> s):
        raise InputTooWide(f"input {input} does not fit on {s} cell(s)")
    cfg = TmConfig(input, 0, spec.start, s)
    trace = [encode_id(cfg, s, spec.c)] if s is not None else []
    steps = 0
    while not spec.is_stable(cfg):
        if steps >= max_steps:
            if strict:
                raise StepBudgetExhausted(f"machine still running after {max_steps} steps")
            return TmRun(cfg, trace, steps, False)
        cfg = step_tm(spec, cfg)
        steps += 1
        if s is not None:
            trace.append(encode_id(cfg, s, spec.c))
    if s is not None:
        trace.append(trace[-1])
    logger.debug("machine halted in state %d after %d steps", cfg.state, steps)
    return TmRun(cfg, trace, steps, True)
