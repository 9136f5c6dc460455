"""Command line entry point.

Exit status: 0 success or accept, 1 reject or false, 2 usage and parse errors,
3 budget errors. ``--format jsonl`` writes one JSON object per result line.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Callable, List, Optional, Sequence

import jsonlines

from .codegen import emit_bounded_step, emit_parallel_runner, emit_step, remove_shr
from .configs import Budgets
from .errors import BudgetError, LazyRamError, NotAccepting, StepBudgetExhausted
from .lazy import LazyMode, PobitIndex, eval_bit, formal_vars, nonzero_lazy, space_report
from .nram import NramScheme, pack_alpha, verify_nram
from .numerics import PrimOp
from .ram import OpSetGate, dump_ram, el_bound, parse_ram, run_aram, run_ram, trace_to_slp
from .slp import LAZY_OPS, dump_slp, eval_slp_direct, gen_random_slp, parse_slp
from .tableau import (
    CandidateSource,
    TableauWitness,
    algorithm1,
    algorithm2,
    eq_vec,
    gt_vec,
    make_O,
    make_U,
    make_witnesses,
    simulate,
    verify_tableau,
)
from .tm import ACCEPT, HALTING_STATES, parse_tm, run_tm
from .utils import format_int, parse_int, read_text, serialize, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class Output:
    def __init__(self, fmt: str = "text", stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout
        self._writer = jsonlines.Writer(self.stream, flush=True) if fmt == "jsonl" else None

    def emit(self, text: str, **record):
        if self._writer is not None:
            self._writer.write(serialize(record))
        else:
            print(text, file=self.stream)


def _int_list(text: Optional[str]) -> List[int]:
    if not text:
        return []
    return [parse_int(item) for item in text.split(",") if item.strip()]


def _budgets(args) -> Budgets:
    return Budgets.load(args.budgets, max_steps=getattr(args, "max_steps", None))


def _verdict_line(accepted: bool, reason: str) -> str:
    return "accept" if accepted else f"reject {reason}"


# slp

def cmd_slp_eval(args, out: Output) -> int:
    p = parse_slp(read_text(args.file))
    budgets = _budgets(args)
    inputs = [parse_int(v) for v in args.input]
    if args.mode == "direct":
        value = eval_slp_direct(p, inputs, budgets.direct_bits).output
        if args.bit is not None:
            bit = (value >> args.bit) & 1
            out.emit(str(bit), bit=bit, position=args.bit)
            return EXIT_OK
        out.emit(format_int(value), value=value, nonzero=value != 0)
        return EXIT_OK
    mode = LazyMode.ALN if args.mode == "aln" else LazyMode.PLAIN
    if args.bit is not None:
        index = PobitIndex.zero(len(formal_vars(p, mode is LazyMode.ALN))).moved(args.bit)
        bit = eval_bit(p, p.n, index, inputs, mode)
        out.emit(str(bit), bit=bit, position=args.bit)
        return EXIT_OK
    nonzero = nonzero_lazy(p, inputs, mode)
    report = space_report()
    out.emit(
        "1" if nonzero else "0",
        nonzero=nonzero,
        max_scalar_bits=report.max_scalar_bits,
        max_live_indices=report.max_live_indices,
    )
    if args.space and out.fmt == "text":
        out.emit(f"space: {report.max_scalar_bits} scalar bits, {report.max_live_indices} live indices")
    return EXIT_OK if nonzero else EXIT_FALSE


def cmd_slp_gen(args, out: Output) -> int:
    ops = [PrimOp.parse(name) for name in args.ops.split(",")] if args.ops else LAZY_OPS
    budgets = _budgets(args)
    p = gen_random_slp(args.length, ops, seed=args.seed, budget=budgets.direct_bits, input_slots=args.inputs,
                       inputs=[0] * args.inputs)
    text = dump_slp(p)
    out.emit(text.rstrip("\n"), program=text, seed=args.seed)
    return EXIT_OK


# ram / aram

def cmd_ram_run(args, out: Output) -> int:
    p = parse_ram(read_text(args.file))
    budgets = _budgets(args)
    gate = OpSetGate.parse(args.gate) if args.gate else None
    run = run_ram(p, parse_int(args.input), gate, budgets.max_steps, value_bits=budgets.value_bits)
    if not run.halted:
        raise StepBudgetExhausted(f"program still running after {budgets.max_steps} steps")
    out.emit(format_int(run.output), output=run.output, steps=run.state.steps,
             max_value_seen=run.state.max_value_seen)
    return EXIT_OK


def cmd_ram_el(args, out: Output) -> int:
    budgets = _budgets(args)
    bound = el_bound(OpSetGate.parse(args.gate), args.steps, args.bits, budgets.el_bit_cap)
    out.emit(format_int(bound), el=bound, bits=bound.bit_length())
    return EXIT_OK


def cmd_ram_trace(args, out: Output) -> int:
    p = parse_ram(read_text(args.file))
    budgets = _budgets(args)
    gate = OpSetGate.parse(args.gate) if args.gate else None
    slp = trace_to_slp(p, parse_int(args.input), gate, budgets.max_steps)
    text = dump_slp(slp)
    out.emit(text.rstrip("\n"), program=text)
    return EXIT_OK


def cmd_aram_run(args, out: Output) -> int:
    p = parse_ram(read_text(args.file))
    budgets = _budgets(args)
    gate = OpSetGate.parse(args.gate) if args.gate else None
    schedule = _int_list(args.schedule) or [1 << (8 << k) for k in range(args.rounds)]
    report = run_aram(p, parse_int(args.input), gate, schedule, budgets.max_steps)
    if report.verdict is None:
        out.emit("undecided", verdict=None, verdicts=report.verdicts)
        return EXIT_FALSE
    out.emit("accept" if report.verdict else "reject", verdict=report.verdict, verdicts=report.verdicts)
    return EXIT_OK if report.verdict else EXIT_FALSE


# tm

def cmd_tm_run(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    budgets = _budgets(args)
    run = run_tm(spec, parse_int(args.input), args.cells, budgets.max_steps, strict=True)
    state = run.config.state
    out.emit(f"halted in state {state} after {run.steps} step(s)", state=state, steps=run.steps,
             trace=run.trace if args.trace else None)
    if args.trace and out.fmt == "text":
        for value in run.trace:
            out.emit(format_int(value))
    return EXIT_OK if state == ACCEPT else EXIT_FALSE


def cmd_tm_compile(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    if args.variant == "parallel":
        program = emit_parallel_runner(spec)
    elif args.variant == "bounded":
        program = emit_bounded_step(spec).program
    else:
        program = emit_step(spec).program
    if args.no_shr:
        program = remove_shr(program).program
    text = dump_ram(program)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    out.emit(text.rstrip("\n") if not args.output else args.output, program=text, commands=len(program))
    return EXIT_OK


# tableau

def cmd_tableau_make(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    witness = make_witnesses(spec, parse_int(args.input), args.cells, _budgets(args))
    text = witness.dumps()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    out.emit(text.rstrip("\n") if not args.output else args.output, **witness.__dict__)
    return EXIT_OK


def cmd_tableau_verify(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    witness = TableauWitness.loads(read_text(args.witness))
    verdict = verify_tableau(spec, parse_int(args.input), witness, args.final_state, _budgets(args))
    out.emit(_verdict_line(verdict.accepted, verdict.reason), accepted=verdict.accepted, reason=verdict.reason)
    return EXIT_OK if verdict.accepted else EXIT_FALSE


def cmd_tableau_simulate(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    report = simulate(
        spec,
        parse_int(args.input),
        args.cells,
        CandidateSource(args.source),
        candidates=_int_list(args.candidates),
        n=args.length,
        count=args.count,
        seed=args.seed,
        budgets=_budgets(args),
    )
    states = ",".join(str(h) for h in report.halting_states) or "none"
    out.emit(
        f"halting states: {states}; res = {format_int(report.res)}",
        halting_states=report.halting_states,
        res=report.res,
        K=report.K,
        T=report.T,
        flags={h: report.slot_flags(h) for h in HALTING_STATES},
    )
    return EXIT_OK if report.accepted else EXIT_FALSE


def _algorithm_output(result, out: Output) -> int:
    word = {ACCEPT: "accept"}.get(result.verdict, "reject")
    out.emit(f"{word} (s={result.s}, {result.iterations} round(s))", verdict=word, s=result.s,
             iterations=result.iterations, reason=result.reason)
    return EXIT_OK if result.accepted else EXIT_FALSE


def cmd_tableau_run1(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    el: Optional[Callable[[int], int]] = None
    if args.el_constant is not None:
        el = lambda n, s=args.el_constant: s
    result = algorithm1(spec, parse_int(args.input), el, CandidateSource(args.source), args.iterations,
                        args.detect_reject, _budgets(args))
    return _algorithm_output(result, out)


def cmd_tableau_run2(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    result = algorithm2(spec, parse_int(args.input), parse_int(args.aln), CandidateSource(args.source),
                        _budgets(args))
    return _algorithm_output(result, out)


# nram

def cmd_nram_pack(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    pack = pack_alpha(args.opset, spec, parse_int(args.input), args.cells, _budgets(args),
                      allow_rejecting=args.allow_rejecting)
    text = hex(pack.alpha)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    out.emit(text if not args.output else args.output, alpha=text, u=pack.u, bits=pack.alpha.bit_length())
    return EXIT_OK


def cmd_nram_verify(args, out: Output) -> int:
    spec = parse_tm(read_text(args.file))
    alpha = parse_int(read_text(args.alpha_file) if args.alpha_file else args.alpha)
    verdict = verify_nram(args.opset, alpha, spec, parse_int(args.input), _budgets(args), strict=args.strict)
    out.emit(_verdict_line(verdict.accepted, verdict.reason), accepted=verdict.accepted, reason=verdict.reason,
             violations=verdict.violations, operations=verdict.operations)
    return EXIT_OK if verdict.accepted else EXIT_FALSE


# vec

def cmd_vec(args, out: Output) -> int:
    values = [parse_int(v) for v in args.values]
    expected = {"O": 3, "U": 1, "gt": 4, "eq": 4}[args.kind]
    if len(values) != expected:
        raise argparse.ArgumentTypeError(f"'vec {args.kind}' takes {expected} number(s)")
    if args.kind == "O":
        result = make_O(*values)
    elif args.kind == "U":
        result = make_U(values[0], _budgets(args).witness_bits)
    elif args.kind == "gt":
        result = gt_vec(*values)
    else:
        result = eq_vec(*values)
    out.emit(format_int(result), value=result)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("output", "Output and resource configurations")
    group.add_argument("--format", choices=["text", "jsonl"], default="text", help="Output format")
    group.add_argument("--budgets", type=str, default=None, help="Budgets YAML file")
    group.add_argument("--verbose", action="store_true", help="Debug logging to stderr")

    parser = argparse.ArgumentParser(prog="lazyram", description="Lazy big-number RAM toolkit")
    modules = parser.add_subparsers(dest="module", required=True)

    def command(group_parsers, name: str, handler, help: str) -> argparse.ArgumentParser:
        p = group_parsers.add_parser(name, parents=[common], help=help)
        p.set_defaults(handler=handler)
        return p

    slp = modules.add_parser("slp", help="Straight-line programs").add_subparsers(dest="command", required=True)
    p = command(slp, "eval", cmd_slp_eval, "Evaluate a program")
    p.add_argument("file")
    p.add_argument("--mode", choices=["direct", "lazy", "aln"], default="lazy")
    p.add_argument("--bit", type=int, default=None, help="Report this bit of the output")
    p.add_argument("--input", action="append", default=[], help="Value of the next input slot")
    p.add_argument("--space", action="store_true", help="Print the space report")
    p = command(slp, "gen", cmd_slp_gen, "Generate a random program")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ops", type=str, default=None, help="Comma separated operations")
    p.add_argument("--inputs", type=int, default=0, help="Number of input slots")

    ram = modules.add_parser("ram", help="RAM programs").add_subparsers(dest="command", required=True)
    for name, handler, text in (("run", cmd_ram_run, "Run a program"), ("trace", cmd_ram_trace, "Executed assignments as a program")):
        p = command(ram, name, handler, text)
        p.add_argument("file")
        p.add_argument("--input", type=str, default="0")
        p.add_argument("--gate", type=str, default=None, help="Allowed operations, e.g. add,shl,bool")
        p.add_argument("--max-steps", type=int, default=None)
    p = command(ram, "el", cmd_ram_el, "Expansion-limit bound")
    p.add_argument("--gate", type=str, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--bits", type=int, required=True, help="Input length in bits")

    aram = modules.add_parser("aram", help="RAMs with an arbitrarily large number").add_subparsers(dest="command", required=True)
    p = command(aram, "run", cmd_aram_run, "Run over a schedule of large numbers")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--gate", type=str, default=None)
    p.add_argument("--schedule", type=str, default=None, help="Comma separated large numbers")
    p.add_argument("--rounds", type=int, default=4, help="Doubling schedule length without --schedule")
    p.add_argument("--max-steps", type=int, default=None)

    tm = modules.add_parser("tm", help="Turing machines").add_subparsers(dest="command", required=True)
    p = command(tm, "run", cmd_tm_run, "Run a machine")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--cells", type=int, default=None, help="Tape bound s")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--max-steps", type=int, default=None)
    p = command(tm, "compile", cmd_tm_compile, "Emit a RAM program")
    p.add_argument("file")
    p.add_argument("--variant", choices=["step", "bounded", "parallel"], default="step")
    p.add_argument("--no-shr", action="store_true", help="Rewrite without right shifts")
    p.add_argument("-o", "--output", type=str, default=None)

    tableau = modules.add_parser("tableau", help="Tableau witnesses and simulation").add_subparsers(dest="command", required=True)
    p = command(tableau, "make", cmd_tableau_make, "Witnesses of an accepting run")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("-o", "--output", type=str, default=None)
    p = command(tableau, "verify", cmd_tableau_verify, "Check witnesses")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--witness", type=str, required=True)
    p.add_argument("--final-state", type=int, choices=list(HALTING_STATES), default=ACCEPT)
    p = command(tableau, "simulate", cmd_tableau_simulate, "Check a pack of candidate tableaus")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--source", choices=[s.value for s in CandidateSource], default=CandidateSource.FROM_RUN.value)
    p.add_argument("--candidates", type=str, default=None, help="Comma separated tableaus (explicit source)")
    p.add_argument("--length", type=int, default=None, help="Tableau length n (explicit and exhaustive sources)")
    p.add_argument("--count", type=int, default=16, help="Corruptions to add")
    p.add_argument("--seed", type=int, default=0)
    p = command(tableau, "run1", cmd_tableau_run1, "Doubling tape bounds")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--source", choices=[s.value for s in CandidateSource], default=CandidateSource.FROM_RUN.value)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--detect-reject", action="store_true")
    p.add_argument("--el-constant", type=int, default=None, help="Use this tape bound in every round")
    p = command(tableau, "run2", cmd_tableau_run2, "Tape bound from a large number")
    p.add_argument("file")
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--aln", type=str, required=True)
    p.add_argument("--source", choices=[s.value for s in CandidateSource], default=CandidateSource.FROM_RUN.value)

    nram = modules.add_parser("nram", help="Single-integer certificates").add_subparsers(dest="command", required=True)
    p = command(nram, "pack", cmd_nram_pack, "Pack a certificate")
    p.add_argument("file")
    p.add_argument("--opset", choices=[s.value for s in NramScheme], required=True)
    p.add_argument("--input", type=str, default="0")
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--allow-rejecting", action="store_true", help="Pack runs that halt without accepting")
    p.add_argument("-o", "--output", type=str, default=None)
    p = command(nram, "verify", cmd_nram_verify, "Verify a certificate")
    p.add_argument("file")
    p.add_argument("--opset", choices=[s.value for s in NramScheme], required=True)
    p.add_argument("--input", type=str, default="0")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--alpha", type=str)
    source.add_argument("--alpha-file", type=str)
    p.add_argument("--strict", action="store_true", help="Fail on the first operation outside the set")

    vec = modules.add_parser("vec", help="Encoded vector toolkit").add_subparsers(dest="kind", required=True)
    for kind, text in (("O", "O a m n"), ("U", "U T"), ("gt", "gt m V1 V2 n"), ("eq", "eq m V1 V2 n")):
        p = command(vec, kind, cmd_vec, text)
        p.add_argument("values", nargs="+")
    return parser


def dispatch(argv: Sequence[str], stream=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    setup_logging(args.verbose)
    out = Output(args.format, stream)
    try:
        return args.handler(args, out)
    except NotAccepting as e:
        out.emit(f"reject {e}", accepted=False, reason=str(e))
        return EXIT_FALSE
    except BudgetError as e:
        print(f"budget error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (LazyRamError, OSError, ValueError, argparse.ArgumentTypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))
