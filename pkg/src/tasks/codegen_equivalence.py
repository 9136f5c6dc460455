import itertools
from typing import Any, Dict, List

from src.codegen import (
    emit_bounded_step,
    emit_step,
    pack_inputs,
    read_step_registers,
    remove_shr,
    run_fragment,
    step_registers,
    trace_parallel,
)
from src.ram import run_ram
from src.task import DataPiece, Dataset, Task
from src.tm import TmConfig, TmSpec, parse_tm, run_tm, step_tm
from src.utils import print_progress, read_text


def _configs(spec: TmSpec, s: int) -> List[TmConfig]:
    return [
        TmConfig(tape, head, state, s)
        for tape, head, state in itertools.product(range(1 << s), range(s), range(spec.k))
    ]


def _key(cfg: TmConfig) -> List[int]:
    return [cfg.tape, cfg.head, cfg.state]


class CodegenEquivalence(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Emitted RAM steps against ``step_tm`` on every configuration of small tapes,
    and the parallel runner against one bounded run per packed machine."""

    def __init__(self, **configs):
        self.machines = configs.pop("machines", [])
        self.cells = configs.pop("cells", [1, 2, 3])
        self.runner_steps = configs.pop("runner_steps", 1000000)
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        for path in self.machines:
            spec = parse_tm(read_text(path))
            for s in self.cells:
                data.append(DataPiece({"kind": "step", "machine": path, "s": s},
                                      {"plain": 0, "bounded": 0, "shr_free": 0}))
            machines = [(s, inp) for s in self.cells for inp in range(1 << s)]
            runs = [run_tm(spec, inp, s, self.budgets.max_steps) for s, inp in machines]
            if not all(run.halted for run in runs):
                print_progress(f"    '{path}' does not halt everywhere, parallel runner skipped")
                continue
            data.append(DataPiece(
                {"kind": "parallel", "machine": path, "machines": machines},
                {"states": [run.config.state for run in runs], "step_mismatches": 0},
            ))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        spec = parse_tm(read_text(data_item["machine"]))
        if data_item["kind"] == "parallel":
            return self._parallel(spec, [tuple(m) for m in data_item["machines"]])
        return self._steps(spec, data_item["s"])

    def _steps(self, spec: TmSpec, s: int) -> Dict[str, Any]:
        plain, bounded = emit_step(spec), emit_bounded_step(spec)
        shr_free = remove_shr(bounded.program)
        mismatches = {"plain": 0, "bounded": 0, "shr_free": 0}
        for cfg in _configs(spec, s):
            expected = _key(step_tm(spec, cfg))
            unbounded = TmConfig(cfg.tape, cfg.head, cfg.state)
            got = run_fragment(plain.commands, step_registers(spec, unbounded))
            # only the unbounded machine may step past cell s - 1
            if _key(read_step_registers(spec, got)) != _key(step_tm(spec, unbounded)):
                mismatches["plain"] += 1
            got = run_fragment(bounded.commands, step_registers(spec, cfg, bounded=True))
            if _key(read_step_registers(spec, got, s)) != expected:
                mismatches["bounded"] += 1
            run = run_ram(shr_free.program, registers=step_registers(spec, cfg, bounded=True))
            if _key(read_step_registers(spec, shr_free.decode(run.state.registers), s)) != expected:
                mismatches["shr_free"] += 1
        return mismatches

    def _parallel(self, spec: TmSpec, machines: List[tuple]) -> Dict[str, Any]:
        layout = pack_inputs(machines, spec.c)
        trace, halted = trace_parallel(spec, layout, self.runner_steps)
        if not halted:
            return {"halted": False}
        # every machine on its own, one transition per pass through the runner loop
        expected = [TmConfig(inp, 0, 0, s) for s, inp in machines]
        mismatches = 0
        for configs in trace:
            mismatches += sum(got != want for got, want in zip(configs, expected))
            expected = [step_tm(spec, cfg) for cfg in expected]
        final = trace[-1]
        return {
            "halted": True,
            "states": [cfg.state for cfg in final],
            "heads": [cfg.head for cfg in final],
            "step_mismatches": mismatches,
        }
