import random
from typing import Any, Dict, Optional

from src.errors import BudgetExceeded, GenerationFailed
from src.ram import OpSetGate, el_bound, parse_ram, run_ram
from src.slp import eval_slp_direct, gen_random_slp
from src.task import DataPiece, Dataset, Task
from src.utils import read_text


def _bound(gate: OpSetGate, steps: int, bits: int, cap: int) -> Optional[int]:
    """None when the bound itself runs past the recurrence cap."""
    try:
        return el_bound(gate, steps, bits, cap)
    except BudgetExceeded:
        return None


class ElAccounting(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Largest value a run builds against the expansion-limit bound for its gate.

    Covers fixture programs on a few inputs and random straight-line programs over
    each gate's operations.
    """

    def __init__(self, **configs):
        self.programs = configs.pop("programs", [])  # [path, gate, [inputs]]
        self.random_gates = configs.pop("random_gates", ["add", "add,mul", "add,bool"])
        self.count = configs.pop("count", 10)
        self.length = configs.pop("length", 6)
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        for path, gate, inputs in self.programs:
            for input in inputs:
                data.append(DataPiece({"kind": "ram", "program": path, "gate": gate, "input": input},
                                      {"within": True, "halted": True}))
        rng = random.Random(self.seed)
        for gate in self.random_gates:
            for _ in range(self.count):
                data.append(DataPiece({"kind": "slp", "gate": gate, "seed": rng.getrandbits(32)},
                                      {"within": True}))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        gate = OpSetGate.parse(data_item["gate"])
        halted = True
        if data_item["kind"] == "ram":
            input = data_item["input"]
            run = run_ram(parse_ram(read_text(data_item["program"])), input, gate, self.budgets.max_steps,
                          value_bits=self.budgets.value_bits)
            steps, largest, bits = run.state.steps, run.state.max_value_seen, input.bit_length()
            halted = run.halted
        else:
            try:
                p = gen_random_slp(self.length, sorted(gate.allowed), seed=data_item["seed"],
                                   budget=self.budgets.direct_bits)
            except GenerationFailed:
                return {"within": True, "skipped": True}
            steps, largest, bits = len(p.steps), max(eval_slp_direct(p, budget=self.budgets.direct_bits).values), 1
        bound = _bound(gate, steps, bits, self.budgets.el_bit_cap)
        return {
            "within": bound is None or largest <= bound,
            "halted": halted,
            "steps": steps,
            "largest_bits": largest.bit_length(),
            "bound_bits": None if bound is None else bound.bit_length(),
        }
