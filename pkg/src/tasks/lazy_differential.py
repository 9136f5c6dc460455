import random
from typing import Any, Dict, List, Optional

from src.errors import BudgetExceeded, GenerationFailed
from src.lazy import LazyEvaluator, LazyMode, aln_omegas, position_oracle, space_report, substitute_aln
from src.numerics import PrimOp
from src.slp import LAZY_OPS, Slp, dump_slp, eval_slp_direct, gen_random_slp, parse_slp
from src.task import DataPiece, Dataset, Task
from src.utils import print_progress


class LazyDifferential(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Random programs evaluated lazily and directly; the two must agree.

    Plain programs are compared at every enumerated index of the output. With
    ``aln`` set, slot 2 holds X and the ALN answer is checked against X = 2^omega
    for each of the ``omegas`` doubling values from ``aln_omegas``. Omegas whose
    value fits ``budget`` are evaluated directly; larger ones run the plain lazy
    evaluator on the program with X computed by a prefix. Generation needs a
    concrete X, for which ``omega`` is the stand-in.
    """

    def __init__(self, **configs):
        self.count = configs.pop("count", 20)
        self.length = configs.pop("length", 8)
        self.ops = configs.pop("ops", None)
        self.input_slots = configs.pop("input_slots", 0)
        self.input_bits = configs.pop("input_bits", 8)
        self.aln = configs.pop("aln", False)
        self.omega = configs.pop("omega", 256)
        self.omegas = configs.pop("omegas", 9)
        self.shift_cap = configs.pop("shift_cap", 16)
        self.budget = configs.pop("budget", 1 << 14)
        super().__init__(**configs)
        if self.aln and self.input_slots < 1:
            self.input_slots = 1

    @property
    def mode(self) -> LazyMode:
        return LazyMode.ALN if self.aln else LazyMode.PLAIN

    def _ops(self) -> List[PrimOp]:
        if not self.ops:
            return list(LAZY_OPS)
        return [PrimOp.parse(name) for name in self.ops]

    def _sample(self, seed: int) -> Optional[DataPiece]:
        rng = random.Random(seed)
        concrete = [rng.getrandbits(self.input_bits) for _ in range(self.input_slots - (1 if self.aln else 0))]
        x = [1 << self.omega] if self.aln else []
        try:
            p = gen_random_slp(
                self.length,
                self._ops(),
                seed=seed,
                budget=self.budget,
                input_slots=self.input_slots,
                inputs=x + concrete,
                shift_cap=self.shift_cap,
                frozen_slots=[2] if self.aln else (),
            )
            value = eval_slp_direct(p, x + concrete, self.budget).output
        except (BudgetExceeded, GenerationFailed):
            return None
        target = {"disagreements": 0} if self.aln else {"nonzero": value != 0, "mismatched_bits": 0}
        return DataPiece({"seed": seed, "program": dump_slp(p), "inputs": concrete}, target)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        seed = self.seed
        while len(data) < self.count and seed - self.seed < 20 * self.count:
            piece = self._sample(seed)
            seed += 1
            if piece is not None:
                data.append(piece)
        skipped = seed - self.seed - len(data)
        if skipped:
            print_progress(f"    {skipped} program(s) over budget were skipped")
        return data

    def _reference(self, p: Slp, concrete: List[int], omega: int) -> bool:
        """Whether the output is nonzero for X = 2^omega."""
        if omega < self.budget:
            try:
                return eval_slp_direct(p, [1 << omega] + concrete, self.budget).output != 0
            except BudgetExceeded:
                pass
        return LazyEvaluator(substitute_aln(p, omega), concrete, cache_size=self.budgets.lazy_cache).nonzero()

    def _predict_aln(self, p: Slp, concrete: List[int]) -> Dict[str, Any]:
        evaluator = LazyEvaluator(p, concrete, LazyMode.ALN, cache_size=self.budgets.lazy_cache)
        nonzero = evaluator.nonzero()
        omegas = aln_omegas(p, self.omegas)
        disagreements = sum(self._reference(p, concrete, omega) != nonzero for omega in omegas)
        report = space_report(evaluator)
        return {
            "nonzero": nonzero,
            "disagreements": disagreements,
            "omegas": len(omegas),
            "max_scalar_bits": report.max_scalar_bits,
            "max_live_indices": report.max_live_indices,
        }

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        p = parse_slp(data_item["program"])
        concrete = data_item["inputs"]
        if self.aln:
            return self._predict_aln(p, concrete)
        value = eval_slp_direct(p, concrete, self.budget).output
        # one evaluator per item; the module-level helpers share state across threads
        evaluator = LazyEvaluator(p, concrete, self.mode, cache_size=self.budgets.lazy_cache)
        nonzero = evaluator.nonzero()
        checked = mismatched = 0
        for index in evaluator.iter_candidates(p.n):
            position = position_oracle(p, index, concrete, budget=self.budget)
            checked += 1
            mismatched += evaluator.bit(p.n, index) != (value >> position) & 1
        report = space_report(evaluator)
        return {
            "nonzero": nonzero,
            "mismatched_bits": mismatched,
            "checked_bits": checked,
            "max_scalar_bits": report.max_scalar_bits,
            "max_live_indices": report.max_live_indices,
        }
