from typing import Any, Dict

from src.lazy import LazyEvaluator, LazyMode, space_report
from src.numerics import PrimOp
from src.slp import Slp, SlpStep, dump_slp, parse_slp
from src.task import DataPiece, Dataset, Task


def tower(height: int, minus_one: bool = False) -> Slp:
    """v2 = 2 and v(i+1) = 1 << v(i): a tower of twos ``height`` levels high.

    With ``minus_one`` the last step subtracts 1, so the output is all ones.
    """
    p = Slp()
    p.steps.append(SlpStep(PrimOp.SHL, (1, 1)))
    for i in range(1, height):
        p.steps.append(SlpStep(PrimOp.SHL, (1, p.n)))
    if minus_one:
        p.steps.append(SlpStep(PrimOp.SUB, (p.n, 1)))
    return p


class TowerSpace(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Towers far beyond direct evaluation; the lazy side reports its peak space.

    Every stored integer must stay within ``scalar_factor * n^2`` bits for an
    n-step tower.
    """

    def __init__(self, **configs):
        self.min_height = configs.pop("min_height", 1)
        self.max_height = configs.pop("max_height", 8)
        self.scalar_factor = configs.pop("scalar_factor", 8)
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        for height in range(self.min_height, self.max_height + 1):
            for minus_one in (False, True):
                p = tower(height, minus_one)
                # bit 0 of 2^k is 0 for k >= 1; the tower minus one ends in a 1
                data.append(DataPiece(
                    {"height": height, "minus_one": minus_one, "program": dump_slp(p)},
                    {"nonzero": True, "bit0": 1 if minus_one else 0, "scalar_bits_within": True},
                ))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        p = parse_slp(data_item["program"])
        evaluator = LazyEvaluator(p, (), LazyMode.PLAIN, cache_size=self.budgets.lazy_cache)
        nonzero = evaluator.nonzero()
        bit0 = evaluator.bit(p.n, evaluator.zero)
        report = space_report(evaluator)
        return {
            "nonzero": nonzero,
            "bit0": bit0,
            "scalar_bits_within": report.max_scalar_bits <= self.scalar_factor * len(p.steps) ** 2,
            "max_scalar_bits": report.max_scalar_bits,
            "max_live_indices": report.max_live_indices,
        }

    @property
    def metrics(self):
        metrics = dict(super().metrics)
        metrics["max_scalar_bits"] = lambda outputs, targets: max(
            (o.get("max_scalar_bits", 0) for o in outputs if isinstance(o, dict)), default=0
        )
        return metrics
