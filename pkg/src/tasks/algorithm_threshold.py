from typing import Any, Dict

from src.tableau import CandidateSource, algorithm1, algorithm2
from src.task import DataPiece, Dataset, Task
from src.tm import ACCEPT, REJECT, parse_tm, run_tm
from src.utils import read_text


class AlgorithmThreshold(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Acceptance by tableau search against a plain bounded run.

    The large-number variant runs once per tape bound in ``alns`` and must accept
    exactly when the run on that many cells accepts; the doubling variant must
    accept every listed accepting case.
    """

    def __init__(self, **configs):
        self.cases = configs.pop("cases", [])  # [machine path, input]
        self.alns = configs.pop("alns", [0, 1, 2, 3, 4, 8, 16])
        self.doubling = configs.pop("doubling", [])  # [machine path, input]
        self.source = CandidateSource(configs.pop("source", CandidateSource.FROM_RUN.value))
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        for path, input in self.cases:
            spec = parse_tm(read_text(path))
            for aln in self.alns:
                accepts = aln >= 1 and not input >> aln and run_tm(spec, input, aln, self.budgets.max_steps).verdict == ACCEPT
                data.append(DataPiece(
                    {"variant": "aln", "machine": path, "input": input, "aln": aln},
                    {"verdict": ACCEPT if accepts else REJECT},
                ))
        for path, input in self.doubling:
            data.append(DataPiece({"variant": "doubling", "machine": path, "input": input}, {"verdict": ACCEPT}))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        spec = parse_tm(read_text(data_item["machine"]))
        input = data_item["input"]
        if data_item["variant"] == "aln":
            result = algorithm2(spec, input, data_item["aln"], self.source, self.budgets)
        else:
            result = algorithm1(spec, input, source=self.source, budgets=self.budgets)
        return {"verdict": result.verdict, "s": result.s, "iterations": result.iterations, "reason": result.reason}
