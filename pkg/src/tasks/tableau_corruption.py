from dataclasses import replace
from typing import Any, Dict

from src.tableau import (
    CandidateSource,
    candidate_pack,
    make_witnesses,
    simulate,
    step_fragment,
    verify_tableau,
)
from src.task import DataPiece, Dataset, Task
from src.tm import parse_tm
from src.utils import read_text


class TableauCorruption(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Genuine witnesses must pass and every corrupted tableau must fail, one at a
    time and all together in a simulation pack, with both passes agreeing per slot."""

    def __init__(self, **configs):
        self.cases = configs.pop("cases", [])  # [machine path, input, cells]
        self.corruptions = configs.pop("corruptions", 32)
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        for path, input, s in self.cases:
            data.append(DataPiece(
                {"machine": path, "input": input, "s": s},
                {"genuine": True, "corrupt_accepted": 0, "disagreements": 0},
            ))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        spec = parse_tm(read_text(data_item["machine"]))
        input, s = data_item["input"], data_item["s"]
        witness = make_witnesses(spec, input, s, self.budgets)
        genuine = verify_tableau(spec, input, witness, budgets=self.budgets)
        fragment = step_fragment(spec)
        pack = candidate_pack(spec, input, s, fragment.scale_shift, CandidateSource.CORRUPTIONS,
                              count=self.corruptions, seed=self.seed, budgets=self.budgets)
        verdicts = [
            verify_tableau(spec, input, replace(witness, w2=candidate), budgets=self.budgets)
            for candidate in pack.candidates
        ]
        report = simulate(spec, input, s, CandidateSource.EXPLICIT, candidates=pack.candidates, n=pack.n,
                          budgets=self.budgets, fragment=fragment)
        flags = report.slot_flags()
        reasons: Dict[str, int] = {}
        for verdict in verdicts[1:]:
            reasons[verdict.reason] = reasons.get(verdict.reason, 0) + 1
        return {
            "genuine": genuine.accepted,
            "corrupt_accepted": sum(1 for verdict in verdicts[1:] if verdict),
            "disagreements": sum(1 for verdict, flag in zip(verdicts, flags) if bool(verdict) != bool(flag)),
            "reasons": reasons,
        }
