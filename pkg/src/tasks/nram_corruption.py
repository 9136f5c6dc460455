from typing import Any, Dict

import numpy as np

from src.nram import NramScheme, pack_alpha, verify_nram
from src.task import DataPiece, Dataset, Task
from src.tm import ACCEPT, parse_tm, run_tm
from src.utils import read_text


class NramCorruption(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Certificates of every scheme: genuine ones pass inside their operation set,
    bit flips of alpha and certificates of rejecting runs do not."""

    def __init__(self, **configs):
        self.cases = configs.pop("cases", [])  # [scheme, machine path, input, cells]
        self.flips = configs.pop("flips", 16)
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        data = Dataset()
        for scheme, path, input, s in self.cases:
            accepting = run_tm(parse_tm(read_text(path)), input, s, self.budgets.max_steps).verdict == ACCEPT
            data.append(DataPiece(
                {"scheme": NramScheme(scheme).value, "machine": path, "input": input, "s": s},
                {"accepted": accepting, "violations": 0, "corrupt_accepted": 0},
            ))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        scheme = NramScheme(data_item["scheme"])
        spec = parse_tm(read_text(data_item["machine"]))
        input = data_item["input"]
        pack = pack_alpha(scheme, spec, input, data_item["s"], self.budgets, allow_rejecting=True)
        verdict = verify_nram(scheme, pack.alpha, spec, input, self.budgets)
        rng = np.random.default_rng(self.seed)
        bits = pack.alpha.bit_length()
        positions = rng.choice(bits, size=min(self.flips, bits), replace=False)
        corrupt = [verify_nram(scheme, pack.alpha ^ (1 << int(p)), spec, input, self.budgets) for p in positions]
        return {
            "accepted": verdict.accepted,
            "reason": verdict.reason,
            "violations": verdict.violations + sum(v.violations for v in corrupt),
            "operations": verdict.operations,
            "bits": bits,
            "corrupt_accepted": sum(1 for v in corrupt if v.accepted),
        }
