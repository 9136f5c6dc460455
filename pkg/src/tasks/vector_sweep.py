from typing import Any, Dict

import numpy as np

from src.numerics import natsub_via_bool
from src.tableau.vectors import decode_vector, encode_vector, eq_vec, gt_vec, make_O
from src.task import DataPiece, Dataset, Task


class VectorSweep(Task[Dict[str, Any], Dict[str, Any], Dict[str, Any]]):
    """Random element-wise comparisons and constant vectors against plain integer results."""

    def __init__(self, **configs):
        self.count = configs.pop("count", 200)
        self.max_width = configs.pop("max_width", 12)
        self.max_length = configs.pop("max_length", 16)
        super().__init__(**configs)

    def get_data(self) -> Dataset[Dict[str, Any], Dict[str, Any]]:
        rng = np.random.default_rng(self.seed)
        data = Dataset()
        for _ in range(self.count):
            m = int(rng.integers(1, self.max_width + 1))
            n = int(rng.integers(1, self.max_length + 1))
            v1 = [int(x) for x in rng.integers(0, 1 << m, size=n)]
            v2 = [int(x) for x in rng.integers(0, 1 << m, size=n)]
            # a share of equal elements, which random draws rarely give at larger widths
            for i in np.flatnonzero(rng.random(n) < 0.25):
                v2[i] = v1[i]
            a, b = v1[0], v2[0]
            data.append(DataPiece(
                {"m": m, "n": n, "v1": v1, "v2": v2},
                {
                    "gt": [int(x > y) for x, y in zip(v1, v2)],
                    "eq": [int(x == y) for x, y in zip(v1, v2)],
                    "natsub": max(a - b, 0),
                    "O": [a] * n,
                },
            ))
        return data

    def predict_single(self, data_item: Dict[str, Any]) -> Dict[str, Any]:
        m, n = data_item["m"], data_item["n"]
        v1, v2 = (encode_vector(data_item[key], m) for key in ("v1", "v2"))
        a, b = data_item["v1"][0], data_item["v2"][0]
        return {
            "gt": decode_vector(m, gt_vec(m, v1, v2, n), n),
            "eq": decode_vector(m, eq_vec(m, v1, v2, n), n),
            "natsub": natsub_via_bool(a, b),
            "O": decode_vector(m, make_O(a, m, n), n),
        }
