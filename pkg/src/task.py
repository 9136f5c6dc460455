import os
import json
import datetime
import threading
import traceback
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, Generic, List, TypeVar

import jsonlines
from tqdm import tqdm

from .configs import Budgets
from .utils import JsonEncoder, print_progress, serialize


T_INPUT = TypeVar('T_INPUT')
T_OUTPUT = TypeVar('T_OUTPUT')
T_TARGET = TypeVar('T_TARGET')


class DataPiece(Generic[T_INPUT, T_TARGET]):
    def __init__(self, input: T_INPUT, target: T_TARGET):
        self.input = input
        self.target = target


class Dataset(Generic[T_INPUT, T_TARGET], List[DataPiece[T_INPUT, T_TARGET]]):
    def get_inputs(self) -> List[T_INPUT]:
        return [item.input for item in self]

    def get_targets(self) -> List[T_TARGET]:
        return [item.target for item in self]


def matches(output: Any, target: Any) -> bool:
    """Dict targets only pin the keys they name."""
    if isinstance(output, dict) and isinstance(target, dict):
        return all(output.get(key) == value for key, value in target.items())
    return output == target


def _budgets(value: Any) -> Budgets:
    """A budgets YAML path, a dict of overrides, or None for the defaults."""
    if isinstance(value, Budgets):
        return value
    if isinstance(value, dict):
        return Budgets.load(**value)
    return Budgets.load(value)


class Task(Generic[T_INPUT, T_OUTPUT, T_TARGET]):
    """A batch of checks whose outputs are compared against known targets.

    Items that raise are recorded with their traceback and count as mismatches.
    """

    def __init__(self, **kwargs):
        self.name = kwargs.pop("name", None)
        self.worker_limit = kwargs.pop("worker_limit", None)
        self.workers = kwargs.pop("workers", 1)
        self.category = kwargs.pop("category", None)
        self.src = kwargs.pop("src", None)
        self.output_root_dir = kwargs.pop("output_root_dir", None)
        self.seed = kwargs.pop("seed", 0)
        self.budgets = _budgets(kwargs.pop("budgets", None))
        self._lock = threading.Lock()
        assert isinstance(self.workers, int) and self.workers > 0
        assert isinstance(self.name, str)
        for key in kwargs:
            print_progress(f"    Warning: unknown argument '{key}' for task '{self.name}'")

    def release(self):
        pass

    def evaluate(self) -> Dict[str, Any]:
        print_progress(f"> Evaluating task '{self.name}' ...")
        data = self.get_data()
        inputs = data.get_inputs()
        targets = data.get_targets()
        results = self.predict_all(inputs)
        result_dict = {}
        for metric in self.metrics:
            result_dict[metric] = self.metrics[metric](results, targets)
        print_progress(f"> Task '{self.name}' finished: {result_dict}. Results are saved in '{self.get_output_dir()}'")
        self.save_runs_all(inputs, results, targets, result_dict)
        return result_dict

    def predict_all(self, inputs: List[T_INPUT]) -> List[T_OUTPUT]:
        thread_count = self.workers
        if self.worker_limit:
            thread_count = min(self.workers, self.worker_limit)

        results = [None] * len(inputs)

        def call_wrap(data_item, index):
            try:
                result = self.predict_single(data_item)
            except Exception:
                result = {"error": traceback.format_exc()}
            self.save_single(index, data_item, result)
            results[index] = result

        with ThreadPoolExecutor(max_workers=thread_count) as executor:
            futures = [executor.submit(call_wrap, item, idx) for idx, item in enumerate(inputs)]
            with tqdm(total=len(inputs)) as pbar:
                for _ in as_completed(futures):
                    pbar.update(1)

        return results

    def _output_file(self, name: str) -> str:
        if not os.path.exists(self.get_output_dir()):
            os.makedirs(self.get_output_dir())
        return os.path.join(self.get_output_dir(), name)

    def save_single(self, index: int, input: T_INPUT, output: T_OUTPUT):
        with self._lock, jsonlines.open(self._output_file("generation.jsonl"), "a") as writer:
            writer.write({"index": index, "input": serialize(input), "output": serialize(output)})

    def save_runs_all(self, inputs: List[T_INPUT], outputs: List[T_OUTPUT], targets: List[T_TARGET], metrics: Dict[str, Any] = None):
        with jsonlines.open(self._output_file("runs.jsonl"), "a") as writer:
            for idx, (input, output, target) in enumerate(zip(inputs, outputs, targets)):
                writer.write({
                    "index": idx,
                    "input": serialize(input),
                    "output": serialize(output),
                    "target": serialize(target),
                })
        self.save_metrics_all(metrics)

    def save_metrics_all(self, metrics: Dict[str, Any]):
        with open(self._output_file("results.json"), "w", encoding="utf-8") as f:
            f.write(json.dumps(metrics, indent=4, cls=JsonEncoder))

    def get_output_dir(self) -> str:
        """
            Default output directory is: outputs/{time_str}/{name or category}
        """
        if not self.output_root_dir:
            self.output_root_dir = "outputs/%s" % datetime.datetime.now().strftime("%Y-%m-%d-%H-%M-%S")
        return os.path.join(self.output_root_dir, self.category or self.name or "default")

    @property
    def metrics(self) -> Dict[str, Callable[[List[T_OUTPUT], List[T_TARGET]], Any]]:
        return {
            "EM": lambda outputs, targets: len([1 for o, t in zip(outputs, targets) if matches(o, t)]) / max(1, min(len(outputs), len(targets))),
            "failures": lambda outputs, targets: [i for i, (o, t) in enumerate(zip(outputs, targets)) if not matches(o, t)],
        }

    def get_data(self) -> Dataset[T_INPUT, T_TARGET]:
        raise NotImplementedError

    def predict_single(self, data_item: T_INPUT) -> T_OUTPUT:
        raise NotImplementedError
