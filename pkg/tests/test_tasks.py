import json
import os

import jsonlines
import pytest

from src import YAMLConfig
from src.task import matches
from src.tasks import (
    AlgorithmThreshold,
    CodegenEquivalence,
    ElAccounting,
    LazyDifferential,
    NramCorruption,
    TableauCorruption,
    TowerSpace,
    VectorSweep,
)
from src.tasks.tower_space import tower
from src.tm import ACCEPT, REJECT

from .conftest import fixture_path

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _machine(name):
    return fixture_path("tm", f"{name}.tm")


def _perfect(task):
    result = task.evaluate()
    assert result["failures"] == []
    assert result["EM"] == 1
    return result


def test_matches_pins_only_named_keys():
    assert matches({"a": 1, "b": 2}, {"a": 1})
    assert not matches({"a": 2, "b": 2}, {"a": 1})
    assert not matches({"error": "Traceback"}, {"a": 1})
    assert matches(3, 3) and not matches(3, {"a": 3})


def test_evaluate_writes_outputs(tmp_path):
    task = VectorSweep(name="vectors", count=10, output_root_dir=str(tmp_path), seed=1)
    _perfect(task)
    out = tmp_path / "vectors"
    with open(out / "results.json") as f:
        assert json.load(f)["EM"] == 1
    with jsonlines.open(out / "runs.jsonl") as reader:
        assert len(list(reader)) == 10
    with jsonlines.open(out / "generation.jsonl") as reader:
        assert sorted(record["index"] for record in reader) == list(range(10))


def test_failing_items_are_recorded(tmp_path):
    class Broken(VectorSweep):
        def predict_single(self, data_item):
            raise ValueError("boom")

    result = Broken(name="broken", count=3, output_root_dir=str(tmp_path)).evaluate()
    assert result["EM"] == 0
    assert result["failures"] == [0, 1, 2]


def test_lazy_differential(tmp_path):
    task = LazyDifferential(name="lazy", count=8, length=6, input_slots=1, budget=512, output_root_dir=str(tmp_path),
                            workers=2)
    data = task.get_data()
    assert all(item.target["mismatched_bits"] == 0 for item in data)
    output = task.predict_single(data[0].input)
    assert output["checked_bits"] >= 1 and output["mismatched_bits"] == 0
    _perfect(task)


def test_lazy_differential_checks_every_aln_omega(tmp_path):
    task = LazyDifferential(name="aln", count=4, length=4, input_slots=1, aln=True, omegas=9,
                            ops=["add", "sub", "shl", "xor"], output_root_dir=str(tmp_path))
    output = task.predict_single(task.get_data()[0].input)
    assert output["omegas"] == 9 and output["disagreements"] == 0
    _perfect(task)


def test_tower_space(tmp_path):
    result = _perfect(TowerSpace(name="towers", max_height=5, output_root_dir=str(tmp_path)))
    assert 0 < result["max_scalar_bits"] < 1 << 10
    assert len(tower(3).steps) == 3 and len(tower(3, minus_one=True).steps) == 4


def test_tower_space_bounds_scalar_bits(tmp_path):
    task = TowerSpace(name="towers", min_height=10, max_height=12, scalar_factor=8, output_root_dir=str(tmp_path))
    assert [item.input["height"] for item in task.get_data()][::2] == [10, 11, 12]
    output = task.predict_single(task.get_data()[-1].input)
    assert output["scalar_bits_within"]
    assert output["max_scalar_bits"] <= 8 * 13 ** 2


def test_codegen_equivalence(tmp_path):
    task = CodegenEquivalence(name="codegen", machines=[_machine("flipper"), _machine("looper")], cells=[1, 2],
                              output_root_dir=str(tmp_path))
    data = task.get_data()
    # the looper never halts, so it only contributes single steps
    assert [item.input["kind"] for item in data] == ["step", "step", "parallel", "step", "step"]
    _perfect(task)


def test_tableau_corruption(tmp_path):
    _perfect(TableauCorruption(name="tableau", cases=[[_machine("acceptall"), 1, 1], [_machine("flipper"), 0, 2]],
                               corruptions=8, output_root_dir=str(tmp_path)))


def test_nram_corruption(tmp_path):
    cases = [["shl", _machine("acceptall"), 1, 1], ["mul", _machine("flipper"), 0, 2], ["div", _machine("reject"), 0, 2]]
    task = NramCorruption(name="nram", cases=cases, flips=6, output_root_dir=str(tmp_path))
    assert [item.target["accepted"] for item in task.get_data()] == [True, True, False]
    _perfect(task)


def test_algorithm_threshold(tmp_path):
    task = AlgorithmThreshold(name="threshold", cases=[[_machine("staircase"), 0]], alns=[0, 2, 3, 8],
                              doubling=[[_machine("acceptall"), 0]], output_root_dir=str(tmp_path))
    assert [item.target["verdict"] for item in task.get_data()] == [REJECT, REJECT, ACCEPT, ACCEPT, ACCEPT]
    _perfect(task)


def test_el_accounting(tmp_path):
    programs = [[fixture_path("ram", "double.ram"), "add", [0, 7]], [fixture_path("ram", "squares.ram"), "mul", [3]]]
    _perfect(ElAccounting(name="el", programs=programs, count=3, output_root_dir=str(tmp_path)))


def test_unknown_arguments_are_tolerated(tmp_path):
    task = VectorSweep(name="vectors", count=1, colour="blue", output_root_dir=str(tmp_path))
    assert not hasattr(task, "colour")


@pytest.mark.parametrize("config", ["vector_sweep.yaml", "tableau_corruption.yaml"])
def test_shipped_configs_load(monkeypatch, tmp_path, config):
    monkeypatch.chdir(ROOT)
    task = YAMLConfig.create_from_yaml(os.path.join("configs", "tasks", config), {"output_root_dir": str(tmp_path)})
    assert task.src.endswith(config)
    assert len(task.get_data()) > 0


def test_budgets_from_config(tmp_path):
    task = VectorSweep(name="vectors", budgets={"max_steps": 10}, output_root_dir=str(tmp_path))
    assert task.budgets.max_steps == 10
    assert task.budgets.witness_bits == 1 << 22
    task = VectorSweep(name="vectors", budgets=os.path.join(ROOT, "configs", "budgets.yaml"))
    assert task.budgets.exhaustive_bits > 0


def test_step_budget_reaches_the_library(tmp_path):
    task = ElAccounting(name="el", programs=[[fixture_path("ram", "countdown.ram"), "add,sub", [40]]],
                        random_gates=[], budgets={"max_steps": 10}, output_root_dir=str(tmp_path))
    result = task.evaluate()
    assert result["failures"] == [0]
